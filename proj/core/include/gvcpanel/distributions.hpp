#pragma once

#include <cstddef>

namespace gvcpanel::num {

// Upper tail P(X > x) for chi-squared with dof degrees of freedom, via the
// regularized incomplete gamma function (series for x < dof + 1, continued
// fraction otherwise). Converges to 1e-12.
double chi2_sf(double x, std::size_t dof);
double chi2_cdf(double x, std::size_t dof);

// Standard normal upper tail P(Z > z).
double normal_sf(double z);
// Two-sided p-value for a z statistic.
double normal_two_sided_p(double z);

}  // namespace gvcpanel::num
