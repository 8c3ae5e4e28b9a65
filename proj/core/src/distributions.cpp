#include "gvcpanel/distributions.hpp"

#include <cmath>

#include "gvcpanel/error.hpp"

namespace gvcpanel::num {

namespace {

constexpr double kEps = 1e-12;
constexpr int kMaxIter = 10000;

// Regularized lower incomplete gamma P(a,x) by series expansion.
double gamma_p_series(double a, double x) {
  double ap = a;
  double del = 1.0 / a;
  double sum = del;
  for (int i = 0; i < kMaxIter; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * kEps)
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  throw Error("[numerics] incomplete gamma series did not converge");
}

// Regularized upper incomplete gamma Q(a,x) by continued fraction (Lentz).
double gamma_q_cf(double a, double x) {
  const double fpmin = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / fpmin;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIter; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = b + an / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps)
      return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  throw Error("[numerics] incomplete gamma continued fraction did not converge");
}

}  // namespace

double chi2_sf(double x, std::size_t dof) {
  if (dof == 0) throw Error("[numerics] chi2_sf: dof must be positive");
  if (x <= 0.0) return 1.0;
  const double a = 0.5 * static_cast<double>(dof);
  const double xs = 0.5 * x;
  if (xs < a + 1.0) return 1.0 - gamma_p_series(a, xs);
  return gamma_q_cf(a, xs);
}

double chi2_cdf(double x, std::size_t dof) { return 1.0 - chi2_sf(x, dof); }

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

double normal_two_sided_p(double z) { return std::erfc(std::fabs(z) / std::sqrt(2.0)); }

}  // namespace gvcpanel::num
