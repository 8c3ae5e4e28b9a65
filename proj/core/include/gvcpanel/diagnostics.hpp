#pragma once

#include <optional>
#include <span>

#include "gvcpanel/design.hpp"
#include "gvcpanel/matrix.hpp"

namespace gvcpanel::est {

struct TestResult {
  double stat = 0.0;
  std::size_t dof = 0;
  double pvalue = 1.0;
};

struct HansenResult {
  double stat = 0.0;
  std::size_t dof = 0;                // l - k; zero when exactly identified
  std::optional<double> pvalue;       // empty when exactly identified (printed NA)
};

// Hansen J overidentification statistic (Z'e)' W (Z'e) using the efficient
// weight from the second GMM step. Exactly identified models report a zero
// statistic and no p-value.
HansenResult hansen_j(const DesignMatrices& dm, std::span<const double> residuals,
                      const num::Matrix& weight);

// Kleibergen-Paap rk LM underidentification test. First-stage coefficients
// of the residualized endogenous block on the residualized excluded
// instruments are whitened and the smallest singular-value block is tested
// against zero with a robust covariance; chi-squared with l_e - k_e + 1
// degrees of freedom under the null of underidentification.
TestResult kp_rk_lm(const DesignMatrices& dm, Covariance cov);

struct DiagnosticsReport {
  std::optional<TestResult> kp;  // absent when the model has no endogenous block
  HansenResult hansen;
};

}  // namespace gvcpanel::est
