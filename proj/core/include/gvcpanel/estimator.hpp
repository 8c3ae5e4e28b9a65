#pragma once

#include <span>
#include <string>
#include <vector>

#include "gvcpanel/design.hpp"
#include "gvcpanel/diagnostics.hpp"
#include "gvcpanel/matrix.hpp"
#include "gvcpanel/model_spec.hpp"
#include "gvcpanel/panel.hpp"

namespace gvcpanel::est {

struct TwoSlsFit {
  std::vector<double> beta;
  std::vector<double> fitted;     // X * beta (original regressors)
  std::vector<double> residuals;  // y - X * beta
};

// Classic two-stage least squares via orthogonal projection on Z.
TwoSlsFit estimate_2sls(const DesignMatrices& dm);

struct GmmFit {
  std::vector<double> beta;
  std::vector<double> se;         // robust, from the second-step weight
  std::vector<double> fitted;
  std::vector<double> residuals;  // second-step residuals
  num::Matrix weight;             // inverse of the second-step moment covariance
  bool weight_ridged = false;
};

// Two-step efficient GMM: 2SLS start, HC-weighted second step. With l == k
// this collapses to the exactly identified IV estimator.
GmmFit estimate_gmm_two_step(const DesignMatrices& dm, Covariance cov);

double r_squared(std::span<const double> y, std::span<const double> fitted);

// 0..3 stars at the 10/5/1% two-sided normal thresholds.
int stars_for(double estimate, double se);

struct Coefficient {
  std::string label;
  double estimate = 0.0;
  double se = 0.0;
  int stars = 0;
  bool is_dummy = false;
};

struct EstimationResult {
  ModelSpec spec;
  std::vector<Coefficient> coefficients;  // design order; dummies included
  std::size_t n_obs = 0;
  double r2 = 0.0;
  DiagnosticsReport diagnostics;
  std::vector<std::string> warnings;
  std::vector<std::string> dropped_collinear;
};

// Full pipeline for one equation: design assembly, two-step GMM, KP and
// Hansen diagnostics, stars, high-correlation warnings.
EstimationResult run_specification(const panel::PanelDataset& ds, const ModelSpec& spec);

}  // namespace gvcpanel::est
