#include "gvcpanel/estimator.hpp"

#include <cmath>
#include <limits>

#include "gvcpanel/csv.hpp"
#include "gvcpanel/error.hpp"
#include "gvcpanel/linalg.hpp"
#include "gvcpanel/log.hpp"

namespace gvcpanel::est {

using num::Matrix;

namespace {

// sum_i z_i z_i' e_i^2, optionally with the HC1 small-sample factor
// n / (n - k) where k is the regressor count being estimated.
Matrix moment_meat(const Matrix& z, std::span<const double> e, Covariance cov, std::size_t k) {
  const std::size_t n = z.rows(), l = z.cols();
  Matrix s(l, l, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = e[i] * e[i];
    if (w == 0.0) continue;
    const double* zi = z.data() + i * l;
    for (std::size_t p = 0; p < l; ++p) {
      const double zw = zi[p] * w;
      if (zw == 0.0) continue;
      double* row = s.data() + p * l;
      for (std::size_t q = p; q < l; ++q) row[q] += zw * zi[q];
    }
  }
  for (std::size_t p = 0; p < l; ++p)
    for (std::size_t q = 0; q < p; ++q) s(p, q) = s(q, p);
  if (cov == Covariance::hc1) {
    if (n <= k) throw Error("[estimate] hc1 adjustment needs n > k");
    const double f = static_cast<double>(n) / static_cast<double>(n - k);
    for (std::size_t p = 0; p < l; ++p)
      for (std::size_t q = 0; q < l; ++q) s(p, q) *= f;
  }
  return s;
}

}  // namespace

TwoSlsFit estimate_2sls(const DesignMatrices& dm) {
  const std::size_t n = dm.n(), k = dm.k();
  if (dm.l() < k) throw Error("[estimate] fewer instruments than regressors");
  num::HouseholderQr zqr(dm.z, num::HouseholderQr::Mode::pivoted);
  if (zqr.rank() < dm.l()) throw Error("[estimate] instrument matrix is rank deficient");
  TwoSlsFit fit;
  if (dm.n_endogenous == 0 && dm.n_excluded == 0) {
    // Z is X column for column; one factorization does the whole fit.
    fit.beta = zqr.solve(dm.y);
  } else {
    // Only the endogenous block needs the first stage; the exogenous columns
    // sit in span(Z) already, so P_Z leaves them alone.
    Matrix xhat = dm.x;
    if (dm.n_endogenous > 0) {
      Matrix endog(n, dm.n_endogenous);
      for (std::size_t j = 0; j < dm.n_endogenous; ++j) endog.set_column(j, dm.x.column(j));
      const Matrix proj = zqr.project(endog);
      for (std::size_t j = 0; j < dm.n_endogenous; ++j) xhat.set_column(j, proj.column(j));
    }
    num::HouseholderQr xqr(xhat, num::HouseholderQr::Mode::pivoted);
    if (xqr.rank() < k)
      throw Error("[estimate] projected design is rank deficient (weak or invalid instruments)");
    fit.beta = xqr.solve(dm.y);
  }
  fit.fitted = num::multiply(dm.x, fit.beta);
  fit.residuals.resize(n);
  for (std::size_t i = 0; i < n; ++i) fit.residuals[i] = dm.y[i] - fit.fitted[i];
  return fit;
}

GmmFit estimate_gmm_two_step(const DesignMatrices& dm, Covariance cov) {
  const std::size_t n = dm.n(), k = dm.k(), l = dm.l();
  const TwoSlsFit start = estimate_2sls(dm);

  const Matrix s1 = moment_meat(dm.z, start.residuals, cov, k);
  const auto w1 = num::invert_pd(s1);

  const Matrix a = num::cross(dm.z, dm.x);  // l x k
  const auto zty = num::multiply_transposed(dm.z, dm.y);

  const Matrix wa = num::multiply(w1.inverse, a);
  const Matrix m = num::cross(a, wa);  // A' W A (using A rows = l): cross(a, wa) = a' wa
  const auto wb = num::multiply(w1.inverse, zty);
  const auto rhs = num::multiply_transposed(a, wb);
  const auto m_inv = num::invert_pd(m);
  GmmFit fit;
  fit.beta = num::multiply(m_inv.inverse, rhs);
  fit.fitted = num::multiply(dm.x, fit.beta);
  fit.residuals.resize(n);
  for (std::size_t i = 0; i < n; ++i) fit.residuals[i] = dm.y[i] - fit.fitted[i];

  const Matrix s2 = moment_meat(dm.z, fit.residuals, cov, k);
  const auto w2 = num::invert_pd(s2);
  fit.weight = w2.inverse;
  fit.weight_ridged = w1.ridge_applied || w2.ridge_applied;
  if (fit.weight_ridged) log_info("gmm: weight matrix needed a ridge; results may be fragile");

  const Matrix w2a = num::multiply(w2.inverse, a);
  const Matrix v = num::invert_pd(num::cross(a, w2a)).inverse;
  fit.se.resize(k);
  for (std::size_t j = 0; j < k; ++j) fit.se[j] = std::sqrt(std::max(v(j, j), 0.0));
  return fit;
}

double r_squared(std::span<const double> y, std::span<const double> fitted) {
  const std::size_t n = y.size();
  if (n < 2 || fitted.size() != n) throw Error("[estimate] r_squared: need n >= 2 matching arrays");
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(n);
  double sst = 0.0, ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sst += (y[i] - mean) * (y[i] - mean);
    ssr += (y[i] - fitted[i]) * (y[i] - fitted[i]);
  }
  if (sst <= 0.0) throw Error("[estimate] r_squared: dependent variable has zero variance");
  return 1.0 - ssr / sst;
}

int stars_for(double estimate, double se) {
  if (!(se > 0.0)) return 0;
  const double t = std::fabs(estimate / se);
  if (t >= 2.576) return 3;
  if (t >= 1.960) return 2;
  if (t >= 1.645) return 1;
  return 0;
}

EstimationResult run_specification(const panel::PanelDataset& ds, const ModelSpec& spec) {
  const DesignMatrices dm = build_design(ds, spec);
  const GmmFit fit = estimate_gmm_two_step(dm, spec.covariance);

  EstimationResult out;
  out.spec = spec;
  out.n_obs = dm.n();
  out.dropped_collinear = dm.dropped_collinear;
  out.r2 = r_squared(dm.y, fit.fitted);
  out.diagnostics.hansen = hansen_j(dm, fit.residuals, fit.weight);
  if (dm.n_endogenous > 0) out.diagnostics.kp = kp_rk_lm(dm, spec.covariance);

  out.coefficients.reserve(dm.k());
  for (std::size_t j = 0; j < dm.k(); ++j) {
    Coefficient c;
    c.label = dm.x_labels[j];
    c.estimate = fit.beta[j];
    c.se = fit.se[j];
    c.stars = stars_for(c.estimate, c.se);
    c.is_dummy = dm.x_is_dummy[j] != 0;
    out.coefficients.push_back(std::move(c));
  }

  // Flag highly correlated substantive regressors (dummies and the
  // intercept are excluded from the scan).
  std::vector<std::size_t> subst;
  for (std::size_t j = 0; j < dm.k(); ++j)
    if (!dm.x_is_dummy[j] && dm.x_labels[j] != "const") subst.push_back(j);
  const std::size_t n = dm.n();
  for (std::size_t a = 0; a < subst.size(); ++a) {
    for (std::size_t b = a + 1; b < subst.size(); ++b) {
      double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double x = dm.x(i, subst[a]);
        const double y = dm.x(i, subst[b]);
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
      }
      const double dn = static_cast<double>(n);
      const double varx = sxx - sx * sx / dn;
      const double vary = syy - sy * sy / dn;
      if (varx <= 0.0 || vary <= 0.0) continue;
      const double r = (sxy - sx * sy / dn) / std::sqrt(varx * vary);
      if (std::fabs(r) >= 0.7) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2f", r);
        out.warnings.push_back("high correlation between " + dm.x_labels[subst[a]] + " and " +
                               dm.x_labels[subst[b]] + " (r=" + buf + ")");
      }
    }
  }
  for (const auto& w : out.warnings) log_info("estimate: warning: " + w);
  return out;
}

}  // namespace gvcpanel::est
