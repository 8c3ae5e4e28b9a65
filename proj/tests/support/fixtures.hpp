#pragma once

// Shared builders for estimation-layer tests: hand-rolled design matrices,
// synthetic endogenous panels and a Gauss-Jordan GMM oracle that shares no
// factorization code with the library path.

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "gvcpanel/design.hpp"
#include "gvcpanel/matrix.hpp"
#include "gvcpanel/panel.hpp"
#include "gvcpanel/rng.hpp"
#include "support/oracles.hpp"

namespace fixtures {

inline gvcpanel::est::DesignMatrices direct_design(gvcpanel::num::Matrix x,
                                                   gvcpanel::num::Matrix z,
                                                   std::vector<double> y, std::size_t n_endo,
                                                   std::size_t n_excl) {
  gvcpanel::est::DesignMatrices dm;
  dm.y = std::move(y);
  dm.x = std::move(x);
  dm.z = std::move(z);
  for (std::size_t j = 0; j < dm.x.cols(); ++j) {
    dm.x_labels.push_back("x" + std::to_string(j));
    dm.x_is_dummy.push_back(0);
  }
  for (std::size_t j = 0; j < dm.z.cols(); ++j) {
    dm.z_labels.push_back("z" + std::to_string(j));
    dm.z_is_dummy.push_back(0);
  }
  dm.n_endogenous = n_endo;
  dm.n_excluded = n_excl;
  return dm;
}

inline gvcpanel::panel::Column full_column(std::vector<double> values) {
  gvcpanel::panel::Column c;
  c.missing.assign(values.size(), 0);
  c.values = std::move(values);
  return c;
}

inline std::string unit_name(std::size_t i) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "C%03zu", i);
  return buf;
}

// One endogenous regressor moving as an AR(1) within each (country, sector)
// cell; the structural error correlates with the regressor's innovation at
// rate rho, so lags are valid instruments while OLS is biased upward. The
// additive effects live at the country/sector/year levels, which matter:
// coarse dummy groups keep the demeaned lag instruments almost orthogonal
// to the demeaned error, while unit-level dummies would not.
inline gvcpanel::panel::PanelDataset endogenous_panel(std::size_t n_countries,
                                                      std::size_t n_sectors, int n_years,
                                                      double beta, double rho, double ar,
                                                      std::uint64_t seed) {
  using gvcpanel::panel::ObsKey;
  std::vector<ObsKey> keys;
  for (std::size_t c = 0; c < n_countries; ++c)
    for (std::size_t s = 0; s < n_sectors; ++s)
      for (int t = 0; t < n_years; ++t)
        keys.push_back(ObsKey{unit_name(c), static_cast<int>(s + 1), 2001 + t, std::nullopt});
  gvcpanel::panel::PanelDataset ds{keys};

  gvcpanel::Rng rng(seed);
  const std::size_t n = keys.size();
  std::vector<double> x(n), y(n);
  std::vector<double> country_fe(n_countries), sector_fe(n_sectors);
  std::vector<double> year_fe(static_cast<std::size_t>(n_years));
  for (auto& v : country_fe) v = rng.normal();
  for (auto& v : sector_fe) v = 0.7 * rng.normal();
  for (auto& v : year_fe) v = 0.5 * rng.normal();
  const double sd_x0 = std::sqrt(1.0 / (1.0 - ar * ar));
  std::size_t row = 0;
  for (std::size_t c = 0; c < n_countries; ++c) {
    for (std::size_t s = 0; s < n_sectors; ++s) {
      double xv = sd_x0 * rng.normal();
      for (int t = 0; t < n_years; ++t, ++row) {
        const double innov = rng.normal();
        xv = ar * xv + innov;
        const double e = rho * innov + std::sqrt(1.0 - rho * rho) * rng.normal();
        x[row] = xv;
        y[row] = beta * xv + country_fe[c] + sector_fe[s] + year_fe[static_cast<std::size_t>(t)] +
                 e;
      }
    }
  }
  ds.add_column("x", full_column(std::move(x)));
  ds.add_column("y", full_column(std::move(y)));
  return ds;
}

// Overidentified heteroskedastic IV system: one endogenous regressor, three
// excluded instruments, two exogenous controls plus intercept.
inline gvcpanel::est::DesignMatrices overidentified_fixture(std::uint64_t seed,
                                                            std::size_t n = 240) {
  using gvcpanel::num::Matrix;
  gvcpanel::Rng rng(seed);
  Matrix x(n, 4), z(n, 6);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z1 = rng.normal(), z2 = rng.normal(), z3 = rng.normal();
    const double c1 = rng.normal(), c2 = rng.normal();
    const double v = rng.normal();
    const double xe = 0.8 * z1 + 0.5 * z2 + 0.3 * z3 + 0.4 * c1 + v;
    const double e = (1.0 + 0.5 * std::fabs(c1)) * (0.5 * v + 0.866 * rng.normal());
    x(i, 0) = xe;
    x(i, 1) = c1;
    x(i, 2) = c2;
    x(i, 3) = 1.0;
    z(i, 0) = z1;
    z(i, 1) = z2;
    z(i, 2) = z3;
    z(i, 3) = c1;
    z(i, 4) = c2;
    z(i, 5) = 1.0;
    y[i] = 1.2 * xe - 0.7 * c1 + 0.3 * c2 + 0.5 + e;
  }
  return direct_design(std::move(x), std::move(z), std::move(y), 1, 3);
}

struct GmmOracle {
  std::vector<double> beta;
  std::vector<double> se;
  double hansen = 0.0;
};

inline gvcpanel::num::Matrix meat_oracle(const gvcpanel::num::Matrix& z,
                                         const std::vector<double>& e, bool hc1,
                                         std::size_t k) {
  const std::size_t n = z.rows(), l = z.cols();
  gvcpanel::num::Matrix s(l, l, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t p = 0; p < l; ++p)
      for (std::size_t q = 0; q < l; ++q) s(p, q) += z(i, p) * z(i, q) * e[i] * e[i];
  if (hc1) {
    const double f = static_cast<double>(n) / static_cast<double>(n - k);
    for (std::size_t p = 0; p < l; ++p)
      for (std::size_t q = 0; q < l; ++q) s(p, q) *= f;
  }
  return s;
}

// Brute-force two-step GMM through Gauss-Jordan inversion only; no QR, no
// Cholesky, so agreement is a genuine dual-path check.
inline GmmOracle gmm_oracle(const gvcpanel::est::DesignMatrices& dm, bool hc1) {
  using gvcpanel::num::Matrix;
  namespace num = gvcpanel::num;
  const std::size_t n = dm.n(), k = dm.k();
  const Matrix ztz_inv = oracles::gauss_jordan_inverse(num::gram(dm.z));
  const Matrix pi = num::multiply(ztz_inv, num::cross(dm.z, dm.x));
  const Matrix xhat = num::multiply(dm.z, pi);
  const auto b1 = oracles::normal_equation_ls(xhat, dm.y);
  std::vector<double> e1(n);
  {
    const auto f = num::multiply(dm.x, b1);
    for (std::size_t i = 0; i < n; ++i) e1[i] = dm.y[i] - f[i];
  }
  const Matrix w1 = oracles::gauss_jordan_inverse(meat_oracle(dm.z, e1, hc1, k));
  const Matrix a = num::cross(dm.z, dm.x);
  const auto zty = num::multiply_transposed(dm.z, dm.y);
  const Matrix m = num::cross(a, num::multiply(w1, a));
  const auto rhs = num::multiply_transposed(a, num::multiply(w1, zty));
  GmmOracle out;
  out.beta = num::multiply(oracles::gauss_jordan_inverse(m), rhs);
  std::vector<double> e2(n);
  {
    const auto f = num::multiply(dm.x, out.beta);
    for (std::size_t i = 0; i < n; ++i) e2[i] = dm.y[i] - f[i];
  }
  const Matrix w2 = oracles::gauss_jordan_inverse(meat_oracle(dm.z, e2, hc1, k));
  const Matrix v = oracles::gauss_jordan_inverse(num::cross(a, num::multiply(w2, a)));
  out.se.resize(k);
  for (std::size_t j = 0; j < k; ++j) out.se[j] = std::sqrt(v(j, j));
  const auto g = num::multiply_transposed(dm.z, e2);
  const auto wg = num::multiply(w2, g);
  for (std::size_t i = 0; i < g.size(); ++i) out.hansen += g[i] * wg[i];
  return out;
}

}  // namespace fixtures
