#include "gvcpanel/diagnostics.hpp"

#include <cmath>

#include "gvcpanel/distributions.hpp"
#include "gvcpanel/error.hpp"
#include "gvcpanel/linalg.hpp"

namespace gvcpanel::est {

using num::Matrix;

HansenResult hansen_j(const DesignMatrices& dm, std::span<const double> residuals,
                      const Matrix& weight) {
  if (residuals.size() != dm.n()) throw Error("[diagnostics] hansen: residual length mismatch");
  const auto g = num::multiply_transposed(dm.z, residuals);
  const auto wg = num::multiply(weight, g);
  double stat = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) stat += g[i] * wg[i];
  stat = std::max(stat, 0.0);

  HansenResult out;
  out.stat = stat;
  out.dof = dm.l() - dm.k();
  if (out.dof > 0) out.pvalue = num::chi2_sf(stat, out.dof);
  return out;
}

TestResult kp_rk_lm(const DesignMatrices& dm, Covariance cov) {
  const std::size_t n = dm.n();
  const std::size_t ke = dm.n_endogenous;
  const std::size_t le = dm.n_excluded;
  const std::size_t kx = dm.k() - ke;  // included exogenous columns
  if (ke == 0) throw Error("[diagnostics] kp_rk_lm: no endogenous block");
  if (le < ke) throw Error("[diagnostics] kp_rk_lm: fewer excluded instruments than endogenous");
  const std::size_t l_total = le + kx;
  if (n <= l_total) throw Error("[diagnostics] kp_rk_lm: sample too small for first stage");

  // Residualize endogenous block and excluded instruments on the included
  // exogenous columns (Frisch-Waugh).
  Matrix xe(n, ke), ze(n, le);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < ke; ++j) xe(i, j) = dm.x(i, j);
    for (std::size_t j = 0; j < le; ++j) ze(i, j) = dm.z(i, j);
  }
  if (kx > 0) {
    Matrix xx(n, kx);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < kx; ++j) xx(i, j) = dm.x(i, ke + j);
    num::HouseholderQr qr(xx, num::HouseholderQr::Mode::pivoted);
    const Matrix pxe = qr.project(xe);
    const Matrix pze = qr.project(ze);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < ke; ++j) xe(i, j) -= pxe(i, j);
      for (std::size_t j = 0; j < le; ++j) ze(i, j) -= pze(i, j);
    }
  }

  // First-stage coefficients and residuals.
  const Matrix ztz = num::gram(ze);
  const auto ztz_inv = num::invert_pd(ztz);
  const Matrix ztx = num::cross(ze, xe);
  const Matrix pi = num::multiply(ztz_inv.inverse, ztx);  // le x ke
  Matrix resid(n, ke);
  {
    const Matrix fitted = num::multiply(ze, pi);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < ke; ++j) resid(i, j) = xe(i, j) - fitted(i, j);
  }

  // Robust covariance of vec(pi), block (j,l) = A (sum v_ij v_il z_i z_i') A.
  const double scale =
      cov == Covariance::hc1 ? static_cast<double>(n) / static_cast<double>(n - l_total) : 1.0;
  std::vector<Matrix> vblock(ke * ke);
  for (std::size_t a = 0; a < ke; ++a) {
    for (std::size_t b = a; b < ke; ++b) {
      Matrix meat(le, le, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const double w = resid(i, a) * resid(i, b);
        if (w == 0.0) continue;
        const double* zi = ze.data() + i * le;
        for (std::size_t p = 0; p < le; ++p) {
          const double zw = zi[p] * w;
          double* row = meat.data() + p * le;
          for (std::size_t q = 0; q < le; ++q) row[q] += zw * zi[q];
        }
      }
      Matrix blk = num::multiply(num::multiply(ztz_inv.inverse, meat), ztz_inv.inverse);
      for (std::size_t p = 0; p < le; ++p)
        for (std::size_t q = 0; q < le; ++q) blk(p, q) *= scale;
      vblock[a * ke + b] = blk;
      if (b != a) vblock[b * ke + a] = blk.transposed();
    }
  }

  TestResult out;
  out.dof = le - ke + 1;

  if (ke == 1) {
    // Whitening cancels in the rank-zero null; straight Wald on pi.
    const auto vinv = num::invert_pd(vblock[0]);
    const auto p0 = pi.column(0);
    const auto vp = num::multiply(vinv.inverse, p0);
    double stat = 0.0;
    for (std::size_t i = 0; i < p0.size(); ++i) stat += p0[i] * vp[i];
    out.stat = std::max(stat, 0.0);
    out.pvalue = num::chi2_sf(out.stat, out.dof);
    return out;
  }

  // Whiten: theta = G pi F with G'G = Z'Z/n and F'F = (X'X/n)^{-1}.
  const double dn = static_cast<double>(n);
  Matrix ztz_n = ztz;
  for (std::size_t p = 0; p < le; ++p)
    for (std::size_t q = 0; q < le; ++q) ztz_n(p, q) /= dn;
  const Matrix g = num::cholesky_lower(ztz_n).transposed();  // G'G = Z'Z/n

  Matrix xtx_n = num::gram(xe);
  for (std::size_t p = 0; p < ke; ++p)
    for (std::size_t q = 0; q < ke; ++q) xtx_n(p, q) /= dn;
  const auto xtx_inv = num::invert_pd(xtx_n);
  const Matrix f = num::cholesky_lower(xtx_inv.inverse).transposed();  // F'F = (X'X/n)^{-1}

  const Matrix theta = num::multiply(num::multiply(g, pi), f);  // le x ke

  // Covariance blocks of vec(theta): [a,b] = sum_{c,d} F(c,a) F(d,b) G V[c,d] G'.
  std::vector<Matrix> tblock(ke * ke, Matrix(le, le, 0.0));
  for (std::size_t a = 0; a < ke; ++a) {
    for (std::size_t b = 0; b < ke; ++b) {
      Matrix acc(le, le, 0.0);
      for (std::size_t c = 0; c < ke; ++c) {
        for (std::size_t d = 0; d < ke; ++d) {
          const double w = f(c, a) * f(d, b);
          if (w == 0.0) continue;
          const Matrix& blk = vblock[c * ke + d];
          for (std::size_t p = 0; p < le; ++p)
            for (std::size_t q = 0; q < le; ++q) acc(p, q) += w * blk(p, q);
        }
      }
      tblock[a * ke + b] = num::multiply(num::multiply(g, acc), g.transposed());
    }
  }

  // Smallest singular block: lambda = U2' theta V2 against zero.
  const auto svd = num::svd_small(theta);
  const std::size_t r = ke - 1;
  Matrix u1(le, r);
  for (std::size_t c = 0; c < r; ++c) u1.set_column(c, svd.u.column(c));
  const Matrix u2 = num::orthonormal_complement(u1);  // le x (le - r)
  std::vector<double> v2 = svd.v.column(ke - 1);

  const std::size_t m = le - r;  // = le - ke + 1
  std::vector<double> lambda(m, 0.0);
  {
    const auto tv = num::multiply(theta, v2);  // le
    for (std::size_t p = 0; p < m; ++p) {
      double s = 0.0;
      for (std::size_t i = 0; i < le; ++i) s += u2(i, p) * tv[i];
      lambda[p] = s;
    }
  }

  Matrix omega(m, m, 0.0);
  for (std::size_t a = 0; a < ke; ++a) {
    for (std::size_t b = 0; b < ke; ++b) {
      const double w = v2[a] * v2[b];
      if (w == 0.0) continue;
      const Matrix& blk = tblock[a * ke + b];
      // U2' blk U2
      for (std::size_t p = 0; p < m; ++p) {
        for (std::size_t q = 0; q < m; ++q) {
          double s = 0.0;
          for (std::size_t i = 0; i < le; ++i) {
            double t = 0.0;
            for (std::size_t j = 0; j < le; ++j) t += blk(i, j) * u2(j, q);
            s += u2(i, p) * t;
          }
          omega(p, q) += w * s;
        }
      }
    }
  }

  const auto omega_inv = num::invert_pd(omega);
  const auto ol = num::multiply(omega_inv.inverse, lambda);
  double stat = 0.0;
  for (std::size_t i = 0; i < m; ++i) stat += lambda[i] * ol[i];
  out.stat = std::max(stat, 0.0);
  out.pvalue = num::chi2_sf(out.stat, out.dof);
  return out;
}

}  // namespace gvcpanel::est
