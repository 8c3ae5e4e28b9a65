#include "gvcpanel/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gvcpanel/error.hpp"
#include "gvcpanel/log.hpp"

namespace gvcpanel::num {

HouseholderQr::HouseholderQr(const Matrix& a, Mode mode, double rel_tol)
    : n_(a.rows()), k_(a.cols()), rel_tol_(rel_tol) {
  a_.resize(n_ * k_);
  for (std::size_t c = 0; c < k_; ++c)
    for (std::size_t r = 0; r < n_; ++r) a_[c * n_ + r] = a(r, c);
  rdiag_.assign(k_, 0.0);
  vsq_.assign(k_, 0.0);
  order_.resize(k_);
  for (std::size_t c = 0; c < k_; ++c) order_[c] = c;

  double max_colnorm = 0.0;
  for (std::size_t c = 0; c < k_; ++c)
    max_colnorm = std::max(max_colnorm, std::sqrt(trailing_sqnorm(c, 0)));
  tol_used_ = rel_tol_ * max_colnorm;

  if (max_colnorm == 0.0 || n_ == 0) {
    dropped_ = order_;
    std::sort(dropped_.begin(), dropped_.end());
    return;
  }

  double min_pivot = 0.0, max_pivot = 0.0;
  auto eliminate = [&](std::size_t slot, double pivot_norm) {
    // Move the chosen column into the next elimination slot.
    const std::size_t r = rank_;
    if (slot != r) {
      for (std::size_t row = 0; row < n_; ++row)
        std::swap(a_[slot * n_ + row], a_[r * n_ + row]);
      std::swap(order_[slot], order_[r]);
    }
    double* c = a_.data() + r * n_;
    const double alpha = c[r] >= 0.0 ? -pivot_norm : pivot_norm;
    rdiag_[r] = alpha;
    c[r] -= alpha;
    double vsq = 0.0;
    for (std::size_t row = r; row < n_; ++row) vsq += c[row] * c[row];
    vsq_[r] = vsq;
    for (std::size_t q = r + 1; q < k_; ++q) {
      double* cq = a_.data() + q * n_;
      double s = 0.0;
      for (std::size_t row = r; row < n_; ++row) s += c[row] * cq[row];
      s *= 2.0 / vsq;
      for (std::size_t row = r; row < n_; ++row) cq[row] -= s * c[row];
    }
    kept_.push_back(order_[r]);
    min_pivot = rank_ == 0 ? pivot_norm : std::min(min_pivot, pivot_norm);
    max_pivot = std::max(max_pivot, pivot_norm);
    ++rank_;
  };

  if (mode == Mode::pivoted) {
    const std::size_t max_rank = std::min(n_, k_);
    while (rank_ < max_rank) {
      std::size_t best = rank_;
      double best_sq = -1.0;
      for (std::size_t slot = rank_; slot < k_; ++slot) {
        const double sq = trailing_sqnorm(slot, rank_);
        if (sq > best_sq) {
          best_sq = sq;
          best = slot;
        }
      }
      const double pivot = std::sqrt(std::max(best_sq, 0.0));
      if (pivot < tol_used_) break;
      eliminate(best, pivot);
    }
    for (std::size_t slot = rank_; slot < k_; ++slot) dropped_.push_back(order_[slot]);
  } else {
    // Examine columns in original order; track where each lives after swaps.
    std::vector<std::size_t> pos(k_);
    for (std::size_t c = 0; c < k_; ++c) pos[c] = c;
    for (std::size_t j = 0; j < k_; ++j) {
      const std::size_t slot = pos[j];
      if (rank_ >= n_) {
        dropped_.push_back(j);
        continue;
      }
      const double pivot = std::sqrt(trailing_sqnorm(slot, rank_));
      if (pivot < tol_used_) {
        dropped_.push_back(j);
        continue;
      }
      const std::size_t r = rank_;
      const std::size_t displaced = order_[r];
      eliminate(slot, pivot);
      if (slot != r) {
        pos[displaced] = slot;
        pos[j] = r;
      }
    }
  }
  std::sort(dropped_.begin(), dropped_.end());
  pivot_first_ = max_pivot;
  pivot_last_ = min_pivot;
}

double HouseholderQr::trailing_sqnorm(std::size_t slot, std::size_t from_row) const {
  const double* c = a_.data() + slot * n_;
  double s = 0.0;
  for (std::size_t row = from_row; row < n_; ++row) s += c[row] * c[row];
  return s;
}

void HouseholderQr::apply_reflector(std::size_t step, std::span<double> y) const {
  const double* v = a_.data() + step * n_;
  double s = 0.0;
  for (std::size_t row = step; row < n_; ++row) s += v[row] * y[row];
  s *= 2.0 / vsq_[step];
  for (std::size_t row = step; row < n_; ++row) y[row] -= s * v[row];
}

DecompositionReport HouseholderQr::report() const {
  DecompositionReport rep;
  rep.kind = FactorKind::qr;
  rep.rank = rank_;
  rep.condition_estimate = rank_ == 0 ? 0.0 : pivot_first_ / pivot_last_;
  rep.tolerance_used = tol_used_;
  rep.dropped_columns = dropped_;
  return rep;
}

std::vector<double> HouseholderQr::solve(std::span<const double> b) const {
  if (b.size() != n_) throw Error("[numerics] qr solve: rhs length mismatch");
  std::vector<double> y(b.begin(), b.end());
  for (std::size_t s = 0; s < rank_; ++s) apply_reflector(s, y);
  std::vector<double> coef(k_, 0.0);
  std::vector<double> x(rank_, 0.0);
  for (std::size_t ii = rank_; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t j = ii + 1; j < rank_; ++j) s -= a_[j * n_ + ii] * x[j];
    x[ii] = s / rdiag_[ii];
  }
  for (std::size_t i = 0; i < rank_; ++i) coef[kept_[i]] = x[i];
  return coef;
}

std::vector<double> HouseholderQr::project(std::span<const double> b) const {
  if (b.size() != n_) throw Error("[numerics] qr project: length mismatch");
  std::vector<double> y(b.begin(), b.end());
  for (std::size_t s = 0; s < rank_; ++s) apply_reflector(s, y);
  for (std::size_t row = rank_; row < n_; ++row) y[row] = 0.0;
  for (std::size_t s = rank_; s-- > 0;) apply_reflector(s, y);
  return y;
}

Matrix HouseholderQr::project(const Matrix& b) const {
  Matrix out(b.rows(), b.cols());
  std::vector<double> col(b.rows());
  for (std::size_t c = 0; c < b.cols(); ++c) {
    for (std::size_t r = 0; r < b.rows(); ++r) col[r] = b(r, c);
    auto p = project(col);
    out.set_column(c, p);
  }
  return out;
}

LeastSquares solve_least_squares(const Matrix& a, std::span<const double> b, double rel_tol) {
  HouseholderQr qr(a, HouseholderQr::Mode::pivoted, rel_tol);
  return {qr.solve(b), qr.report()};
}

std::vector<std::size_t> independent_columns(const Matrix& a, double rel_tol) {
  HouseholderQr qr(a, HouseholderQr::Mode::sequential, rel_tol);
  return qr.kept_columns();
}

CholeskyResult try_cholesky(const Matrix& a) {
  CholeskyResult res;
  const std::size_t k = a.rows();
  if (a.cols() != k) throw Error("[numerics] cholesky: matrix not square");
  res.lower = Matrix(k, k, 0.0);
  double min_pivot = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    double d = a(j, j);
    for (std::size_t p = 0; p < j; ++p) d -= res.lower(j, p) * res.lower(j, p);
    min_pivot = j == 0 ? d : std::min(min_pivot, d);
    if (!(d > 0.0)) {
      res.ok = false;
      res.min_pivot = min_pivot;
      return res;
    }
    const double ljj = std::sqrt(d);
    res.lower(j, j) = ljj;
    for (std::size_t i = j + 1; i < k; ++i) {
      double s = a(i, j);
      for (std::size_t p = 0; p < j; ++p) s -= res.lower(i, p) * res.lower(j, p);
      res.lower(i, j) = s / ljj;
    }
  }
  res.ok = true;
  res.min_pivot = min_pivot;
  return res;
}

Matrix cholesky_lower(const Matrix& a) {
  auto res = try_cholesky(a);
  if (!res.ok)
    throw Error("[numerics] cholesky: matrix not positive definite (pivot " +
                std::to_string(res.min_pivot) + ")");
  return res.lower;
}

std::vector<double> cholesky_solve(const Matrix& lower, std::span<const double> b) {
  const std::size_t k = lower.rows();
  std::vector<double> z(b.begin(), b.end());
  for (std::size_t i = 0; i < k; ++i) {
    double s = z[i];
    for (std::size_t j = 0; j < i; ++j) s -= lower(i, j) * z[j];
    z[i] = s / lower(i, i);
  }
  for (std::size_t ii = k; ii-- > 0;) {
    double s = z[ii];
    for (std::size_t j = ii + 1; j < k; ++j) s -= lower(j, ii) * z[j];
    z[ii] = s / lower(ii, ii);
  }
  return z;
}

PdInverse invert_pd(const Matrix& a) {
  const std::size_t k = a.rows();
  if (a.cols() != k) throw Error("[numerics] invert_pd: matrix not square");
  double asym = 0.0;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) asym = std::max(asym, std::fabs(a(i, j) - a(j, i)));
  if (asym > 1e-6 * (1.0 + a.max_abs()))
    throw Error("[numerics] invert_pd: matrix is not symmetric");
  Matrix sym(k, k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) sym(i, j) = 0.5 * (a(i, j) + a(j, i));

  PdInverse out;
  auto chol = try_cholesky(sym);
  if (!chol.ok) {
    double trace = 0.0;
    for (std::size_t i = 0; i < k; ++i) trace += sym(i, i);
    const double ridge = 1e-10 * trace / static_cast<double>(k);
    Matrix bumped = sym;
    for (std::size_t i = 0; i < k; ++i) bumped(i, i) += ridge;
    auto retry = try_cholesky(bumped);
    if (!retry.ok)
      throw Error("[numerics] invert_pd: not positive definite after ridge " +
                  std::to_string(ridge) + "; smallest pivot " +
                  std::to_string(retry.min_pivot));
    log_info("invert_pd: applied ridge " + std::to_string(ridge) +
             " after Cholesky failure (pivot " + std::to_string(chol.min_pivot) + ")");
    chol = retry;
    out.ridge_applied = true;
    out.ridge_value = ridge;
  }

  out.inverse = Matrix(k, k);
  std::vector<double> e(k, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    e[c] = 1.0;
    auto x = cholesky_solve(chol.lower, e);
    out.inverse.set_column(c, x);
    e[c] = 0.0;
  }
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      const double v = 0.5 * (out.inverse(i, j) + out.inverse(j, i));
      out.inverse(i, j) = v;
      out.inverse(j, i) = v;
    }
  return out;
}

namespace {

// One-sided Jacobi on the columns of a (n >= k assumed by callers needing u).
// Convergence: largest implicit Gram off-diagonal below 1e-12 * ||a||_F^2.
struct JacobiState {
  std::size_t n, k;
  std::vector<double> b;  // column-major
  Matrix v;
  bool accumulate_v;
};

void one_sided_jacobi(JacobiState& st) {
  const std::size_t n = st.n, k = st.k;
  double fro2 = 0.0;
  for (double x : st.b) fro2 += x * x;
  const double thresh = 1e-12 * fro2;
  if (fro2 == 0.0 || k < 2) return;
  const int max_sweeps = 64;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i + 1 < k; ++i) {
      for (std::size_t j = i + 1; j < k; ++j) {
        double* bi = st.b.data() + i * n;
        double* bj = st.b.data() + j * n;
        double c = 0.0;
        for (std::size_t r = 0; r < n; ++r) c += bi[r] * bj[r];
        off = std::max(off, std::fabs(c));
        if (std::fabs(c) <= thresh) continue;
        double di = 0.0, dj = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          di += bi[r] * bi[r];
          dj += bj[r] * bj[r];
        }
        const double tau = (dj - di) / (2.0 * c);
        const double t = tau >= 0.0 ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                    : 1.0 / (tau - std::sqrt(1.0 + tau * tau));
        const double cs = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = t * cs;
        for (std::size_t r = 0; r < n; ++r) {
          const double x = bi[r], y = bj[r];
          bi[r] = cs * x - sn * y;
          bj[r] = sn * x + cs * y;
        }
        if (st.accumulate_v) {
          for (std::size_t r = 0; r < k; ++r) {
            const double x = st.v(r, i), y = st.v(r, j);
            st.v(r, i) = cs * x - sn * y;
            st.v(r, j) = sn * x + cs * y;
          }
        }
      }
    }
    if (off <= thresh) return;
  }
  throw Error("[numerics] jacobi svd failed to converge");
}

}  // namespace

std::vector<double> singular_values(const Matrix& a) {
  const Matrix& m = a;
  const bool wide = m.rows() < m.cols();
  const Matrix work = wide ? m.transposed() : m;
  JacobiState st{work.rows(), work.cols(), {}, {}, false};
  st.b.resize(st.n * st.k);
  for (std::size_t c = 0; c < st.k; ++c)
    for (std::size_t r = 0; r < st.n; ++r) st.b[c * st.n + r] = work(r, c);
  one_sided_jacobi(st);
  std::vector<double> sig(st.k);
  for (std::size_t c = 0; c < st.k; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < st.n; ++r) s += st.b[c * st.n + r] * st.b[c * st.n + r];
    sig[c] = std::sqrt(s);
  }
  std::sort(sig.begin(), sig.end(), std::greater<>());
  return sig;
}

Svd svd_small(const Matrix& a) {
  if (a.rows() < a.cols())
    throw Error("[numerics] svd_small expects rows >= cols; transpose first");
  JacobiState st{a.rows(), a.cols(), {}, Matrix::identity(a.cols()), true};
  st.b.resize(st.n * st.k);
  for (std::size_t c = 0; c < st.k; ++c)
    for (std::size_t r = 0; r < st.n; ++r) st.b[c * st.n + r] = a(r, c);
  one_sided_jacobi(st);

  std::vector<std::size_t> idx(st.k);
  std::vector<double> sig(st.k);
  for (std::size_t c = 0; c < st.k; ++c) {
    idx[c] = c;
    double s = 0.0;
    for (std::size_t r = 0; r < st.n; ++r) s += st.b[c * st.n + r] * st.b[c * st.n + r];
    sig[c] = std::sqrt(s);
  }
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return sig[x] > sig[y]; });

  Svd out;
  out.sigma.resize(st.k);
  out.u = Matrix(st.n, st.k);
  out.v = Matrix(st.k, st.k);
  const double tiny = 1e-300;
  for (std::size_t c = 0; c < st.k; ++c) {
    const std::size_t s = idx[c];
    out.sigma[c] = sig[s];
    if (sig[s] > tiny)
      for (std::size_t r = 0; r < st.n; ++r) out.u(r, c) = st.b[s * st.n + r] / sig[s];
    for (std::size_t r = 0; r < st.k; ++r) out.v(r, c) = st.v(r, s);
  }
  return out;
}

SymmetricEigen symmetric_eigen(const Matrix& a) {
  const std::size_t k = a.rows();
  if (a.cols() != k) throw Error("[numerics] symmetric_eigen: matrix not square");
  Matrix m = a;
  Matrix v = Matrix::identity(k);
  const double thresh = 1e-14 * (1.0 + m.max_abs());
  const int max_sweeps = 64;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p + 1 < k; ++p) {
      for (std::size_t q = p + 1; q < k; ++q) {
        const double apq = m(p, q);
        off = std::max(off, std::fabs(apq));
        if (std::fabs(apq) <= thresh) continue;
        const double tau = (m(q, q) - m(p, p)) / (2.0 * apq);
        const double t = tau >= 0.0 ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                    : 1.0 / (tau - std::sqrt(1.0 + tau * tau));
        const double cs = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = t * cs;
        for (std::size_t r = 0; r < k; ++r) {
          const double x = m(r, p), y = m(r, q);
          m(r, p) = cs * x - sn * y;
          m(r, q) = sn * x + cs * y;
        }
        for (std::size_t c = 0; c < k; ++c) {
          const double x = m(p, c), y = m(q, c);
          m(p, c) = cs * x - sn * y;
          m(q, c) = sn * x + cs * y;
        }
        for (std::size_t r = 0; r < k; ++r) {
          const double x = v(r, p), y = v(r, q);
          v(r, p) = cs * x - sn * y;
          v(r, q) = sn * x + cs * y;
        }
      }
    }
    if (off <= thresh) break;
  }
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return m(x, x) > m(y, y); });
  SymmetricEigen out;
  out.values.resize(k);
  out.vectors = Matrix(k, k);
  for (std::size_t c = 0; c < k; ++c) {
    out.values[c] = m(idx[c], idx[c]);
    for (std::size_t r = 0; r < k; ++r) out.vectors(r, c) = v(r, idx[c]);
  }
  return out;
}

Matrix orthonormal_complement(const Matrix& basis) {
  const std::size_t n = basis.rows(), r = basis.cols();
  if (r > n) throw Error("[numerics] orthonormal_complement: more columns than rows");
  // Orthonormalize the basis (twice-iterated Gram-Schmidt), then sweep unit
  // vectors, keeping the residual directions that survive projection.
  Matrix q(n, r);
  {
    std::vector<std::vector<double>> cols;
    for (std::size_t c = 0; c < r; ++c) cols.push_back(basis.column(c));
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t c = 0; c < r; ++c) {
        for (std::size_t p = 0; p < c; ++p) {
          const double s = dot(cols[c], cols[p]);
          for (std::size_t i = 0; i < n; ++i) cols[c][i] -= s * cols[p][i];
        }
        const double nn = norm2(cols[c]);
        if (nn < 1e-12) throw Error("[numerics] orthonormal_complement: basis is rank deficient");
        for (std::size_t i = 0; i < n; ++i) cols[c][i] /= nn;
      }
    }
    for (std::size_t c = 0; c < r; ++c) q.set_column(c, cols[c]);
  }
  Matrix out(n, n - r);
  std::size_t found = 0;
  std::vector<std::vector<double>> comp;
  for (std::size_t e = 0; e < n && found < n - r; ++e) {
    std::vector<double> w(n, 0.0);
    w[e] = 1.0;
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t c = 0; c < r; ++c) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += w[i] * q(i, c);
        for (std::size_t i = 0; i < n; ++i) w[i] -= s * q(i, c);
      }
      for (const auto& u : comp) {
        const double s = dot(w, u);
        for (std::size_t i = 0; i < n; ++i) w[i] -= s * u[i];
      }
    }
    const double nn = norm2(w);
    if (nn < 1e-8) continue;
    for (double& x : w) x /= nn;
    comp.push_back(std::move(w));
    ++found;
  }
  if (found != n - r) throw Error("[numerics] orthonormal_complement: failed to complete basis");
  for (std::size_t c = 0; c < n - r; ++c) out.set_column(c, comp[c]);
  return out;
}

}  // namespace gvcpanel::num
