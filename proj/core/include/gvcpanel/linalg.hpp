#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gvcpanel/matrix.hpp"

namespace gvcpanel::num {

// Relative pivot threshold for rank decisions in QR.
inline constexpr double kRankTolerance = 1e-10;

enum class FactorKind { qr, cholesky, svd };

struct DecompositionReport {
  FactorKind kind = FactorKind::qr;
  std::size_t rank = 0;
  double condition_estimate = 1.0;
  double tolerance_used = 0.0;
  std::vector<std::size_t> dropped_columns;  // original indices, ascending
};

// Householder QR with optional column pivoting and rank detection.
// pivoted: greedy max-norm pivoting; columns beyond detected rank dropped.
// sequential: columns examined in original order; a column whose residual
// norm falls under tolerance is dropped and later columns keep going. This
// is what design assembly uses so that "later duplicates lose".
class HouseholderQr {
 public:
  enum class Mode { pivoted, sequential };

  HouseholderQr(const Matrix& a, Mode mode, double rel_tol = kRankTolerance);

  std::size_t rank() const { return rank_; }
  const std::vector<std::size_t>& kept_columns() const { return kept_; }
  DecompositionReport report() const;

  // Minimum-norm-ish least squares: dropped columns get coefficient 0.
  std::vector<double> solve(std::span<const double> b) const;
  // Orthogonal projection of b onto the span of the kept columns.
  std::vector<double> project(std::span<const double> b) const;
  Matrix project(const Matrix& b) const;

 private:
  void apply_reflector(std::size_t step, std::span<double> y) const;
  double trailing_sqnorm(std::size_t slot, std::size_t from_row) const;

  std::size_t n_ = 0, k_ = 0;
  double rel_tol_ = kRankTolerance;
  double tol_used_ = 0.0;
  std::size_t rank_ = 0;
  double pivot_first_ = 0.0, pivot_last_ = 0.0;
  std::vector<double> a_;          // column-major workspace
  std::vector<double> rdiag_;      // R diagonal per elimination step
  std::vector<double> vsq_;        // squared norm of each reflector
  std::vector<std::size_t> order_; // order_[slot] = original column index
  std::vector<std::size_t> kept_;  // original indices in elimination order
  std::vector<std::size_t> dropped_;
};

struct LeastSquares {
  std::vector<double> coefficients;
  DecompositionReport report;
};

// min ||a x - b||_2 via pivoted Householder QR; collinear columns are
// zeroed out and flagged in the report.
LeastSquares solve_least_squares(const Matrix& a, std::span<const double> b,
                                 double rel_tol = kRankTolerance);

// Indices (original order) of a maximal left-to-right independent column set.
std::vector<std::size_t> independent_columns(const Matrix& a,
                                             double rel_tol = kRankTolerance);

struct CholeskyResult {
  bool ok = false;
  Matrix lower;
  double min_pivot = 0.0;  // smallest diagonal pivot encountered
};

CholeskyResult try_cholesky(const Matrix& a);
// Throws gvcpanel::Error when a is not positive definite.
Matrix cholesky_lower(const Matrix& a);

struct PdInverse {
  Matrix inverse;
  bool ridge_applied = false;
  double ridge_value = 0.0;
};

// Inverse of a symmetric positive definite matrix via Cholesky. On failure
// retries once with ridge 1e-10 * trace(a)/k on the diagonal (logged); a
// second failure throws, naming the smallest pivot.
PdInverse invert_pd(const Matrix& a);

// Solve L L^T x = b given lower Cholesky factor.
std::vector<double> cholesky_solve(const Matrix& lower, std::span<const double> b);

struct Svd {
  Matrix u;                   // n x k (columns for zero singular values are zero)
  std::vector<double> sigma;  // descending
  Matrix v;                   // k x k
};

// One-sided Jacobi, meant for small matrices (k up to a few dozen).
std::vector<double> singular_values(const Matrix& a);
Svd svd_small(const Matrix& a);

struct SymmetricEigen {
  std::vector<double> values;  // descending
  Matrix vectors;              // columns are eigenvectors
};

// Cyclic Jacobi for small symmetric matrices.
SymmetricEigen symmetric_eigen(const Matrix& a);

// Extend the orthonormal columns of basis (n x r) to a full n x n orthogonal
// matrix; returns the n x (n-r) complement block.
Matrix orthonormal_complement(const Matrix& basis);

}  // namespace gvcpanel::num
