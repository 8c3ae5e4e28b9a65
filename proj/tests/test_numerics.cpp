#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "gvcpanel/distributions.hpp"
#include "gvcpanel/error.hpp"
#include "gvcpanel/linalg.hpp"
#include "gvcpanel/matrix.hpp"
#include "gvcpanel/rng.hpp"
#include "support/oracles.hpp"

using namespace gvcpanel;
using namespace gvcpanel::num;

namespace {

Matrix random_matrix(Rng& rng, std::size_t n, std::size_t k) {
  Matrix m(n, k);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j) m(i, j) = rng.normal();
  return m;
}

std::vector<double> random_vector(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("mix_u64 matches the published splitmix64 vector") {
  CHECK(mix_u64(0) == 0xE220A8397B1DCDAFULL);
}

TEST_CASE("rng streams are deterministic and forks are independent") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng c(42);
  Rng f1 = c.fork(1), f2 = c.fork(2);
  CHECK(f1.next_u64() != f2.next_u64());
  Rng g(42);
  CHECK(g.fork(1).next_u64() == Rng(42).fork(1).next_u64());
}

TEST_CASE("rng normal has the right first two moments") {
  Rng rng(7);
  const int n = 100000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
  }
  const double mean = s / n;
  const double var = s2 / n - mean * mean;
  CHECK(std::fabs(mean) < 0.02);
  CHECK(std::fabs(var - 1.0) < 0.03);
}

TEST_CASE("rng uniform_int is in range and covers values") {
  Rng rng(9);
  std::vector<int> seen(7, 0);
  for (int i = 0; i < 5000; ++i) {
    const auto v = rng.uniform_int(7);
    REQUIRE(v < 7);
    ++seen[v];
  }
  for (int c : seen) CHECK(c > 500);
}

TEST_CASE("matrix multiply, gram and cross agree on small cases") {
  const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}, {5, 6}});
  const Matrix b = Matrix::from_rows({{7, 8}, {9, 10}});
  const Matrix c = multiply(a, b);
  CHECK(c(0, 0) == doctest::Approx(25));
  CHECK(c(0, 1) == doctest::Approx(28));
  CHECK(c(2, 0) == doctest::Approx(89));
  CHECK(c(2, 1) == doctest::Approx(100));

  const Matrix g = gram(a);
  CHECK(g(0, 0) == doctest::Approx(35));
  CHECK(g(0, 1) == doctest::Approx(44));
  CHECK(g(1, 0) == doctest::Approx(44));
  CHECK(g(1, 1) == doctest::Approx(56));

  const Matrix x = cross(a, a);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(x(i, j) == doctest::Approx(g(i, j)));
}

TEST_CASE("chi2_sf matches the quadrature oracle at the pinned points") {
  // 0.05-critical values for dof 1 and 10.
  CHECK(std::fabs(chi2_sf(3.841, 1) - oracles::chi2_sf_integral(3.841, 1)) < 5e-4);
  CHECK(std::fabs(chi2_sf(18.31, 10) - oracles::chi2_sf_integral(18.31, 10)) < 5e-4);
  // Both should in fact agree far tighter than the acceptance tolerance.
  CHECK(std::fabs(chi2_sf(3.841, 1) - oracles::chi2_sf_integral(3.841, 1)) < 1e-9);
  CHECK(std::fabs(chi2_sf(18.31, 10) - oracles::chi2_sf_integral(18.31, 10)) < 1e-9);
  CHECK(chi2_sf(3.841, 1) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(chi2_sf(18.31, 10) == doctest::Approx(0.05).epsilon(1e-3));
}

TEST_CASE("chi2_sf agrees with quadrature across a grid") {
  for (std::size_t dof : {1u, 2u, 3u, 5u, 8u, 12u, 20u, 30u}) {
    for (double x : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 25.0, 60.0}) {
      const double mine = chi2_sf(x, dof);
      const double ref = oracles::chi2_sf_integral(x, dof);
      CHECK(std::fabs(mine - ref) < 1e-9);
    }
  }
}

TEST_CASE("chi2_sf basic shape") {
  CHECK(chi2_sf(0.0, 3) == doctest::Approx(1.0));
  CHECK(chi2_sf(-1.0, 3) == doctest::Approx(1.0));
  CHECK(chi2_sf(1e6, 3) < 1e-12);
  double prev = 1.0;
  for (double x = 0.25; x < 30.0; x += 0.25) {
    const double v = chi2_sf(x, 4);
    CHECK(v <= prev);
    CHECK(v >= 0.0);
    prev = v;
  }
  CHECK(chi2_cdf(2.0, 4) + chi2_sf(2.0, 4) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(chi2_sf(1.0, 0), Error);
}

TEST_CASE("normal tail helpers") {
  CHECK(normal_sf(0.0) == doctest::Approx(0.5));
  CHECK(normal_sf(1.959963985) == doctest::Approx(0.025).epsilon(1e-6));
  CHECK(normal_two_sided_p(1.959963985) == doctest::Approx(0.05).epsilon(1e-6));
  CHECK(normal_two_sided_p(-1.959963985) == doctest::Approx(0.05).epsilon(1e-6));
}

TEST_CASE("least squares on the identity returns the rhs") {
  const Matrix a = Matrix::identity(3);
  const std::vector<double> b{1, 2, 3};
  const auto ls = solve_least_squares(a, b);
  CHECK(ls.report.rank == 3);
  CHECK(ls.report.dropped_columns.empty());
  CHECK(max_abs_diff(ls.coefficients, b) < 1e-14);
  CHECK(ls.report.condition_estimate == doctest::Approx(1.0));
}

TEST_CASE("least squares averages replicated design cells") {
  const Matrix a = Matrix::from_rows({{1, 0}, {1, 0}, {0, 1}});
  const std::vector<double> b{1, 3, 2};
  const auto ls = solve_least_squares(a, b);
  REQUIRE(ls.coefficients.size() == 2);
  CHECK(ls.coefficients[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(ls.coefficients[1] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("collinear columns are zeroed and flagged, later duplicate loses") {
  const Matrix a = Matrix::from_rows({{1, 1}, {2, 2}});
  const std::vector<double> b{1, 2};
  const auto ls = solve_least_squares(a, b);
  CHECK(ls.report.rank == 1);
  REQUIRE(ls.report.dropped_columns.size() == 1);
  CHECK(ls.report.dropped_columns[0] == 1);
  CHECK(ls.coefficients[0] == doctest::Approx(1.0));
  CHECK(ls.coefficients[1] == 0.0);
}

TEST_CASE("least squares matches the normal equation oracle on random systems") {
  Rng rng(1234);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 20 + rng.uniform_int(30);
    const std::size_t k = 2 + rng.uniform_int(5);
    const Matrix a = random_matrix(rng, n, k);
    const auto b = random_vector(rng, n);
    const auto mine = solve_least_squares(a, b);
    const auto ref = oracles::normal_equation_ls(a, b);
    CHECK(max_abs_diff(mine.coefficients, ref) < 1e-8);
  }
}

TEST_CASE("least squares residuals are orthogonal to the design") {
  Rng rng(99);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 10 + rng.uniform_int(40);
    const std::size_t k = 1 + rng.uniform_int(6);
    Matrix a = random_matrix(rng, n, k);
    if (rep % 5 == 0 && k >= 2) {
      // plant an exact duplicate to exercise the rank-deficient path
      for (std::size_t i = 0; i < n; ++i) a(i, k - 1) = a(i, 0);
    }
    const auto b = random_vector(rng, n);
    const auto ls = solve_least_squares(a, b);
    const auto fitted = multiply(a, ls.coefficients);
    std::vector<double> resid(n);
    for (std::size_t i = 0; i < n; ++i) resid[i] = b[i] - fitted[i];
    const auto atr = multiply_transposed(a, resid);
    double worst = 0.0;
    for (double v : atr) worst = std::max(worst, std::fabs(v));
    const double scale = a.frobenius_norm() * norm2(b);
    CHECK(worst <= 1e-8 * std::max(1.0, scale));
  }
}

TEST_CASE("projection is idempotent and splits b orthogonally") {
  Rng rng(31);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 15 + rng.uniform_int(20);
    const std::size_t k = 2 + rng.uniform_int(4);
    const Matrix a = random_matrix(rng, n, k);
    const auto b = random_vector(rng, n);
    HouseholderQr qr(a, HouseholderQr::Mode::pivoted);
    const auto p = qr.project(b);
    const auto pp = qr.project(p);
    CHECK(max_abs_diff(p, pp) < 1e-10);
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - p[i];
    const auto atr = multiply_transposed(a, r);
    for (double v : atr) CHECK(std::fabs(v) < 1e-9 * std::max(1.0, a.frobenius_norm() * norm2(b)));
  }
}

TEST_CASE("independent_columns keeps earliest spanning set") {
  Matrix a(3, 3);
  // col2 = col0 + col1
  const double c0[] = {1, 0, 2}, c1[] = {0, 1, 1};
  for (int i = 0; i < 3; ++i) {
    a(i, 0) = c0[i];
    a(i, 1) = c1[i];
    a(i, 2) = c0[i] + c1[i];
  }
  const auto kept = independent_columns(a);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0] == 0);
  CHECK(kept[1] == 1);

  const Matrix dup = Matrix::from_rows({{1, 1}, {2, 2}, {3, 3}});
  const auto kept2 = independent_columns(dup);
  REQUIRE(kept2.size() == 1);
  CHECK(kept2[0] == 0);
}

TEST_CASE("invert_pd reproduces the hand inverse") {
  const Matrix a = Matrix::from_rows({{4, 2}, {2, 3}});
  const auto inv = invert_pd(a);
  CHECK_FALSE(inv.ridge_applied);
  CHECK(inv.inverse(0, 0) == doctest::Approx(0.375).epsilon(1e-12));
  CHECK(inv.inverse(0, 1) == doctest::Approx(-0.25).epsilon(1e-12));
  CHECK(inv.inverse(1, 0) == doctest::Approx(-0.25).epsilon(1e-12));
  CHECK(inv.inverse(1, 1) == doctest::Approx(0.5).epsilon(1e-12));

  const Matrix d = Matrix::from_rows({{2, 0}, {0, 4}});
  const auto dinv = invert_pd(d);
  CHECK(dinv.inverse(0, 0) == doctest::Approx(0.5));
  CHECK(dinv.inverse(1, 1) == doctest::Approx(0.25));
}

TEST_CASE("invert_pd agrees with the Gauss-Jordan oracle on random spd matrices") {
  Rng rng(555);
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t k = 2 + rng.uniform_int(6);
    const Matrix m = random_matrix(rng, k + 4, k);
    Matrix spd = gram(m);
    for (std::size_t i = 0; i < k; ++i) spd(i, i) += 0.5;
    const auto mine = invert_pd(spd);
    const auto ref = oracles::gauss_jordan_inverse(spd);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j)
        CHECK(mine.inverse(i, j) == doctest::Approx(ref(i, j)).epsilon(1e-8));
  }
}

TEST_CASE("invert_pd ridge path recovers a semidefinite matrix") {
  const Matrix a = Matrix::from_rows({{1, 1}, {1, 1}});
  const auto inv = invert_pd(a);
  CHECK(inv.ridge_applied);
  CHECK(inv.ridge_value == doctest::Approx(1e-10).epsilon(1e-6));
  CHECK(std::isfinite(inv.inverse(0, 0)));
}

TEST_CASE("invert_pd hard-fails on an indefinite matrix, naming the pivot") {
  const Matrix a = Matrix::from_rows({{1, 0}, {0, -1}});
  try {
    invert_pd(a);
    FAIL("expected a throw");
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("pivot") != std::string::npos);
  }
}

TEST_CASE("invert_pd rejects asymmetric input") {
  const Matrix a = Matrix::from_rows({{1, 2}, {0, 1}});
  CHECK_THROWS_AS(invert_pd(a), Error);
}

TEST_CASE("cholesky round trip") {
  const Matrix a = Matrix::from_rows({{4, 2, 0}, {2, 5, 1}, {0, 1, 3}});
  const Matrix l = cholesky_lower(a);
  const Matrix rec = multiply(l, l.transposed());
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(rec(i, j) == doctest::Approx(a(i, j)).epsilon(1e-12));
  const std::vector<double> b{1, 2, 3};
  const auto x = cholesky_solve(l, b);
  const auto back = multiply(a, x);
  CHECK(max_abs_diff(back, b) < 1e-10);
}

TEST_CASE("singular values of pinned matrices") {
  const auto s1 = singular_values(Matrix::from_rows({{0, 1}, {1, 0}}));
  CHECK(s1[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s1[1] == doctest::Approx(1.0).epsilon(1e-12));
  const auto s2 = singular_values(Matrix::from_rows({{4, 0}, {0, 3}}));
  CHECK(s2[0] == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(s2[1] == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("singular values match the 2x2 characteristic polynomial oracle") {
  Rng rng(77);
  for (int rep = 0; rep < 200; ++rep) {
    const double a = rng.normal(), b = rng.normal(), c = rng.normal(), d = rng.normal();
    const auto ref = oracles::svd2x2_values(a, b, c, d);
    const auto mine = singular_values(Matrix::from_rows({{a, b}, {c, d}}));
    CHECK(mine[0] == doctest::Approx(ref.first).epsilon(1e-9));
    CHECK(mine[1] == doctest::Approx(ref.second).epsilon(1e-9));
  }
}

TEST_CASE("svd_small reconstructs and is orthogonal") {
  Rng rng(11);
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t n = 3 + rng.uniform_int(10);
    const std::size_t k = 1 + rng.uniform_int(std::min<std::size_t>(n, 5));
    const Matrix a = random_matrix(rng, n, k);
    const auto s = svd_small(a);
    // descending
    for (std::size_t i = 1; i < k; ++i) CHECK(s.sigma[i] <= s.sigma[i - 1] + 1e-14);
    // orthogonality
    const Matrix utu = gram(s.u);
    const Matrix vtv = gram(s.v);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) {
        CHECK(std::fabs(utu(i, j) - (i == j ? 1.0 : 0.0)) < 1e-10);
        CHECK(std::fabs(vtv(i, j) - (i == j ? 1.0 : 0.0)) < 1e-10);
      }
    // reconstruction
    Matrix us = s.u;
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < k; ++c) us(r, c) *= s.sigma[c];
    const Matrix rec = multiply(us, s.v.transposed());
    double err = 0.0;
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < k; ++c) err = std::max(err, std::fabs(rec(r, c) - a(r, c)));
    CHECK(err < 1e-10 * std::max(1.0, a.max_abs()));
  }
}

TEST_CASE("singular value invariants: frobenius mass and transpose") {
  Rng rng(13);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t n = 2 + rng.uniform_int(8);
    const std::size_t k = 2 + rng.uniform_int(8);
    const Matrix a = random_matrix(rng, n, k);
    const auto s = singular_values(a);
    double mass = 0.0;
    for (double v : s) mass += v * v;
    CHECK(mass == doctest::Approx(a.frobenius_norm() * a.frobenius_norm()).epsilon(1e-10));
    const auto st = singular_values(a.transposed());
    REQUIRE(st.size() == s.size());
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(st[i] == doctest::Approx(s[i]).epsilon(1e-10));
  }
}

TEST_CASE("symmetric_eigen on a pinned 2x2 and reconstruction") {
  const auto e = symmetric_eigen(Matrix::from_rows({{2, 1}, {1, 2}}));
  CHECK(e.values[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(e.values[1] == doctest::Approx(1.0).epsilon(1e-12));

  Rng rng(17);
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t k = 2 + rng.uniform_int(7);
    const Matrix m = random_matrix(rng, k + 2, k);
    const Matrix s = gram(m);
    const auto eig = symmetric_eigen(s);
    // V diag(vals) V^T == s
    Matrix vd = eig.vectors;
    for (std::size_t r = 0; r < k; ++r)
      for (std::size_t c = 0; c < k; ++c) vd(r, c) *= eig.values[c];
    const Matrix rec = multiply(vd, eig.vectors.transposed());
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j)
        CHECK(std::fabs(rec(i, j) - s(i, j)) < 1e-9 * std::max(1.0, s.max_abs()));
  }
}

TEST_CASE("orthonormal_complement satisfies the complement identities") {
  Rng rng(23);
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t n = 3 + rng.uniform_int(8);
    const std::size_t r = 1 + rng.uniform_int(n - 1);
    const Matrix a = random_matrix(rng, n, r);
    const auto s = svd_small(a);  // u columns orthonormal
    Matrix basis(n, r);
    for (std::size_t c = 0; c < r; ++c) basis.set_column(c, s.u.column(c));
    const Matrix comp = orthonormal_complement(basis);
    REQUIRE(comp.cols() == n - r);
    const Matrix ctc = gram(comp);
    for (std::size_t i = 0; i < n - r; ++i)
      for (std::size_t j = 0; j < n - r; ++j)
        CHECK(std::fabs(ctc(i, j) - (i == j ? 1.0 : 0.0)) < 1e-12);
    const Matrix bc = cross(basis, comp);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < n - r; ++j) CHECK(std::fabs(bc(i, j)) < 1e-12);
  }
}

TEST_CASE("qr handles the zero matrix") {
  const Matrix z(4, 3, 0.0);
  const auto ls = solve_least_squares(z, std::vector<double>{1, 2, 3, 4});
  CHECK(ls.report.rank == 0);
  CHECK(ls.report.dropped_columns.size() == 3);
  for (double c : ls.coefficients) CHECK(c == 0.0);
}
