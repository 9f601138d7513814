#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/lda.hpp"
#include "core/linalg.hpp"
#include "test_util.hpp"

using namespace coper;
using testutil::random_matrix;

TEST_CASE("scatter matrices trivial cases") {
  Rng rng(1);
  SUBCASE("single class has zero between-class scatter") {
    Matrix x = center_rows(random_matrix(3, 20, rng));
    ScatterPair sp = scatter_matrices(x, std::vector<int>(20, 0), 1);
    CHECK(frobenius_norm(sp.between) < 1e-12);
  }
  SUBCASE("one sample per class has zero within-class scatter") {
    Matrix x = center_rows(random_matrix(3, 5, rng));
    std::vector<int> labels{0, 1, 2, 3, 4};
    ScatterPair sp = scatter_matrices(x, labels, 5);
    CHECK(frobenius_norm(sp.within) < 1e-12);
  }
  SUBCASE("empty class rejected") {
    Matrix x = center_rows(random_matrix(2, 4, rng));
    CHECK_THROWS_AS(scatter_matrices(x, {0, 0, 2, 2}, 3), Error);
  }
}

TEST_CASE("additivity: within + between equals the total 1/N covariance") {
  Rng rng(2);
  for (int rep = 0; rep < 100; ++rep) {
    std::size_t n = 30;
    Matrix x = random_matrix(4, n, rng);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i)
      labels[i] = static_cast<int>(rng.below(3));
    labels[0] = 0; labels[1] = 1; labels[2] = 2;
    ScatterPair sp = scatter_matrices(x, labels, 3);
    Matrix xc = center_rows(x);
    Matrix total = covariance(xc, xc, CovDivisor::N);
    CHECK(testutil::max_abs_diff(sp.within + sp.between, total) < 1e-10);
  }
}

TEST_CASE("fit_lda") {
  Rng rng(3);
  SUBCASE("two classes split along axis 0") {
    std::size_t n = 5000;
    Matrix x(3, n);
    std::vector<int> labels(n);
    for (std::size_t j = 0; j < n; ++j) {
      labels[j] = static_cast<int>(rng.below(2));
      double mean = labels[j] == 0 ? -2.0 : 2.0;
      x(0, j) = mean + rng.normal();
      x(1, j) = rng.normal();
      x(2, j) = rng.normal();
    }
    LdaModel m = fit_lda(x, labels, 2, 0.0);
    double cos = std::fabs(m.eigvecs(0, 0));
    CHECK(cos >= 0.99);
    CHECK(m.eigvals[1] <= 1e-6);  // rank of C_a is K-1 = 1
  }
  SUBCASE("eigenvalues beyond K-1 vanish") {
    Matrix x = random_matrix(5, 60, rng);
    std::vector<int> labels(60);
    for (std::size_t i = 0; i < 60; ++i) labels[i] = static_cast<int>(rng.below(3));
    labels[0] = 0; labels[1] = 1; labels[2] = 2;
    LdaModel m = fit_lda(x, labels, 3, 0.0);
    for (std::size_t i = 2; i < m.eigvals.size(); ++i) CHECK(m.eigvals[i] <= 1e-8);
  }
  SUBCASE("generalized eigenpair equation holds") {
    Matrix x = random_matrix(4, 50, rng);
    std::vector<int> labels(50);
    for (std::size_t i = 0; i < 50; ++i) labels[i] = static_cast<int>(rng.below(3));
    labels[0] = 0; labels[1] = 1; labels[2] = 2;
    double ridge = 1e-6;
    LdaModel m = fit_lda(x, labels, 3, ridge);
    Matrix ce = m.within_scatter;
    add_diagonal(ce, ridge);
    for (std::size_t i = 0; i < 2; ++i) {
      std::vector<double> h(4), lhs(4, 0.0), rhs(4, 0.0);
      for (std::size_t r = 0; r < 4; ++r) h[r] = m.eigvecs(r, i);
      for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c) {
          lhs[r] += m.between_scatter(r, c) * h[c];
          rhs[r] += ce(r, c) * h[c] * m.eigvals[i];
        }
      for (std::size_t r = 0; r < 4; ++r)
        CHECK(lhs[r] == doctest::Approx(rhs[r]).epsilon(1e-6));
    }
  }
  SUBCASE("2x2 closed-form instance") {
    // D=2, K=2, N=8 hand instance; within/between scatters are concrete and
    // the top eigenpair solves (Ce^-1 Ca) h = lambda h directly
    Matrix x(2, 8);
    x.data = {1.0, 2.0, 1.5, 2.5, 5.0, 6.0, 5.5, 6.5,
              0.5, 1.0, 1.5, 0.0, 1.0, 0.5, 0.0, 1.5};
    std::vector<int> labels{0, 0, 0, 0, 1, 1, 1, 1};
    LdaModel m = fit_lda(x, labels, 2, 0.0);

    ScatterPair sp = scatter_matrices(x, labels, 2);
    // direct 2x2 eigensolve of Ce^{-1} Ca via the quadratic formula
    Matrix a = matmul(sym_inverse(sp.within, 0.0), sp.between);
    double tr = a(0, 0) + a(1, 1);
    double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
    double lam_top = 0.5 * (tr + disc);
    CHECK(m.eigvals[0] == doctest::Approx(lam_top).epsilon(1e-8));
    // eigenvector direction from (A - lam I) h = 0, using the better
    // conditioned of the two rows
    double hx = a(0, 1), hy = lam_top - a(0, 0);
    if (std::hypot(hx, hy) < 1e-12) {
      hx = lam_top - a(1, 1);
      hy = a(1, 0);
    }
    double nrm = std::hypot(hx, hy);
    hx /= nrm; hy /= nrm;
    double cos = std::fabs(hx * m.eigvecs(0, 0) + hy * m.eigvecs(1, 0));
    CHECK(cos == doctest::Approx(1.0).epsilon(1e-8));
  }
  SUBCASE("Rayleigh quotient at the top eigenvector equals the top eigenvalue") {
    Matrix x = random_matrix(3, 40, rng);
    std::vector<int> labels(40);
    for (std::size_t i = 0; i < 40; ++i) labels[i] = static_cast<int>(rng.below(2));
    labels[0] = 0; labels[1] = 1;
    LdaModel m = fit_lda(x, labels, 2, 0.0);
    double num = 0.0, den = 0.0;
    for (std::size_t r = 0; r < 3; ++r)
      for (std::size_t c = 0; c < 3; ++c) {
        num += m.eigvecs(r, 0) * m.between_scatter(r, c) * m.eigvecs(c, 0);
        den += m.eigvecs(r, 0) * m.within_scatter(r, c) * m.eigvecs(c, 0);
      }
    CHECK(num / den == doctest::Approx(m.eigvals[0]).epsilon(1e-8));
  }
  SUBCASE("eigenvalues invariant under invertible linear transforms") {
    Matrix x = random_matrix(3, 60, rng);
    std::vector<int> labels(60);
    for (std::size_t i = 0; i < 60; ++i) labels[i] = static_cast<int>(rng.below(3));
    labels[0] = 0; labels[1] = 1; labels[2] = 2;
    LdaModel base = fit_lda(x, labels, 3, 0.0);
    Matrix t(3, 3);
    t.data = {1.5, 0.2, -0.1, 0.0, 0.8, 0.3, 0.2, 0.0, 1.1};
    LdaModel mapped = fit_lda(matmul(t, x), labels, 3, 0.0);
    for (std::size_t i = 0; i < 3; ++i)
      CHECK(mapped.eigvals[i] == doctest::Approx(base.eigvals[i]).epsilon(1e-6));
  }
  SUBCASE("singular within-class scatter with zero ridge is rejected") {
    Matrix x(2, 6);
    x.data = {1, 1, 2, 2, 3, 3,   // feature 0
              2, 2, 4, 4, 6, 6};  // feature 1 = 2 * feature 0 within classes
    std::vector<int> labels{0, 0, 1, 1, 2, 2};
    try {
      fit_lda(x, labels, 3, 0.0);
      FAIL("expected SingularScatter");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::SingularScatter);
    }
    CHECK_NOTHROW(fit_lda(x, labels, 3, 1e-4));
  }
}
