#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/kmeans.hpp"
#include "core/rng.hpp"
#include "test_util.hpp"

using namespace coper;

TEST_CASE("K == N gives zero inertia") {
  Rng rng(1);
  Matrix x = testutil::random_matrix(5, 3, rng);
  KMeansResult r = kmeans(x, 5, 4, 100, 1e-9, 0);
  CHECK(r.inertia == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("two far-separated pairs") {
  Matrix x(4, 1);
  x.data = {0.0, 1.0, 100.0, 101.0};
  KMeansResult r = kmeans(x, 2, 4, 100, 1e-9, 3);
  CHECK(r.assignment[0] == r.assignment[1]);
  CHECK(r.assignment[2] == r.assignment[3]);
  CHECK(r.assignment[0] != r.assignment[2]);
  // centers at pair midpoints, inertia = within-pair spread 2 * (0.5^2 + 0.5^2)
  CHECK(r.inertia == doctest::Approx(1.0));
}

namespace {

// exact k=2 optimum by scanning all 2^n assignments with closed-form centroids
double brute_force_inertia(const Matrix& x) {
  std::size_t n = x.rows;
  double best = 1e300;
  for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
    double inertia = 0.0;
    for (int side = 0; side < 2; ++side) {
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < n; ++i)
        if (((mask >> i) & 1u) == static_cast<unsigned>(side)) members.push_back(i);
      if (members.empty()) { inertia = 1e300; break; }
      std::vector<double> c(x.cols, 0.0);
      for (std::size_t i : members)
        for (std::size_t d = 0; d < x.cols; ++d) c[d] += x(i, d);
      for (double& v : c) v /= static_cast<double>(members.size());
      for (std::size_t i : members)
        for (std::size_t d = 0; d < x.cols; ++d) {
          double diff = x(i, d) - c[d];
          inertia += diff * diff;
        }
    }
    best = std::min(best, inertia);
  }
  return best;
}

}  // namespace

TEST_CASE("matches the exhaustive 2-cluster optimum on most seeds") {
  Rng rng(7);
  int hits = 0;
  for (int seed = 0; seed < 10; ++seed) {
    Matrix x = testutil::random_matrix(7, 2, rng);
    KMeansResult r = kmeans(x, 2, 20, 300, 1e-9, static_cast<std::uint64_t>(seed));
    double opt = brute_force_inertia(x);
    CHECK(r.inertia >= opt - 1e-9);
    if (r.inertia <= opt + 1e-9) ++hits;
  }
  CHECK(hits >= 9);
}

TEST_CASE("inertia is non-increasing across Lloyd iterations") {
  Rng rng(8);
  Matrix x = testutil::random_matrix(60, 3, rng);
  std::vector<double> trace;
  kmeans(x, 4, 1, 300, 0.0, 5, &trace);
  REQUIRE(trace.size() >= 2);
  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] + 1e-9);
}

TEST_CASE("termination is a fixed point") {
  Rng rng(9);
  Matrix x = testutil::random_matrix(50, 2, rng);
  KMeansResult r = kmeans(x, 3, 5, 300, 1e-12, 11);
  // one extra assignment pass against the final centers changes nothing
  for (std::size_t i = 0; i < x.rows; ++i) {
    int best = 0;
    double best_d = 1e300;
    for (int c = 0; c < 3; ++c) {
      double d = 0.0;
      for (std::size_t k = 0; k < x.cols; ++k) {
        double diff = x(i, k) - r.centers(static_cast<std::size_t>(c), k);
        d += diff * diff;
      }
      if (d < best_d) { best_d = d; best = c; }
    }
    CHECK(best == r.assignment[i]);
  }
}

TEST_CASE("no empty clusters in the result") {
  // two tight groups plus one outlier force empty-cluster repair paths
  Matrix x(7, 1);
  x.data = {0.0, 0.01, 0.02, 10.0, 10.01, 10.02, 50.0};
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    KMeansResult r = kmeans(x, 3, 3, 100, 1e-9, seed);
    std::vector<int> counts(3, 0);
    for (int a : r.assignment) ++counts[static_cast<std::size_t>(a)];
    for (int c : counts) CHECK(c > 0);
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(kmeans(Matrix(2, 2, 0.0), 3, 1, 10, 1e-6, 0), Error);
}
