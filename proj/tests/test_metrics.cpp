#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/metrics.hpp"
#include "core/rng.hpp"
#include "test_util.hpp"

using namespace coper;

namespace {

std::vector<int> random_labels(std::size_t n, int k, Rng& rng) {
  std::vector<int> out(n);
  for (auto& v : out) v = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
  return out;
}

// every label 0..k-1 appears at least once
std::vector<int> random_full_labels(std::size_t n, int k, Rng& rng) {
  std::vector<int> out = random_labels(n, k, rng);
  for (int c = 0; c < k; ++c) out[static_cast<std::size_t>(c)] = c;
  return out;
}

double brute_force_accuracy(const std::vector<int>& pred, const std::vector<int>& truth,
                            int k) {
  std::vector<int> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), 0);
  double best = 0.0;
  do {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
      if (perm[static_cast<std::size_t>(pred[i])] == truth[i]) ++hits;
    best = std::max(best, static_cast<double>(hits) / static_cast<double>(pred.size()));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// direct pair-counting ARI over all sample pairs
double pair_counting_ari(const std::vector<int>& pred, const std::vector<int>& truth) {
  std::size_t n = pred.size();
  double both = 0, pred_only = 0, truth_only = 0, neither = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      bool same_p = pred[i] == pred[j];
      bool same_t = truth[i] == truth[j];
      if (same_p && same_t) ++both;
      else if (same_p) ++pred_only;
      else if (same_t) ++truth_only;
      else ++neither;
    }
  double total = both + pred_only + truth_only + neither;
  double expected = (both + pred_only) * (both + truth_only) / total;
  double maximum = 0.5 * ((both + pred_only) + (both + truth_only));
  if (std::fabs(maximum - expected) < 1e-12) return 1.0;
  return (both - expected) / (maximum - expected);
}

double entropy_formula_nmi(const std::vector<int>& pred, const std::vector<int>& truth) {
  int kp = *std::max_element(pred.begin(), pred.end()) + 1;
  int kt = *std::max_element(truth.begin(), truth.end()) + 1;
  double n = static_cast<double>(pred.size());
  std::vector<std::vector<double>> t(static_cast<std::size_t>(kp),
                                     std::vector<double>(static_cast<std::size_t>(kt), 0));
  for (std::size_t i = 0; i < pred.size(); ++i)
    t[static_cast<std::size_t>(pred[i])][static_cast<std::size_t>(truth[i])] += 1.0;
  auto h = [&](const std::vector<double>& counts) {
    double e = 0.0;
    for (double c : counts)
      if (c > 0) e -= c / n * std::log(c / n);
    return e;
  };
  std::vector<double> a(static_cast<std::size_t>(kp), 0), b(static_cast<std::size_t>(kt), 0);
  double mi = 0.0;
  for (int i = 0; i < kp; ++i)
    for (int j = 0; j < kt; ++j) {
      a[static_cast<std::size_t>(i)] += t[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      b[static_cast<std::size_t>(j)] += t[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  for (int i = 0; i < kp; ++i)
    for (int j = 0; j < kt; ++j) {
      double c = t[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      if (c > 0)
        mi += c / n *
              std::log(c / n / (a[static_cast<std::size_t>(i)] / n * b[static_cast<std::size_t>(j)] / n));
    }
  return mi / std::sqrt(h(a) * h(b));
}

std::vector<int> relabel(const std::vector<int>& labels, const std::vector<int>& perm) {
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    out[i] = perm[static_cast<std::size_t>(labels[i])];
  return out;
}

}  // namespace

TEST_CASE("accuracy") {
  std::vector<int> truth{0, 0, 1, 1, 2, 2};
  CHECK(accuracy(truth, truth) == doctest::Approx(1.0));

  std::vector<int> swapped{1, 1, 0, 0, 2, 2};
  CHECK(accuracy(swapped, truth) == doctest::Approx(1.0));

  Rng rng(20);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<int> pred = random_full_labels(8, 3, rng);
    std::vector<int> t = random_full_labels(8, 3, rng);
    CHECK(accuracy(pred, t) == doctest::Approx(brute_force_accuracy(pred, t, 3)));
  }

  // padded confusion matrix when label counts differ
  std::vector<int> pred_small{0, 0, 0, 0};
  std::vector<int> truth_wide{0, 1, 2, 3};
  CHECK(accuracy(pred_small, truth_wide) == doctest::Approx(0.25));

  CHECK_THROWS_AS(accuracy({0, 1}, {0, 1, 2}), Error);
}

TEST_CASE("adjusted rand index") {
  std::vector<int> truth{0, 1, 2, 0, 1, 2};
  CHECK(adjusted_rand_index(truth, truth) == doctest::Approx(1.0));

  // all-singleton vs all-one-cluster on N=4
  std::vector<int> singletons{0, 1, 2, 3};
  std::vector<int> lump{0, 0, 0, 0};
  CHECK(adjusted_rand_index(singletons, lump) == doctest::Approx(0.0));

  Rng rng(21);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<int> pred = random_labels(10, 3, rng);
    std::vector<int> t = random_labels(10, 3, rng);
    CHECK(adjusted_rand_index(pred, t) ==
          doctest::Approx(pair_counting_ari(pred, t)).epsilon(1e-12));
  }

  // self-ARI is 1 for every non-degenerate partition
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<int> p = random_full_labels(12, 4, rng);
    CHECK(adjusted_rand_index(p, p) == doctest::Approx(1.0));
  }
}

TEST_CASE("normalized mutual information") {
  std::vector<int> truth{0, 0, 1, 1, 2, 2};
  CHECK(normalized_mutual_information(truth, truth) == doctest::Approx(1.0));

  Rng rng(22);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<int> pred = random_full_labels(10, 3, rng);
    std::vector<int> t = random_full_labels(10, 3, rng);
    CHECK(normalized_mutual_information(pred, t) ==
          doctest::Approx(entropy_formula_nmi(pred, t)).epsilon(1e-10));
  }

  SUBCASE("independent balanced partitions approach zero") {
    Rng mc(23);
    std::vector<int> a = random_labels(10000, 4, mc);
    std::vector<int> b = random_labels(10000, 4, mc);
    CHECK(normalized_mutual_information(a, b) <= 0.05);
  }

  SUBCASE("zero-entropy edge cases") {
    std::vector<int> flat{0, 0, 0};
    std::vector<int> other{0, 1, 0};
    CHECK(normalized_mutual_information(flat, flat) == doctest::Approx(1.0));
    CHECK(normalized_mutual_information(flat, other) == doctest::Approx(0.0));
  }
}

TEST_CASE("balanced predictions score at least 1/K under optimal matching") {
  Rng rng(27);
  for (int rep = 0; rep < 50; ++rep) {
    int k = 2 + rep % 5;  // K up to 6
    std::size_t per = 4;
    std::size_t n = per * static_cast<std::size_t>(k);
    std::vector<int> pred(n);
    for (std::size_t i = 0; i < n; ++i) pred[i] = static_cast<int>(i % static_cast<std::size_t>(k));
    std::vector<int> truth = random_full_labels(n, k, rng);
    double acc = accuracy(pred, truth);
    CHECK(acc >= 1.0 / static_cast<double>(k) - 1e-12);
    CHECK(acc == doctest::Approx(brute_force_accuracy(pred, truth, k)));
  }
}

TEST_CASE("all metrics are exactly relabeling-invariant") {
  Rng rng(24);
  std::vector<int> perm{2, 0, 3, 1};
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<int> pred = random_full_labels(30, 4, rng);
    std::vector<int> truth = random_full_labels(30, 4, rng);
    std::vector<int> pred2 = relabel(pred, perm);
    CHECK(accuracy(pred2, truth) == accuracy(pred, truth));
    CHECK(adjusted_rand_index(pred2, truth) == adjusted_rand_index(pred, truth));
    CHECK(normalized_mutual_information(pred2, truth) ==
          normalized_mutual_information(pred, truth));
  }

  // silhouette too, on a small embedding
  Matrix x(2, 12);
  for (std::size_t j = 0; j < 12; ++j) {
    x(0, j) = rng.normal();
    x(1, j) = rng.normal();
  }
  std::vector<int> labels = random_full_labels(12, 4, rng);
  std::vector<int> labels2 = relabel(labels, perm);
  CHECK(silhouette(x, labels2) == silhouette(x, labels));
}

TEST_CASE("silhouette") {
  SUBCASE("two tight far clusters score > 0.9") {
    Rng rng(25);
    Matrix x(2, 20);
    std::vector<int> labels(20);
    for (std::size_t j = 0; j < 20; ++j) {
      bool second = j >= 10;
      labels[j] = second ? 1 : 0;
      x(0, j) = (second ? 100.0 : 0.0) + 0.1 * rng.normal();
      x(1, j) = 0.1 * rng.normal();
    }
    double s = silhouette(x, labels);
    CHECK(s > 0.9);
    // direct pairwise oracle
    double oracle = 0.0;
    for (std::size_t i = 0; i < 20; ++i) {
      double a = 0.0, b = 0.0;
      std::size_t na = 0, nb = 0;
      for (std::size_t j = 0; j < 20; ++j) {
        if (j == i) continue;
        double d = std::hypot(x(0, i) - x(0, j), x(1, i) - x(1, j));
        if (labels[i] == labels[j]) { a += d; ++na; }
        else { b += d; ++nb; }
      }
      a /= static_cast<double>(na);
      b /= static_cast<double>(nb);
      oracle += (b - a) / std::max(a, b);
    }
    CHECK(s == doctest::Approx(oracle / 20.0).epsilon(1e-12));
  }
  SUBCASE("random labels on unstructured data stay near zero") {
    Rng rng(26);
    double total = 0.0;
    int seeds = 5;
    for (int s = 0; s < seeds; ++s) {
      Matrix x(3, 500);
      for (auto& v : x.data) v = rng.normal();
      std::vector<int> labels = random_full_labels(500, 3, rng);
      total += silhouette(x, labels);
    }
    CHECK(std::fabs(total / seeds) <= 0.2);
  }
  SUBCASE("a == b contributes zero, singletons contribute zero") {
    // points 0,1,2 with labels {0,1,1}: sample 0 is a singleton (0); sample 1
    // has a = |1-2| = 1 and b = |1-0| = 1, so (b-a)/max = 0; sample 2 has
    // a = 1, b = 2, contributing 0.5
    Matrix x(1, 3);
    x.data = {0.0, 1.0, 2.0};
    std::vector<int> labels{0, 1, 1};
    CHECK(silhouette(x, labels) == doctest::Approx(0.5 / 3.0).epsilon(1e-15));
  }
  SUBCASE("errors") {
    Matrix x(2, 4, 1.0);
    CHECK_THROWS_AS(silhouette(x, {0, 0, 0, 0}), Error);
    CHECK_THROWS_AS(silhouette(x, {0, 0, 2, 2}), Error);  // empty cluster 1
  }
}
