#include "core/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "core/linalg.hpp"

namespace coper {

namespace {

int label_count(const std::vector<int>& labels, const char* who) {
  int k = 0;
  for (int v : labels) {
    if (v < 0) fail(ErrorCode::InvalidLabels, std::string(who) + ": negative label");
    k = std::max(k, v + 1);
  }
  return k;
}

void check_lengths(const std::vector<int>& a, const std::vector<int>& b, const char* who) {
  if (a.size() != b.size() || a.empty())
    fail(ErrorCode::InvalidShape, std::string(who) + ": label vectors must match and be non-empty");
}

// Contingency counts as int64 so pair arithmetic stays exact.
std::vector<std::vector<std::int64_t>> contingency(const std::vector<int>& pred,
                                                   const std::vector<int>& truth,
                                                   int kp, int kt) {
  std::vector<std::vector<std::int64_t>> table(
      static_cast<std::size_t>(kp), std::vector<std::int64_t>(static_cast<std::size_t>(kt), 0));
  for (std::size_t i = 0; i < pred.size(); ++i)
    ++table[static_cast<std::size_t>(pred[i])][static_cast<std::size_t>(truth[i])];
  return table;
}

// Same partition regardless of label names: contingency has at most one
// non-zero cell per row and per column.
bool same_partition(const std::vector<std::vector<std::int64_t>>& table) {
  std::vector<int> col_hits(table.empty() ? 0 : table[0].size(), 0);
  for (const auto& row : table) {
    int hits = 0;
    for (std::size_t j = 0; j < row.size(); ++j)
      if (row[j] > 0) { ++hits; ++col_hits[j]; }
    if (hits > 1) return false;
  }
  for (int h : col_hits)
    if (h > 1) return false;
  return true;
}

}  // namespace

double accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
  check_lengths(pred, truth, "accuracy");
  int kp = label_count(pred, "accuracy");
  int kt = label_count(truth, "accuracy");
  int k = std::max(kp, kt);
  auto table = contingency(pred, truth, kp, kt);

  // Pad to square; assignment maximizes matched mass via negated costs.
  Matrix cost(static_cast<std::size_t>(k), static_cast<std::size_t>(k), 0.0);
  for (int i = 0; i < kp; ++i)
    for (int j = 0; j < kt; ++j)
      cost(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
          -static_cast<double>(table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
  std::vector<std::size_t> pi = optimal_assignment(cost);

  std::int64_t matched = 0;
  for (int i = 0; i < kp; ++i) {
    std::size_t j = pi[static_cast<std::size_t>(i)];
    if (j < static_cast<std::size_t>(kt))
      matched += table[static_cast<std::size_t>(i)][j];
  }
  return static_cast<double>(matched) / static_cast<double>(pred.size());
}

double adjusted_rand_index(const std::vector<int>& pred, const std::vector<int>& truth) {
  check_lengths(pred, truth, "adjusted_rand_index");
  int kp = label_count(pred, "adjusted_rand_index");
  int kt = label_count(truth, "adjusted_rand_index");
  auto table = contingency(pred, truth, kp, kt);

  auto choose2 = [](std::int64_t n) { return n * (n - 1) / 2; };

  std::int64_t sum_cells = 0;
  std::vector<std::int64_t> a(static_cast<std::size_t>(kp), 0), b(static_cast<std::size_t>(kt), 0);
  for (int i = 0; i < kp; ++i)
    for (int j = 0; j < kt; ++j) {
      std::int64_t n = table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      sum_cells += choose2(n);
      a[static_cast<std::size_t>(i)] += n;
      b[static_cast<std::size_t>(j)] += n;
    }
  std::int64_t sum_a = 0, sum_b = 0;
  for (std::int64_t v : a) sum_a += choose2(v);
  for (std::int64_t v : b) sum_b += choose2(v);
  std::int64_t pairs = choose2(static_cast<std::int64_t>(pred.size()));
  if (pairs == 0) return 1.0;

  double expected = static_cast<double>(sum_a) * static_cast<double>(sum_b) /
                    static_cast<double>(pairs);
  double maximum = 0.5 * static_cast<double>(sum_a + sum_b);
  double denom = maximum - expected;
  if (std::fabs(denom) < 1e-12) return 1.0;  // both partitions trivial and equal
  return (static_cast<double>(sum_cells) - expected) / denom;
}

double normalized_mutual_information(const std::vector<int>& pred,
                                     const std::vector<int>& truth) {
  check_lengths(pred, truth, "normalized_mutual_information");
  int kp = label_count(pred, "normalized_mutual_information");
  int kt = label_count(truth, "normalized_mutual_information");
  auto table = contingency(pred, truth, kp, kt);
  double n = static_cast<double>(pred.size());

  std::vector<std::int64_t> a(static_cast<std::size_t>(kp), 0), b(static_cast<std::size_t>(kt), 0);
  for (int i = 0; i < kp; ++i)
    for (int j = 0; j < kt; ++j) {
      a[static_cast<std::size_t>(i)] += table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      b[static_cast<std::size_t>(j)] += table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }

  // Sum entropy/MI terms in sorted order so any relabeling (which only
  // permutes the terms) produces bit-identical results.
  auto entropy = [&](std::vector<std::int64_t> counts) {
    std::vector<double> terms;
    for (std::int64_t c : counts)
      if (c > 0) {
        double p = static_cast<double>(c) / n;
        terms.push_back(-p * std::log(p));
      }
    std::sort(terms.begin(), terms.end());
    double h = 0.0;
    for (double t : terms) h += t;
    return h;
  };

  double hp = entropy(a), ht = entropy(b);
  if (hp <= 0.0 || ht <= 0.0) return same_partition(table) ? 1.0 : 0.0;

  std::vector<double> mi_terms;
  for (int i = 0; i < kp; ++i)
    for (int j = 0; j < kt; ++j) {
      std::int64_t c = table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      if (c == 0) continue;
      double pij = static_cast<double>(c) / n;
      double pi_ = static_cast<double>(a[static_cast<std::size_t>(i)]) / n;
      double pj_ = static_cast<double>(b[static_cast<std::size_t>(j)]) / n;
      mi_terms.push_back(pij * std::log(pij / (pi_ * pj_)));
    }
  std::sort(mi_terms.begin(), mi_terms.end());
  double mi = 0.0;
  for (double t : mi_terms) mi += t;
  double nmi = mi / std::sqrt(hp * ht);
  return std::clamp(nmi, 0.0, 1.0);
}

double silhouette(const Matrix& embedding, const std::vector<int>& labels) {
  if (embedding.cols != labels.size() || embedding.empty())
    fail(ErrorCode::InvalidShape, "silhouette: embedding/labels size mismatch");
  int k = label_count(labels, "silhouette");
  if (k < 2) fail(ErrorCode::InvalidLabels, "silhouette: need at least two clusters");
  std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
  for (int lab : labels) ++counts[static_cast<std::size_t>(lab)];
  for (std::size_t c = 0; c < counts.size(); ++c)
    if (counts[c] == 0) fail(ErrorCode::InvalidLabels, "silhouette: empty cluster");

  const std::size_t n = labels.size();
  auto dist = [&](std::size_t i, std::size_t j) {
    double s = 0.0;
    for (std::size_t d = 0; d < embedding.rows; ++d) {
      double diff = embedding(d, i) - embedding(d, j);
      s += diff * diff;
    }
    return std::sqrt(s);
  };

  double total = 0.0;
  std::vector<double> sums(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      sums[static_cast<std::size_t>(labels[j])] += dist(i, j);
    }
    std::size_t own = static_cast<std::size_t>(labels[i]);
    if (counts[own] <= 1) continue;  // singleton contributes 0
    double a = sums[own] / static_cast<double>(counts[own] - 1);
    double b = 0.0;
    bool first = true;
    for (std::size_t c = 0; c < sums.size(); ++c) {
      if (c == own) continue;
      double mean_c = sums[c] / static_cast<double>(counts[c]);
      if (first || mean_c < b) { b = mean_c; first = false; }
    }
    double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(n);
}

}  // namespace coper
