#include "core/pseudolabel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/kmeans.hpp"

namespace coper {

ConfidentSets select_confident(const Matrix& p, std::size_t b) {
  if (p.empty()) fail(ErrorCode::InvalidShape, "select_confident: empty matrix");
  if (b == 0 || b > p.rows)
    fail(ErrorCode::InvalidParameter, "select_confident: B must be in [1, N]");

  ConfidentSets out;
  out.top_count = b;
  out.per_cluster.resize(p.cols);
  std::vector<char> in_union(p.rows, 0);
  std::vector<std::size_t> order(p.rows);
  for (std::size_t k = 0; k < p.cols; ++k) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
      if (p(i, k) != p(j, k)) return p(i, k) > p(j, k);
      return i < j;
    });
    out.per_cluster[k].assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(b));
    for (std::size_t i : out.per_cluster[k]) in_union[i] = 1;
  }
  for (std::size_t i = 0; i < p.rows; ++i)
    if (in_union[i]) out.all.push_back(i);
  return out;
}

namespace {

double cosine(const Matrix& h, std::size_t col, const std::vector<double>& center) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t d = 0; d < h.rows; ++d) {
    dot += h(d, col) * center[d];
    na += h(d, col) * h(d, col);
    nb += center[d] * center[d];
  }
  // zero-norm vectors have similarity 0
  if (na <= 1e-300 || nb <= 1e-300) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

ViewSoftLabels refine_per_view(const Matrix& h, const ConfidentSets& sets, double lambda) {
  const std::size_t k = sets.per_cluster.size();
  // centers over the full pre-refinement T_k (B samples)
  std::vector<std::vector<double>> centers(k, std::vector<double>(h.rows, 0.0));
  for (std::size_t c = 0; c < k; ++c) {
    if (sets.per_cluster[c].empty())
      fail(ErrorCode::InvalidParameter, "refine_per_view: empty confident set");
    for (std::size_t i : sets.per_cluster[c]) {
      if (i >= h.cols) fail(ErrorCode::InvalidShape, "refine_per_view: index out of range");
      for (std::size_t d = 0; d < h.rows; ++d) centers[c][d] += h(d, i);
    }
    for (double& v : centers[c]) v /= static_cast<double>(sets.per_cluster[c].size());
  }

  ViewSoftLabels labels(h.cols);
  // retained (cluster, similarity) pairs per sample
  std::vector<std::vector<double>> sims(h.cols);
  std::vector<std::vector<char>> kept(h.cols);
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t i : sets.per_cluster[c]) {
      double s = cosine(h, i, centers[c]);
      if (s < lambda) continue;
      if (sims[i].empty()) {
        sims[i].assign(k, 0.0);
        kept[i].assign(k, 0);
      }
      sims[i][c] = s;
      kept[i][c] = 1;
    }
  }
  for (std::size_t i = 0; i < h.cols; ++i) {
    if (sims[i].empty()) continue;
    std::size_t hit_count = 0, last = 0;
    double sum = 0.0;
    for (std::size_t c = 0; c < k; ++c)
      if (kept[i][c]) { ++hit_count; last = c; sum += sims[i][c]; }
    std::vector<double> y(k, 0.0);
    if (hit_count == 1) {
      y[last] = 1.0;  // one-hot
    } else if (sum > 1e-12) {
      for (std::size_t c = 0; c < k; ++c)
        if (kept[i][c]) y[c] = sims[i][c] / sum;
    } else {
      // degenerate multi-assignment with non-positive total (lambda < 0):
      // fall back to the best similarity
      std::size_t best = last;
      for (std::size_t c = 0; c < k; ++c)
        if (kept[i][c] && sims[i][c] > sims[i][best]) best = c;
      y[best] = 1.0;
    }
    labels[i] = std::move(y);
  }
  return labels;
}

namespace {

std::size_t argmax(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

}  // namespace

PseudoLabelSet multiview_agreement(const std::vector<ViewSoftLabels>& per_view) {
  PseudoLabelSet out;
  out.per_view = per_view;
  if (per_view.empty()) return out;
  const std::size_t n = per_view.front().size();
  for (const auto& v : per_view)
    if (v.size() != n)
      fail(ErrorCode::InvalidShape, "multiview_agreement: views disagree on sample count");

  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> labeled_views;
    for (std::size_t v = 0; v < per_view.size(); ++v)
      if (!per_view[v][i].empty()) labeled_views.push_back(v);
    if (labeled_views.empty()) continue;
    if (labeled_views.size() >= 2) {
      std::size_t ref = argmax(per_view[labeled_views[0]][i]);
      bool agree = true;
      for (std::size_t v : labeled_views)
        if (argmax(per_view[v][i]) != ref) { agree = false; break; }
      if (!agree) {
        for (std::size_t v : labeled_views) out.per_view[v][i].clear();
        continue;
      }
    }
    out.retained.push_back(i);
  }
  return out;
}

std::vector<std::vector<TrainingPair>> build_training_sets(const PseudoLabelSet& set) {
  std::vector<std::vector<TrainingPair>> out(set.per_view.size());
  for (std::size_t v = 0; v < set.per_view.size(); ++v)
    for (std::size_t i : set.retained)
      if (!set.per_view[v][i].empty())
        out[v].push_back({i, set.per_view[v][i]});
  return out;
}

std::vector<int> permutation_labels(const PseudoLabelSet& set, const Matrix& fused_p) {
  std::size_t n = set.per_view.empty() ? 0 : set.per_view.front().size();
  std::vector<int> labels(n, -1);
  for (std::size_t i : set.retained) {
    std::vector<std::size_t> labeled_views;
    for (std::size_t v = 0; v < set.per_view.size(); ++v)
      if (!set.per_view[v][i].empty()) labeled_views.push_back(v);
    if (labeled_views.empty()) continue;
    std::size_t lab = argmax(set.per_view[labeled_views[0]][i]);
    if (labeled_views.size() == 1 && !fused_p.empty() && i < fused_p.rows) {
      // single-view label participates only when it matches the fused argmax
      std::size_t fused_lab = 0;
      for (std::size_t c = 1; c < fused_p.cols; ++c)
        if (fused_p(i, c) > fused_p(i, fused_lab)) fused_lab = c;
      if (fused_lab != lab) continue;
    }
    labels[i] = static_cast<int>(lab);
  }
  return labels;
}

Matrix soft_kmeans_probabilities(const Matrix& fused, int k, double temperature,
                                 std::uint64_t seed) {
  if (k < 2) fail(ErrorCode::InvalidParameter, "soft_kmeans_probabilities: k >= 2 required");
  if (fused.empty()) fail(ErrorCode::InvalidShape, "soft_kmeans_probabilities: empty embedding");
  if (!(temperature > 0.0))
    fail(ErrorCode::InvalidParameter, "soft_kmeans_probabilities: temperature must be > 0");

  KMeansResult km = kmeans(transpose(fused), k, 10, 300, 1e-6, seed);
  Matrix p(fused.cols, static_cast<std::size_t>(k));
  std::vector<double> d2(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < fused.cols; ++i) {
    double dmin = 0.0;
    for (int c = 0; c < k; ++c) {
      double s = 0.0;
      for (std::size_t r = 0; r < fused.rows; ++r) {
        double diff = fused(r, i) - km.centers(static_cast<std::size_t>(c), r);
        s += diff * diff;
      }
      d2[static_cast<std::size_t>(c)] = s;
      if (c == 0 || s < dmin) dmin = s;
    }
    double total = 0.0;
    for (int c = 0; c < k; ++c) {
      double e = std::exp(-(d2[static_cast<std::size_t>(c)] - dmin) / temperature);
      p(i, static_cast<std::size_t>(c)) = e;
      total += e;
    }
    for (int c = 0; c < k; ++c) p(i, static_cast<std::size_t>(c)) /= total;
  }
  return p;
}

}  // namespace coper
