#ifndef COPER_CORE_PSEUDOLABEL_HPP
#define COPER_CORE_PSEUDOLABEL_HPP

#include <cstdint>
#include <vector>

#include "core/matrix.hpp"

namespace coper {

// Top-B confident samples per cluster column of a row-stochastic N x K
// probability matrix. Ties break toward the lower sample index.
struct ConfidentSets {
  std::vector<std::vector<std::size_t>> per_cluster;  // T_k, each of size B
  std::vector<std::size_t> all;                       // T = union, ascending
  std::size_t top_count = 0;                          // B
};

ConfidentSets select_confident(const Matrix& p, std::size_t b);

// Per-view soft labels: entry i is a length-K probability vector, empty when
// the sample holds no label in this view.
using ViewSoftLabels = std::vector<std::vector<double>>;

// Cosine-similarity refinement against per-cluster centers computed over the
// full pre-refinement confident sets. Similarities below lambda are dropped;
// multi-assigned samples get their retained similarities renormalized.
ViewSoftLabels refine_per_view(const Matrix& h, const ConfidentSets& sets, double lambda);

struct PseudoLabelSet {
  std::vector<std::size_t> retained;       // ascending indices with >=1 view label
  std::vector<ViewSoftLabels> per_view;    // filtered labels per view
  double lambda = 0.0;
  std::size_t top_count = 0;
};

// Keep an index labeled in several views only when the argmax label agrees
// across all labeling views; single-view labels are always retained.
PseudoLabelSet multiview_agreement(const std::vector<ViewSoftLabels>& per_view);

// Per-view training pairs (sample index, soft label).
struct TrainingPair {
  std::size_t index;
  std::vector<double> soft_label;
};
std::vector<std::vector<TrainingPair>> build_training_sets(const PseudoLabelSet& set);

// Hard cluster ids used for within-cluster permutation; -1 for samples that
// do not participate. Samples labeled in several views use the agreed argmax;
// samples labeled in a single view participate only when that label matches
// the fused prediction argmax.
std::vector<int> permutation_labels(const PseudoLabelSet& set, const Matrix& fused_p);

// Linear-mode stand-in for the cluster head: softmax over negative scaled
// squared distances to k-means centers.
Matrix soft_kmeans_probabilities(const Matrix& fused, int k, double temperature,
                                 std::uint64_t seed);

}  // namespace coper

#endif
