#ifndef COPER_CORE_METRICS_HPP
#define COPER_CORE_METRICS_HPP

#include <vector>

#include "core/matrix.hpp"

namespace coper {

// Clustering accuracy: best label matching via optimal assignment on the
// negated confusion matrix.
double accuracy(const std::vector<int>& pred, const std::vector<int>& truth);

double adjusted_rand_index(const std::vector<int>& pred, const std::vector<int>& truth);

// I(pred;truth) / sqrt(H(pred) H(truth)); see header notes on degenerate
// entropies in metrics.cpp.
double normalized_mutual_information(const std::vector<int>& pred,
                                     const std::vector<int>& truth);

// Mean silhouette over samples, Euclidean distances on a d x N embedding.
// Singleton clusters contribute 0.
double silhouette(const Matrix& embedding, const std::vector<int>& labels);

struct MetricsReport {
  double acc = 0.0;
  double ari = 0.0;
  double nmi = 0.0;
  double silhouette = 0.0;
};

}  // namespace coper

#endif
