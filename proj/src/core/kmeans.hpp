#ifndef COPER_CORE_KMEANS_HPP
#define COPER_CORE_KMEANS_HPP

#include <cstdint>
#include <vector>

#include "core/matrix.hpp"

namespace coper {

struct KMeansResult {
  Matrix centers;               // K x d
  std::vector<int> assignment;  // N
  double inertia = 0.0;
  int iterations = 0;
};

// Lloyd iterations with k-means++ seeding, best of `restarts` by inertia
// (ties broken by restart index). x holds samples as rows (N x d).
// inertia_trace, when given, records the inertia after every Lloyd step of
// the winning restart.
KMeansResult kmeans(const Matrix& x, int k, int restarts, int max_iter, double tol,
                    std::uint64_t seed, std::vector<double>* inertia_trace = nullptr);

}  // namespace coper

#endif
