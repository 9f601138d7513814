#ifndef COPER_CORE_LDA_HPP
#define COPER_CORE_LDA_HPP

#include <vector>

#include "core/matrix.hpp"

namespace coper {

// Biased (1/N) scatter matrices of globally centered data, so that
// within + between == total covariance holds exactly.
struct ScatterPair {
  Matrix within;       // C_e
  Matrix between;      // C_a
  Matrix class_means;  // K x D (means of the centered data)
  std::vector<std::size_t> counts;
};

ScatterPair scatter_matrices(const Matrix& x, const std::vector<int>& labels, int k);

struct LdaModel {
  std::vector<double> eigvals;  // descending
  Matrix eigvecs;               // D x D, columns h
  Matrix within_scatter;
  Matrix between_scatter;
  Matrix class_means;
};

// Generalized eigenproblem C_a h = lambda C_e h via the symmetric reduction
// Ce^{-1/2} C_a Ce^{-1/2} (ridge-regularized).
LdaModel fit_lda(const Matrix& x, const std::vector<int>& labels, int k, double ridge);

}  // namespace coper

#endif
