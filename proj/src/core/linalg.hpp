#ifndef COPER_CORE_LINALG_HPP
#define COPER_CORE_LINALG_HPP

#include <vector>

#include "core/matrix.hpp"

namespace coper {

struct EigenDecomposition {
  std::vector<double> values;  // descending
  Matrix vectors;              // orthonormal columns, vectors.col(i) pairs values[i]
};

// Cyclic Jacobi for symmetric matrices. Deterministic, adequate for d <= ~200.
EigenDecomposition sym_eig(const Matrix& a);

// (A + ridge*I)^{-1/2} via eigendecomposition. Eigenvalues below -1e-8 after
// the ridge raise NotPSD; values in [-1e-8, tiny] are treated as zero
// (pseudo-inverse behaviour on the null space).
Matrix inv_sqrt(const Matrix& a, double ridge);

// (A + ridge*I)^{-1} for symmetric A; SingularCovariance if not invertible.
Matrix sym_inverse(const Matrix& a, double ridge);

struct PcaResult {
  Matrix projection;                       // target_dim x d, orthonormal rows
  Matrix embedded;                         // target_dim x N
  std::vector<double> component_variances; // descending
  std::vector<double> means;               // per-feature training means
};

PcaResult pca(const Matrix& x, std::size_t target_dim);

// Largest singular value.
double spectral_norm(const Matrix& a);

// Minimum-cost assignment on a square cost matrix; returns pi with row i
// matched to column pi[i]. O(K^3) augmenting-path method, arbitrary finite
// costs.
std::vector<std::size_t> optimal_assignment(const Matrix& cost);

// Mean cosine of the principal angles between the column spans of a and b
// (columns are orthonormalized internally).
double subspace_alignment(const Matrix& a, const Matrix& b);

}  // namespace coper

#endif
