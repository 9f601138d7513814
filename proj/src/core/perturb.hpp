#ifndef COPER_CORE_PERTURB_HPP
#define COPER_CORE_PERTURB_HPP

#include <vector>

#include "core/matrix.hpp"

namespace coper {

// The three error terms of the pseudo-label perturbation analysis, computed
// on globally centered data. pseudo entries of -1 mean "excluded".
struct ErrorTerms {
  Matrix e1;  // excluded within-class mass
  Matrix e2;  // cross-class mixing from wrong labels
  Matrix e3;  // class-mean estimation error
};

ErrorTerms error_terms(const Matrix& theta, const std::vector<int>& true_labels,
                       const std::vector<int>& pseudo_labels, int k);

// First-order perturbation of A = C^{-1} C_a:
//   D = C^{-1}E - C^{-1}E C^{-1}C_e - C^{-1}E3 + C^{-1}E C^{-1}E3
Matrix perturbation_matrix(const Matrix& c, const Matrix& c_e, const Matrix& e,
                           const Matrix& e3, double ridge);

struct PerturbationReport {
  Matrix e1, e2, e3, e, d;
  std::vector<double> true_eigvals;       // spectrum of A from true labels
  std::vector<double> perturbed_eigvals;  // spectrum of A-hat from pseudo labels
  double spectral_bound = 0.0;            // ||D||_2
  double max_gap = 0.0;                   // max_i |lambda-hat_i - lambda_i|
  bool bound_satisfied = false;
};

// Full check: LDA operator spectra under true and pseudo labels, the error
// terms, D, and whether the first-order bound holds. The bound is reported,
// not asserted; it is only reliable for small ||E||.
PerturbationReport bound_check(const Matrix& theta, const std::vector<int>& true_labels,
                               const std::vector<int>& pseudo_labels, int k, double ridge);

}  // namespace coper

#endif
