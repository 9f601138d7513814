#ifndef COPER_CORE_CCA_HPP
#define COPER_CORE_CCA_HPP

#include <vector>

#include "core/matrix.hpp"

namespace coper {

struct CcaModel {
  Matrix proj_a;                     // dim x D1, rows are canonical vectors a^T
  Matrix proj_b;                     // dim x D2
  std::vector<double> correlations;  // descending, in [0, 1]
  double ridge = 0.0;
  std::vector<double> mean_a;        // training means, subtracted on transform
  std::vector<double> mean_b;
};

// Linear CCA via the whitened form: canonical correlations are the singular
// values of C1^{-1/2} C12 C2^{-1/2}. Ridge is added to both within-view
// covariances before inversion.
CcaModel fit_cca(const Matrix& x1, const Matrix& x2, std::size_t dim, double ridge);

enum class CcaSide { First, Second };

Matrix cca_transform(const CcaModel& model, const Matrix& x, CcaSide side);

// Eq.-style batch correlation objective:
//   -Trace[ Cw^{-1/2} Cwv Cv^{-1} Cvw Cw^{-1/2} ]
// with within-call centering, N-1 covariances and ridge-regularized inverses.
// Equals minus the sum of squared canonical correlations.
double correlation_loss(const Matrix& hv, const Matrix& hw, double ridge);

struct CorrelationLossGrad {
  double loss = 0.0;
  Matrix d_hv;
  Matrix d_hw;
};

// Analytic gradient of correlation_loss, including the centering and the
// 1/(N-1) factors.
CorrelationLossGrad correlation_loss_gradient(const Matrix& hv, const Matrix& hw,
                                              double ridge);

}  // namespace coper

#endif
