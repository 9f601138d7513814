#include "core/lda.hpp"

#include <cmath>

#include "core/linalg.hpp"

namespace coper {

ScatterPair scatter_matrices(const Matrix& x, const std::vector<int>& labels, int k) {
  if (x.empty() || x.cols != labels.size())
    fail(ErrorCode::InvalidShape, "scatter_matrices: labels must match sample count");
  if (k < 1) fail(ErrorCode::InvalidLabels, "scatter_matrices: k >= 1 required");
  for (int lab : labels)
    if (lab < 0 || lab >= k)
      fail(ErrorCode::InvalidLabels, "scatter_matrices: label out of range");

  // idempotent for inputs that already satisfy the centering precondition
  Matrix xc = center_rows(x);
  const std::size_t d = xc.rows;
  const double n = static_cast<double>(xc.cols);

  ScatterPair sp;
  sp.counts.assign(static_cast<std::size_t>(k), 0);
  for (int lab : labels) ++sp.counts[static_cast<std::size_t>(lab)];
  for (std::size_t c = 0; c < sp.counts.size(); ++c)
    if (sp.counts[c] == 0)
      fail(ErrorCode::InvalidLabels, "scatter_matrices: empty class " + std::to_string(c));

  sp.class_means = Matrix(static_cast<std::size_t>(k), d);
  for (std::size_t i = 0; i < xc.cols; ++i) {
    std::size_t c = static_cast<std::size_t>(labels[i]);
    for (std::size_t r = 0; r < d; ++r) sp.class_means(c, r) += xc(r, i);
  }
  for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c)
    for (std::size_t r = 0; r < d; ++r)
      sp.class_means(c, r) /= static_cast<double>(sp.counts[c]);

  sp.within = Matrix(d, d);
  for (std::size_t i = 0; i < xc.cols; ++i) {
    std::size_t c = static_cast<std::size_t>(labels[i]);
    for (std::size_t r = 0; r < d; ++r) {
      double dr = xc(r, i) - sp.class_means(c, r);
      if (dr == 0.0) continue;
      for (std::size_t s = r; s < d; ++s) {
        double ds = xc(s, i) - sp.class_means(c, s);
        sp.within(r, s) += dr * ds;
      }
    }
  }
  sp.between = Matrix(d, d);
  for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
    double w = static_cast<double>(sp.counts[c]) / n;
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t s = r; s < d; ++s)
        sp.between(r, s) += w * sp.class_means(c, r) * sp.class_means(c, s);
  }
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t s = r; s < d; ++s) {
      sp.within(r, s) /= n;
      sp.within(s, r) = sp.within(r, s);
      sp.between(s, r) = sp.between(r, s);
    }
  return sp;
}

LdaModel fit_lda(const Matrix& x, const std::vector<int>& labels, int k, double ridge) {
  ScatterPair sp = scatter_matrices(x, labels, k);

  if (ridge == 0.0) {
    EigenDecomposition ce = sym_eig(sp.within);
    double lam_max = std::max(1.0, ce.values.empty() ? 0.0 : std::fabs(ce.values.front()));
    for (double lam : ce.values)
      if (lam <= 1e-12 * lam_max)
        fail(ErrorCode::SingularScatter, "fit_lda: singular within-class scatter with ridge 0");
  }
  Matrix w = inv_sqrt(sp.within, ridge);
  EigenDecomposition e = sym_eig(matmul(matmul(w, sp.between), w));

  LdaModel model;
  model.within_scatter = sp.within;
  model.between_scatter = sp.between;
  model.class_means = sp.class_means;
  model.eigvals = e.values;
  model.eigvecs = matmul(w, e.vectors);

  // unit-norm columns, largest-|entry| positive
  for (std::size_t j = 0; j < model.eigvecs.cols; ++j) {
    double nrm = 0.0;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < model.eigvecs.rows; ++i) {
      nrm += model.eigvecs(i, j) * model.eigvecs(i, j);
      if (std::fabs(model.eigvecs(i, j)) > std::fabs(model.eigvecs(arg, j))) arg = i;
    }
    nrm = std::sqrt(nrm);
    if (nrm > 1e-300) {
      double s = (model.eigvecs(arg, j) < 0.0 ? -1.0 : 1.0) / nrm;
      for (std::size_t i = 0; i < model.eigvecs.rows; ++i) model.eigvecs(i, j) *= s;
    }
  }
  return model;
}

}  // namespace coper
