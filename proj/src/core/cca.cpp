#include "core/cca.hpp"

#include <algorithm>
#include <cmath>

#include "core/linalg.hpp"

namespace coper {

namespace {

// Whitening factor with an explicit singularity check when ridge == 0.
Matrix whitener(const Matrix& cov, double ridge, const char* view) {
  if (ridge == 0.0) {
    EigenDecomposition e = sym_eig(cov);
    double lam_max = std::max(1.0, e.values.empty() ? 0.0 : std::fabs(e.values.front()));
    for (double lam : e.values)
      if (lam <= 1e-12 * lam_max)
        fail(ErrorCode::SingularCovariance,
             std::string("fit_cca: singular covariance for ") + view +
                 " with ridge 0");
  }
  return inv_sqrt(cov, ridge);
}

}  // namespace

CcaModel fit_cca(const Matrix& x1, const Matrix& x2, std::size_t dim, double ridge) {
  if (x1.empty() || x2.empty() || x1.cols != x2.cols)
    fail(ErrorCode::InvalidShape, "fit_cca: views must share a positive sample count");
  if (x1.cols < 2) fail(ErrorCode::InvalidShape, "fit_cca: need at least 2 samples");
  if (dim == 0 || dim > std::min(x1.rows, x2.rows))
    fail(ErrorCode::InvalidShape, "fit_cca: dim out of range");

  CcaModel model;
  model.ridge = ridge;
  model.mean_a = row_means(x1);
  model.mean_b = row_means(x2);

  Matrix x1c = center_rows(x1);
  Matrix x2c = center_rows(x2);
  Matrix c1 = covariance(x1c, x1c, CovDivisor::NMinusOne);
  Matrix c2 = covariance(x2c, x2c, CovDivisor::NMinusOne);
  Matrix c12 = covariance(x1c, x2c, CovDivisor::NMinusOne);

  Matrix w1 = whitener(c1, ridge, "view 1");
  Matrix w2 = whitener(c2, ridge, "view 2");
  Matrix t = matmul(matmul(w1, c12), w2);  // D1 x D2

  // Right singular vectors from T^T T, left ones recovered as T v / sigma.
  EigenDecomposition em = sym_eig(matmul(transpose(t), t));

  model.proj_a = Matrix(dim, x1.rows);
  model.proj_b = Matrix(dim, x2.rows);
  model.correlations.resize(dim);

  std::vector<std::vector<double>> used_u;  // for the degenerate completion
  for (std::size_t i = 0; i < dim; ++i) {
    double sigma = std::sqrt(std::max(0.0, em.values[i]));
    std::vector<double> v(x2.rows), u(x1.rows, 0.0);
    for (std::size_t r = 0; r < x2.rows; ++r) v[r] = em.vectors(r, i);
    if (sigma > 1e-10) {
      for (std::size_t r = 0; r < x1.rows; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < x2.rows; ++c) s += t(r, c) * v[c];
        u[r] = s / sigma;
      }
    } else {
      // zero-correlation direction: deterministic orthonormal completion
      for (std::size_t pick = 0; pick < x1.rows; ++pick) {
        std::fill(u.begin(), u.end(), 0.0);
        u[pick] = 1.0;
        for (const auto& prev : used_u) {
          double dot = 0.0;
          for (std::size_t r = 0; r < u.size(); ++r) dot += u[r] * prev[r];
          for (std::size_t r = 0; r < u.size(); ++r) u[r] -= dot * prev[r];
        }
        double nrm = 0.0;
        for (double val : u) nrm += val * val;
        if (nrm > 1e-8) {
          nrm = std::sqrt(nrm);
          for (double& val : u) val /= nrm;
          break;
        }
      }
    }
    used_u.push_back(u);

    // back to data space: a = W1 u, b = W2 v
    std::vector<double> a(x1.rows, 0.0), b(x2.rows, 0.0);
    for (std::size_t r = 0; r < x1.rows; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < x1.rows; ++c) s += w1(r, c) * u[c];
      a[r] = s;
    }
    for (std::size_t r = 0; r < x2.rows; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < x2.rows; ++c) s += w2(r, c) * v[c];
      b[r] = s;
    }

    // unit variance of the training variates
    auto rescale = [](std::vector<double>& w, const Matrix& cov) {
      double var = 0.0;
      for (std::size_t r = 0; r < w.size(); ++r)
        for (std::size_t c = 0; c < w.size(); ++c) var += w[r] * cov(r, c) * w[c];
      if (var > 1e-14) {
        double s = 1.0 / std::sqrt(var);
        for (double& v2 : w) v2 *= s;
      }
    };
    rescale(a, c1);
    rescale(b, c2);

    // sign convention: largest-|entry| of a positive; b then signed so the
    // training correlation is non-negative
    std::size_t arg = 0;
    for (std::size_t r = 1; r < a.size(); ++r)
      if (std::fabs(a[r]) > std::fabs(a[arg])) arg = r;
    if (a[arg] < 0.0)
      for (double& val : a) val = -val;
    double cross = 0.0;
    for (std::size_t r = 0; r < a.size(); ++r)
      for (std::size_t c = 0; c < b.size(); ++c) cross += a[r] * c12(r, c) * b[c];
    if (cross < 0.0)
      for (double& val : b) val = -val;

    model.correlations[i] = std::max(0.0, sigma);
    for (std::size_t r = 0; r < a.size(); ++r) model.proj_a(i, r) = a[r];
    for (std::size_t r = 0; r < b.size(); ++r) model.proj_b(i, r) = b[r];
  }
  return model;
}

Matrix cca_transform(const CcaModel& model, const Matrix& x, CcaSide side) {
  const Matrix& proj = side == CcaSide::First ? model.proj_a : model.proj_b;
  const std::vector<double>& mean = side == CcaSide::First ? model.mean_a : model.mean_b;
  if (x.rows != proj.cols)
    fail(ErrorCode::InvalidShape, "cca_transform: feature dim does not match the side");
  Matrix out(proj.rows, x.cols);
  for (std::size_t i = 0; i < proj.rows; ++i)
    for (std::size_t j = 0; j < x.cols; ++j) {
      double s = 0.0;
      for (std::size_t d = 0; d < x.rows; ++d) s += proj(i, d) * (x(d, j) - mean[d]);
      out(i, j) = s;
    }
  return out;
}

double correlation_loss(const Matrix& hv, const Matrix& hw, double ridge) {
  if (hv.cols != hw.cols || hv.cols < 2)
    fail(ErrorCode::InvalidShape, "correlation_loss: need matching N > 1");
  Matrix a = center_rows(hv);
  Matrix b = center_rows(hw);
  Matrix sv = covariance(a, a, CovDivisor::NMinusOne);
  Matrix sw = covariance(b, b, CovDivisor::NMinusOne);
  Matrix cvw = covariance(a, b, CovDivisor::NMinusOne);
  Matrix mv = sym_inverse(sv, ridge);
  Matrix mw = sym_inverse(sw, ridge);
  // Trace[Cw^{-1/2} Cwv Cv^{-1} Cvw Cw^{-1/2}] == Trace[Cw^{-1} Cwv Cv^{-1} Cvw]
  Matrix prod = matmul(matmul(mw, transpose(cvw)), matmul(mv, cvw));
  return -trace(prod);
}

CorrelationLossGrad correlation_loss_gradient(const Matrix& hv, const Matrix& hw,
                                              double ridge) {
  if (hv.cols != hw.cols || hv.cols < 2)
    fail(ErrorCode::InvalidShape, "correlation_loss_gradient: need matching N > 1");
  const double n1 = static_cast<double>(hv.cols - 1);

  Matrix a = center_rows(hv);
  Matrix b = center_rows(hw);
  Matrix sv = covariance(a, a, CovDivisor::NMinusOne);
  Matrix sw = covariance(b, b, CovDivisor::NMinusOne);
  Matrix m = sym_inverse(sv, ridge);  // (Cv + rI)^{-1}
  Matrix p = sym_inverse(sw, ridge);  // (Cw + rI)^{-1}

  Matrix ma = matmul(m, a);  // dv x N
  Matrix pb = matmul(p, b);  // dw x N

  // f = Trace[P B A^T M A B^T]; L = -f / (N-1)^2
  Matrix k1 = matmul(ma, transpose(b));   // M A B^T            (dv x dw)
  Matrix t1 = matmul(k1, pb);             // M A B^T P B        (dv x N)
  Matrix k2 = matmul(pb, transpose(a));   // P B A^T            (dw x dv)
  Matrix t2 = matmul(k2, ma);             // P B A^T M A        (dw x N)

  double f = 0.0;
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) f += t1(i, j) * a(i, j);

  CorrelationLossGrad out;
  out.loss = -f / (n1 * n1);

  // df/dA = 2 T1 - (2/n1) (T1 A^T) (M A); mirrored for B
  Matrix qa = matmul(matmul(t1, transpose(a)), ma);
  Matrix qb = matmul(matmul(t2, transpose(b)), pb);
  Matrix ga(a.rows, a.cols), gb(b.rows, b.cols);
  const double scale = -1.0 / (n1 * n1);
  for (std::size_t i = 0; i < ga.data.size(); ++i)
    ga.data[i] = scale * (2.0 * t1.data[i] - (2.0 / n1) * qa.data[i]);
  for (std::size_t i = 0; i < gb.data.size(); ++i)
    gb.data[i] = scale * (2.0 * t2.data[i] - (2.0 / n1) * qb.data[i]);

  // chain through the per-row centering
  out.d_hv = center_rows(ga);
  out.d_hw = center_rows(gb);
  return out;
}

}  // namespace coper
