#include "core/matrix.hpp"

#include <cmath>

namespace coper {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Ok: return "Ok";
    case ErrorCode::InvalidShape: return "InvalidShape";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::AlignmentError: return "AlignmentError";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::InvalidLabels: return "InvalidLabels";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::EigenFailure: return "EigenFailure";
    case ErrorCode::NotPsd: return "NotPSD";
    case ErrorCode::SingularScatter: return "SingularScatter";
    case ErrorCode::InvalidPlan: return "InvalidPlan";
    case ErrorCode::InvalidState: return "InvalidState";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::TrainingDiverged: return "TrainingDiverged";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols, a.rows);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
  return t;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows)
    fail(ErrorCode::InvalidShape, "matmul: inner dimensions differ");
  Matrix c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* arow = &a.data[i * a.cols];
    double* crow = &c.data[i * b.cols];
    for (std::size_t k = 0; k < a.cols; ++k) {
      double aik = arow[k];
      if (aik == 0.0) continue;
      const double* brow = &b.data[k * b.cols];
      for (std::size_t j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows || a.cols != b.cols)
    fail(ErrorCode::InvalidShape, "matrix add: shape mismatch");
  Matrix c = a;
  for (std::size_t i = 0; i < c.data.size(); ++i) c.data[i] += b.data[i];
  return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows || a.cols != b.cols)
    fail(ErrorCode::InvalidShape, "matrix sub: shape mismatch");
  Matrix c = a;
  for (std::size_t i = 0; i < c.data.size(); ++i) c.data[i] -= b.data[i];
  return c;
}

Matrix operator*(double s, const Matrix& a) {
  Matrix c = a;
  for (double& v : c.data) v *= s;
  return c;
}

void add_scaled(Matrix& a, double s, const Matrix& b) {
  if (a.rows != b.rows || a.cols != b.cols)
    fail(ErrorCode::InvalidShape, "add_scaled: shape mismatch");
  for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] += s * b.data[i];
}

void add_diagonal(Matrix& a, double s) {
  std::size_t n = a.rows < a.cols ? a.rows : a.cols;
  for (std::size_t i = 0; i < n; ++i) a(i, i) += s;
}

double trace(const Matrix& a) {
  std::size_t n = a.rows < a.cols ? a.rows : a.cols;
  double t = 0.0;
  for (std::size_t i = 0; i < n; ++i) t += a(i, i);
  return t;
}

double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double v : a.data) s += v * v;
  return std::sqrt(s);
}

double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double v : a.data) m = std::max(m, std::fabs(v));
  return m;
}

bool all_finite(const Matrix& a) {
  for (double v : a.data)
    if (!std::isfinite(v)) return false;
  return true;
}

Matrix hcat(const Matrix& a, const Matrix& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  if (a.rows != b.rows) fail(ErrorCode::InvalidShape, "hcat: row count mismatch");
  Matrix c(a.rows, a.cols + b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < a.cols; ++j) c(i, j) = a(i, j);
    for (std::size_t j = 0; j < b.cols; ++j) c(i, a.cols + j) = b(i, j);
  }
  return c;
}

Matrix take_columns(const Matrix& a, const std::vector<std::size_t>& idx) {
  Matrix c(a.rows, idx.size());
  for (std::size_t j = 0; j < idx.size(); ++j) {
    if (idx[j] >= a.cols) fail(ErrorCode::InvalidShape, "take_columns: index out of range");
    for (std::size_t i = 0; i < a.rows; ++i) c(i, j) = a(i, idx[j]);
  }
  return c;
}

std::vector<double> row_means(const Matrix& a) {
  std::vector<double> m(a.rows, 0.0);
  for (std::size_t i = 0; i < a.rows; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols; ++j) s += a(i, j);
    m[i] = s / static_cast<double>(a.cols);
  }
  return m;
}

Matrix center_rows(const Matrix& x) {
  if (x.empty()) fail(ErrorCode::InvalidShape, "center: empty matrix");
  Matrix c = x;
  std::vector<double> m = row_means(x);
  for (std::size_t i = 0; i < c.rows; ++i)
    for (std::size_t j = 0; j < c.cols; ++j) c(i, j) -= m[i];
  return c;
}

Matrix covariance(const Matrix& a, const Matrix& b, CovDivisor divisor) {
  if (a.cols != b.cols)
    fail(ErrorCode::InvalidShape, "covariance: sample counts differ");
  if (a.cols == 0) fail(ErrorCode::InvalidShape, "covariance: no samples");
  if (divisor == CovDivisor::NMinusOne && a.cols < 2)
    fail(ErrorCode::InvalidShape, "covariance: N-1 divisor needs at least 2 samples");
  double d = divisor == CovDivisor::NMinusOne ? static_cast<double>(a.cols - 1)
                                              : static_cast<double>(a.cols);
  Matrix c(a.rows, b.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < b.rows; ++j) {
      double s = 0.0;
      const double* ai = &a.data[i * a.cols];
      const double* bj = &b.data[j * b.cols];
      for (std::size_t n = 0; n < a.cols; ++n) s += ai[n] * bj[n];
      c(i, j) = s / d;
    }
  }
  return c;
}

}  // namespace coper
