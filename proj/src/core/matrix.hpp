#ifndef COPER_CORE_MATRIX_HPP
#define COPER_CORE_MATRIX_HPP

#include <cstddef>
#include <vector>

#include "core/common.hpp"

namespace coper {

// Dense real matrix, row-major. Views are stored features x samples
// (one column per sample) throughout the library.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  bool empty() const { return rows == 0 || cols == 0; }

  static Matrix identity(std::size_t n);
};

Matrix transpose(const Matrix& a);
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);

// a += s * b
void add_scaled(Matrix& a, double s, const Matrix& b);
// a += s * I
void add_diagonal(Matrix& a, double s);

double trace(const Matrix& a);
double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);
bool all_finite(const Matrix& a);

Matrix hcat(const Matrix& a, const Matrix& b);
Matrix take_columns(const Matrix& a, const std::vector<std::size_t>& idx);

std::vector<double> row_means(const Matrix& a);

// Subtract per-row means (centering along the sample axis).
Matrix center_rows(const Matrix& x);

enum class CovDivisor { NMinusOne, N };

// C[i][j] = sum_n a[i][n] * b[j][n] / divisor. Inputs are expected centered;
// no mean is subtracted here.
Matrix covariance(const Matrix& a, const Matrix& b, CovDivisor divisor);

}  // namespace coper

#endif
