#ifndef COPER_TESTS_TEST_UTIL_HPP
#define COPER_TESTS_TEST_UTIL_HPP

#include <cmath>

#include "core/matrix.hpp"
#include "core/rng.hpp"

namespace coper::testutil {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (auto& v : m.data) v = scale * rng.normal();
  return m;
}

inline Matrix random_symmetric(std::size_t n, Rng& rng) {
  Matrix a = random_matrix(n, n, rng);
  Matrix s(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) s(i, j) = 0.5 * (a(i, j) + a(j, i));
  return s;
}

inline Matrix random_psd(std::size_t n, Rng& rng) {
  Matrix a = random_matrix(n, n + 2, rng);
  Matrix p(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols; ++k) s += a(i, k) * a(j, k);
      p(i, j) = s / static_cast<double>(a.cols);
    }
  return p;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i)
    m = std::max(m, std::fabs(a.data[i] - b.data[i]));
  return m;
}

}  // namespace coper::testutil

#endif
