#include "core/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace coper {

namespace {

void check_square(const Matrix& a, const char* who) {
  if (a.rows != a.cols || a.empty())
    fail(ErrorCode::InvalidShape, std::string(who) + ": square non-empty matrix required");
}

// Flip each column so its largest-magnitude entry is positive. Removes the
// sign ambiguity of eigenvectors so repeated runs emit identical bytes.
void fix_column_signs(Matrix& v) {
  for (std::size_t j = 0; j < v.cols; ++j) {
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < v.rows; ++i) {
      double m = std::fabs(v(i, j));
      if (m > best) { best = m; arg = i; }
    }
    if (v(arg, j) < 0.0)
      for (std::size_t i = 0; i < v.rows; ++i) v(i, j) = -v(i, j);
  }
}

}  // namespace

EigenDecomposition sym_eig(const Matrix& input) {
  check_square(input, "sym_eig");
  const std::size_t n = input.rows;

  double scale = std::max(1.0, max_abs(input));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::fabs(input(i, j) - input(j, i)) > 1e-9 * scale)
        fail(ErrorCode::NotSymmetric, "sym_eig: input is not symmetric");

  // Symmetrize exactly so roundoff asymmetry cannot drift the sweeps.
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (input(i, j) + input(j, i));

  Matrix v = Matrix::identity(n);

  auto off_norm = [&]() {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += a(i, j) * a(i, j);
    return std::sqrt(2.0 * s);
  };

  const double target = 1e-14 * std::max(1.0, frobenius_norm(a));
  const int max_sweeps = 64;
  int sweep = 0;
  while (off_norm() > target) {
    if (++sweep > max_sweeps)
      fail(ErrorCode::EigenFailure, "sym_eig: Jacobi sweeps did not converge");
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double apq = a(p, q);
        if (std::fabs(apq) <= 1e-300) continue;
        double theta = 0.5 * (a(q, q) - a(p, p)) / apq;
        double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;

        for (std::size_t k = 0; k < n; ++k) {
          double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  EigenDecomposition out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = a(order[j], order[j]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
  }
  fix_column_signs(out.vectors);
  return out;
}

namespace {

Matrix eigen_transform(const Matrix& a, double ridge, double (*f)(double),
                       ErrorCode on_bad, const char* what, double bad_below) {
  check_square(a, what);
  Matrix shifted = a;
  add_diagonal(shifted, ridge);
  EigenDecomposition e = sym_eig(shifted);
  for (double lam : e.values)
    if (lam < bad_below)
      fail(on_bad, std::string(what) + ": eigenvalue " + std::to_string(lam) +
                       " below admissible range");
  const std::size_t n = a.rows;
  Matrix out(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    double g = f(e.values[k]);
    if (g == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      double vik = e.vectors(i, k) * g;
      if (vik == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) out(i, j) += vik * e.vectors(j, k);
    }
  }
  return out;
}

double inv_sqrt_scalar(double lam) {
  return lam > 1e-300 ? 1.0 / std::sqrt(std::max(lam, 0.0)) : 0.0;
}

double inv_scalar(double lam) { return lam != 0.0 ? 1.0 / lam : 0.0; }

}  // namespace

Matrix inv_sqrt(const Matrix& a, double ridge) {
  return eigen_transform(a, ridge, inv_sqrt_scalar, ErrorCode::NotPsd, "inv_sqrt", -1e-8);
}

Matrix sym_inverse(const Matrix& a, double ridge) {
  check_square(a, "sym_inverse");
  Matrix shifted = a;
  add_diagonal(shifted, ridge);
  EigenDecomposition e = sym_eig(shifted);
  double lam_max = 0.0;
  for (double lam : e.values) lam_max = std::max(lam_max, std::fabs(lam));
  for (double lam : e.values)
    if (std::fabs(lam) <= 1e-12 * std::max(1.0, lam_max))
      fail(ErrorCode::SingularCovariance, "sym_inverse: matrix is singular");
  const std::size_t n = a.rows;
  Matrix out(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    double g = inv_scalar(e.values[k]);
    for (std::size_t i = 0; i < n; ++i) {
      double vik = e.vectors(i, k) * g;
      for (std::size_t j = 0; j < n; ++j) out(i, j) += vik * e.vectors(j, k);
    }
  }
  return out;
}

PcaResult pca(const Matrix& x, std::size_t target_dim) {
  if (x.empty()) fail(ErrorCode::InvalidShape, "pca: empty matrix");
  if (target_dim == 0 || target_dim > std::min(x.rows, x.cols))
    fail(ErrorCode::InvalidShape, "pca: target_dim out of range");
  PcaResult r;
  r.means = row_means(x);
  Matrix xc = center_rows(x);
  Matrix c = covariance(xc, xc, x.cols > 1 ? CovDivisor::NMinusOne : CovDivisor::N);
  EigenDecomposition e = sym_eig(c);
  r.projection = Matrix(target_dim, x.rows);
  r.component_variances.resize(target_dim);
  for (std::size_t k = 0; k < target_dim; ++k) {
    r.component_variances[k] = e.values[k];
    for (std::size_t i = 0; i < x.rows; ++i) r.projection(k, i) = e.vectors(i, k);
  }
  r.embedded = matmul(r.projection, xc);
  return r;
}

double spectral_norm(const Matrix& a) {
  if (a.empty()) return 0.0;
  // sqrt of the top eigenvalue of the smaller Gram matrix
  Matrix g;
  if (a.rows <= a.cols) {
    g = Matrix(a.rows, a.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
      for (std::size_t j = i; j < a.rows; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < a.cols; ++k) s += a(i, k) * a(j, k);
        g(i, j) = g(j, i) = s;
      }
  } else {
    g = Matrix(a.cols, a.cols);
    for (std::size_t i = 0; i < a.cols; ++i)
      for (std::size_t j = i; j < a.cols; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < a.rows; ++k) s += a(k, i) * a(k, j);
        g(i, j) = g(j, i) = s;
      }
  }
  EigenDecomposition e = sym_eig(g);
  return std::sqrt(std::max(0.0, e.values.front()));
}

std::vector<std::size_t> optimal_assignment(const Matrix& cost) {
  if (cost.rows != cost.cols || cost.empty())
    fail(ErrorCode::InvalidShape, "optimal_assignment: square matrix required");
  if (!all_finite(cost))
    fail(ErrorCode::InvalidParameter, "optimal_assignment: non-finite cost");
  const std::size_t n = cost.rows;
  const double inf = std::numeric_limits<double>::infinity();

  // Potential-based shortest augmenting paths (1-indexed internals).
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      std::size_t i0 = p[j0], j1 = 0;
      double delta = inf;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) { minv[j] = cur; way[j] = j0; }
        if (minv[j] < delta) { delta = minv[j]; j1 = j; }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) { u[p[j]] += delta; v[j] -= delta; }
        else minv[j] -= delta;
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::size_t> result(n, 0);
  for (std::size_t j = 1; j <= n; ++j)
    if (p[j] != 0) result[p[j] - 1] = j - 1;
  return result;
}

double subspace_alignment(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows || a.cols != b.cols || a.empty())
    fail(ErrorCode::InvalidShape, "subspace_alignment: matching non-empty shapes required");

  auto orthonormalize = [](const Matrix& m) {
    Matrix q = m;
    for (std::size_t j = 0; j < q.cols; ++j) {
      for (std::size_t prev = 0; prev < j; ++prev) {
        double dot = 0.0;
        for (std::size_t i = 0; i < q.rows; ++i) dot += q(i, j) * q(i, prev);
        for (std::size_t i = 0; i < q.rows; ++i) q(i, j) -= dot * q(i, prev);
      }
      double nrm = 0.0;
      for (std::size_t i = 0; i < q.rows; ++i) nrm += q(i, j) * q(i, j);
      nrm = std::sqrt(nrm);
      if (nrm < 1e-12)
        fail(ErrorCode::InvalidParameter, "subspace_alignment: rank-deficient basis");
      for (std::size_t i = 0; i < q.rows; ++i) q(i, j) /= nrm;
    }
    return q;
  };

  Matrix qa = orthonormalize(a);
  Matrix qb = orthonormalize(b);
  Matrix m = matmul(transpose(qa), qb);
  EigenDecomposition e = sym_eig(matmul(transpose(m), m));
  double sum = 0.0;
  for (double lam : e.values) sum += std::sqrt(std::max(0.0, std::min(lam, 1.0)));
  return sum / static_cast<double>(e.values.size());
}

}  // namespace coper
