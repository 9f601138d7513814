#include "core/perturb.hpp"

#include <cmath>

#include "core/linalg.hpp"

namespace coper {

namespace {

struct ClassSets {
  // all on centered data, indices into columns of theta
  std::vector<std::vector<std::size_t>> true_members;    // by true class
  std::vector<std::vector<std::size_t>> pseudo_members;  // N-hat_k
  std::vector<std::vector<std::size_t>> excluded;        // N-bar_k: true k, not pseudo k
  std::vector<std::vector<std::size_t>> wrong;           // N-tilde_k: pseudo k, true != k
  std::vector<std::vector<std::size_t>> right;           // N-ddot_k: pseudo k, true == k
  std::vector<std::vector<double>> true_means;           // mu_k
  std::vector<std::vector<double>> pseudo_means;         // mu-hat_k (fallback mu_k if empty)
};

ClassSets build_sets(const Matrix& theta, const std::vector<int>& true_labels,
                     const std::vector<int>& pseudo_labels, int k) {
  if (theta.cols != true_labels.size() || theta.cols != pseudo_labels.size())
    fail(ErrorCode::InvalidLabels, "error_terms: labels length mismatch");
  const std::size_t kk = static_cast<std::size_t>(k);
  ClassSets s;
  s.true_members.resize(kk);
  s.pseudo_members.resize(kk);
  s.excluded.resize(kk);
  s.wrong.resize(kk);
  s.right.resize(kk);
  for (std::size_t i = 0; i < theta.cols; ++i) {
    int t = true_labels[i], p = pseudo_labels[i];
    if (t < 0 || t >= k) fail(ErrorCode::InvalidLabels, "error_terms: true label out of range");
    if (p >= k) fail(ErrorCode::InvalidLabels, "error_terms: pseudo label out of range");
    s.true_members[static_cast<std::size_t>(t)].push_back(i);
    if (p >= 0) {
      s.pseudo_members[static_cast<std::size_t>(p)].push_back(i);
      if (p == t) s.right[static_cast<std::size_t>(p)].push_back(i);
      else s.wrong[static_cast<std::size_t>(p)].push_back(i);
    }
    if (p != t) s.excluded[static_cast<std::size_t>(t)].push_back(i);
  }
  auto mean_of = [&](const std::vector<std::size_t>& idx) {
    std::vector<double> m(theta.rows, 0.0);
    for (std::size_t i : idx)
      for (std::size_t d = 0; d < theta.rows; ++d) m[d] += theta(d, i);
    if (!idx.empty())
      for (double& v : m) v /= static_cast<double>(idx.size());
    return m;
  };
  for (std::size_t c = 0; c < kk; ++c) {
    if (s.true_members[c].empty())
      fail(ErrorCode::InvalidLabels, "error_terms: empty true class " + std::to_string(c));
    s.true_means.push_back(mean_of(s.true_members[c]));
    s.pseudo_means.push_back(s.pseudo_members[c].empty() ? s.true_means.back()
                                                         : mean_of(s.pseudo_members[c]));
  }
  return s;
}

void accumulate_outer(Matrix& acc, const Matrix& theta, std::size_t i,
                      const std::vector<double>& mi, std::size_t j,
                      const std::vector<double>& mj, double w) {
  for (std::size_t r = 0; r < theta.rows; ++r) {
    double a = theta(r, i) - mi[r];
    if (a == 0.0) continue;
    for (std::size_t c = 0; c < theta.rows; ++c)
      acc(r, c) += w * a * (theta(c, j) - mj[c]);
  }
}

}  // namespace

ErrorTerms error_terms(const Matrix& theta_in, const std::vector<int>& true_labels,
                       const std::vector<int>& pseudo_labels, int k) {
  if (theta_in.empty()) fail(ErrorCode::InvalidShape, "error_terms: empty data");
  Matrix theta = center_rows(theta_in);
  ClassSets s = build_sets(theta, true_labels, pseudo_labels, k);
  const std::size_t d = theta.rows;
  const double n = static_cast<double>(theta.cols);

  ErrorTerms et{Matrix(d, d), Matrix(d, d), Matrix(d, d)};

  // E1: excluded within-class mass, normalized by the total excluded count
  std::size_t total_excluded = 0;
  for (const auto& ex : s.excluded) total_excluded += ex.size();
  if (total_excluded > 0) {
    double w = -1.0 / static_cast<double>(total_excluded);
    for (int c = 0; c < k; ++c) {
      const auto& mu_hat = s.pseudo_means[static_cast<std::size_t>(c)];
      for (std::size_t i : s.excluded[static_cast<std::size_t>(c)])
        accumulate_outer(et.e1, theta, i, mu_hat, i, mu_hat, w);
    }
  }

  // E2: cross products between correctly and wrongly included samples,
  // normalized by sum_k |N-tilde_k| * |N-ddot_k|
  double pair_count = 0.0;
  for (int c = 0; c < k; ++c)
    pair_count += static_cast<double>(s.wrong[static_cast<std::size_t>(c)].size()) *
                  static_cast<double>(s.right[static_cast<std::size_t>(c)].size());
  if (pair_count > 0.0) {
    double w = 1.0 / pair_count;
    for (int c = 0; c < k; ++c) {
      const auto& mu_hat_c = s.pseudo_means[static_cast<std::size_t>(c)];
      for (std::size_t i : s.right[static_cast<std::size_t>(c)]) {
        for (std::size_t j : s.wrong[static_cast<std::size_t>(c)]) {
          int q = true_labels[j];  // true class of the wrongly included sample
          const auto& mu_hat_q = s.pseudo_means[static_cast<std::size_t>(q)];
          accumulate_outer(et.e2, theta, i, mu_hat_c, j, mu_hat_q, w);
        }
      }
    }
  }

  // E3: -(N-hat_k / N) * dmu_k dmu_k^T summed over classes
  for (int c = 0; c < k; ++c) {
    std::size_t cc = static_cast<std::size_t>(c);
    double w = -static_cast<double>(s.pseudo_members[cc].size()) / n;
    if (w == 0.0) continue;
    for (std::size_t r = 0; r < d; ++r) {
      double dr = s.true_means[cc][r] - s.pseudo_means[cc][r];
      for (std::size_t col = 0; col < d; ++col) {
        double dc = s.true_means[cc][col] - s.pseudo_means[cc][col];
        et.e3(r, col) += w * dr * dc;
      }
    }
  }
  return et;
}

Matrix perturbation_matrix(const Matrix& c, const Matrix& c_e, const Matrix& e,
                           const Matrix& e3, double ridge) {
  if (c.rows != c.cols || c.rows != c_e.rows || c.rows != e.rows || c.rows != e3.rows)
    fail(ErrorCode::InvalidShape, "perturbation_matrix: shape mismatch");
  Matrix cinv = sym_inverse(c, ridge);
  Matrix cinv_e = matmul(cinv, e);
  Matrix d = cinv_e;                                       //  C^{-1}E
  add_scaled(d, -1.0, matmul(cinv_e, matmul(cinv, c_e)));  // -C^{-1}E C^{-1}C_e
  add_scaled(d, -1.0, matmul(cinv, e3));                   // -C^{-1}E3
  add_scaled(d, 1.0, matmul(cinv_e, matmul(cinv, e3)));    // +C^{-1}E C^{-1}E3
  return d;
}

namespace {

// Spectrum of (C + ridge I)^{-1} C_a via the symmetric similar form.
std::vector<double> lda_operator_spectrum(const Matrix& c, const Matrix& c_a, double ridge) {
  Matrix w = inv_sqrt(c, ridge);
  return sym_eig(matmul(matmul(w, c_a), w)).values;
}

}  // namespace

PerturbationReport bound_check(const Matrix& theta_in, const std::vector<int>& true_labels,
                               const std::vector<int>& pseudo_labels, int k, double ridge) {
  if (theta_in.empty()) fail(ErrorCode::InvalidShape, "bound_check: empty data");
  Matrix theta = center_rows(theta_in);
  ClassSets s = build_sets(theta, true_labels, pseudo_labels, k);
  const std::size_t d = theta.rows;
  const double n = static_cast<double>(theta.cols);

  // true-label scatters on the full (centered) data; C = C_e + C_a
  Matrix c_e(d, d), c_a(d, d);
  for (int c = 0; c < k; ++c) {
    std::size_t cc = static_cast<std::size_t>(c);
    const auto& mu = s.true_means[cc];
    for (std::size_t i : s.true_members[cc])
      accumulate_outer(c_e, theta, i, mu, i, mu, 1.0 / n);
    double w = static_cast<double>(s.true_members[cc].size()) / n;
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t col = 0; col < d; ++col) c_a(r, col) += w * mu[r] * mu[col];
  }
  Matrix c_total = c_e + c_a;

  // pseudo-label scatters over the labeled subset, same coordinate frame
  std::size_t n_hat_total = 0;
  for (const auto& m : s.pseudo_members) n_hat_total += m.size();
  if (n_hat_total == 0)
    fail(ErrorCode::InvalidLabels, "bound_check: no pseudo-labeled samples");
  Matrix ce_hat(d, d), ca_hat(d, d);
  for (int c = 0; c < k; ++c) {
    std::size_t cc = static_cast<std::size_t>(c);
    const auto& mu_hat = s.pseudo_means[cc];
    for (std::size_t i : s.pseudo_members[cc])
      accumulate_outer(ce_hat, theta, i, mu_hat, i, mu_hat,
                       1.0 / static_cast<double>(n_hat_total));
    double w = static_cast<double>(s.pseudo_members[cc].size()) /
               static_cast<double>(n_hat_total);
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t col = 0; col < d; ++col)
        ca_hat(r, col) += w * mu_hat[r] * mu_hat[col];
  }
  Matrix c_hat = ce_hat + ca_hat;

  PerturbationReport rep;
  ErrorTerms et = error_terms(theta_in, true_labels, pseudo_labels, k);
  rep.e1 = et.e1;
  rep.e2 = et.e2;
  rep.e3 = et.e3;
  rep.e = et.e1 + et.e2;
  add_scaled(rep.e, 1.0, et.e3);
  rep.d = perturbation_matrix(c_total, c_e, rep.e, et.e3, ridge);
  rep.spectral_bound = spectral_norm(rep.d);

  rep.true_eigvals = lda_operator_spectrum(c_total, c_a, ridge);
  rep.perturbed_eigvals = lda_operator_spectrum(c_hat, ca_hat, ridge);
  rep.max_gap = 0.0;
  for (std::size_t i = 0; i < rep.true_eigvals.size(); ++i)
    rep.max_gap = std::max(rep.max_gap,
                           std::fabs(rep.perturbed_eigvals[i] - rep.true_eigvals[i]));
  rep.bound_satisfied = rep.max_gap <= rep.spectral_bound * (1.0 + 1e-6) + 1e-12;
  return rep;
}

}  // namespace coper
