#include "core/permute.hpp"

#include <numeric>

#include "core/rng.hpp"

namespace coper {

PermutationPlan sample_plan(const std::vector<int>& labels, int k, int round,
                            std::uint64_t seed) {
  if (k < 1) fail(ErrorCode::InvalidLabels, "sample_plan: k >= 1 required");
  for (int lab : labels)
    if (lab >= k)
      fail(ErrorCode::InvalidLabels, "sample_plan: label out of range");

  PermutationPlan plan;
  plan.round = round;
  plan.seed = seed;
  plan.clusters.resize(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] >= 0)
      plan.clusters[static_cast<std::size_t>(labels[i])].members.push_back(i);

  Rng root = Rng(seed).derive(0x706c616eULL + static_cast<std::uint64_t>(round));
  for (std::size_t c = 0; c < plan.clusters.size(); ++c) {
    auto& cl = plan.clusters[c];
    cl.perm.resize(cl.members.size());
    std::iota(cl.perm.begin(), cl.perm.end(), std::size_t{0});
    Rng rng = root.derive(c);
    // Fisher-Yates
    for (std::size_t i = cl.perm.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(rng.below(i));
      std::swap(cl.perm[i - 1], cl.perm[j]);
    }
  }
  return plan;
}

Matrix apply_plan_to_matrix(const Matrix& x, const PermutationPlan& plan) {
  Matrix out = x;
  for (const auto& cl : plan.clusters) {
    for (std::size_t j = 0; j < cl.members.size(); ++j) {
      std::size_t dst = cl.members[j];
      std::size_t src = cl.members[cl.perm[j]];
      if (dst >= x.cols || src >= x.cols)
        fail(ErrorCode::InvalidPlan, "apply_plan: index out of range");
      if (dst == src) continue;
      for (std::size_t r = 0; r < x.rows; ++r) out(r, dst) = x(r, src);
    }
  }
  return out;
}

MultiViewDataset apply_plan(const MultiViewDataset& ds, const PermutationPlan& plan,
                            const std::vector<std::size_t>& views_to_permute) {
  MultiViewDataset out = ds;
  for (std::size_t v : views_to_permute) {
    if (v >= ds.n_views()) fail(ErrorCode::InvalidPlan, "apply_plan: view index out of range");
    out.views[v] = apply_plan_to_matrix(ds.views[v], plan);
  }
  return out;
}

CcaModel permuted_cca(const MultiViewDataset& ds, const std::vector<int>& labels, int k,
                      int rounds, std::size_t dim, double ridge, std::uint64_t seed) {
  if (ds.n_views() != 2)
    fail(ErrorCode::InvalidShape, "permuted_cca: exactly two views required");
  if (labels.size() != ds.n_samples())
    fail(ErrorCode::InvalidLabels, "permuted_cca: labels must match sample count");

  Matrix x1 = ds.views[0];
  Matrix x2 = ds.views[1];
  for (int l = 1; l <= rounds; ++l) {
    PermutationPlan plan = sample_plan(labels, k, l, seed);
    // permute one side per round, alternating
    if (l % 2 == 1) {
      x1 = hcat(x1, ds.views[0]);
      x2 = hcat(x2, apply_plan_to_matrix(ds.views[1], plan));
    } else {
      x1 = hcat(x1, apply_plan_to_matrix(ds.views[0], plan));
      x2 = hcat(x2, ds.views[1]);
    }
  }
  return fit_cca(x1, x2, dim, ridge);
}

}  // namespace coper
