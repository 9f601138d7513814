#ifndef COPER_CORE_PERMUTE_HPP
#define COPER_CORE_PERMUTE_HPP

#include <cstdint>
#include <vector>

#include "core/cca.hpp"
#include "core/dataset.hpp"

namespace coper {

// Within-cluster permutation: one uniform permutation per cluster over that
// cluster's member indices. Samples labeled -1 do not participate and keep
// their original position.
struct PermutationPlan {
  struct ClusterPerm {
    std::vector<std::size_t> members;  // ascending sample indices
    std::vector<std::size_t> perm;     // slot j receives members[perm[j]]
  };
  std::vector<ClusterPerm> clusters;
  int round = 0;
  std::uint64_t seed = 0;
};

PermutationPlan sample_plan(const std::vector<int>& labels, int k, int round,
                            std::uint64_t seed);

// Reorder columns within clusters for the selected views; other views are
// untouched. Labels are carried over unchanged.
MultiViewDataset apply_plan(const MultiViewDataset& ds, const PermutationPlan& plan,
                            const std::vector<std::size_t>& views_to_permute);

// Column permutation of a single view matrix under the plan.
Matrix apply_plan_to_matrix(const Matrix& x, const PermutationPlan& plan);

// CCA on the column-wise stack of the original pairing plus `rounds` permuted
// pairings. Each round permutes exactly one side, alternating sides.
CcaModel permuted_cca(const MultiViewDataset& ds, const std::vector<int>& labels, int k,
                      int rounds, std::size_t dim, double ridge, std::uint64_t seed);

}  // namespace coper

#endif
