#ifndef COPER_CORE_NEURAL_HPP
#define COPER_CORE_NEURAL_HPP

#include <cstdint>
#include <vector>

#include "core/dataset.hpp"
#include "core/matrix.hpp"
#include "core/permute.hpp"
#include "core/pseudolabel.hpp"

namespace coper {

struct MlpLayer {
  Matrix weight;            // out x in
  std::vector<double> bias; // out
};

// Fully connected net, rectifier on hidden layers, linear output. An empty
// layer list is the identity.
struct MlpNetwork {
  std::vector<MlpLayer> layers;
  static MlpNetwork create(const std::vector<std::size_t>& dims, std::uint64_t seed);
  std::size_t output_dim(std::size_t input_dim) const {
    return layers.empty() ? input_dim : layers.back().weight.rows;
  }
};

struct MlpActivations {
  std::vector<Matrix> post;  // post[0] = input, post[i] = output of layer i
};

MlpActivations mlp_forward(const MlpNetwork& net, const Matrix& x);

struct MlpGradients {
  std::vector<MlpLayer> layers;
  static MlpGradients zeros_like(const MlpNetwork& net);
};

// Reverse-mode pass; accumulates parameter gradients, returns dL/dinput.
Matrix mlp_backward(const MlpNetwork& net, const MlpActivations& acts,
                    const Matrix& upstream, MlpGradients& grads);

// Column-wise softmax.
Matrix softmax_columns(const Matrix& logits);

// -sum_i sum_k y_ik log(p_ik + eps) with eps = 1e-12, mean over rows
// (samples as rows, row-stochastic both sides). Gradient w.r.t. p is written
// to grad_rows when non-null.
double cross_entropy(const Matrix& p_rows, const Matrix& targets_rows,
                     Matrix* grad_rows = nullptr);

// sum_v weights[v] * embeddings[v]
Matrix fuse(const std::vector<Matrix>& embeddings, const std::vector<double>& weights);

struct TrainConfig {
  int epochs = 200;
  int pseudo_start = -1;  // epoch to start pseudo-labeling; -1: 10% of epochs
  int perm_start = -1;    // epoch to add permutations; -1: 15% of epochs
  int batch_size = 128;
  double learning_rate = 1e-4;
  double ridge = 1e-4;
  double lambda = 0.5;        // cosine threshold
  int lambda_ramp_epochs = 0; // ramp lambda up from 0 over this many epochs
  int top_b = 0;              // 0: ceil(batch_size / k)
  int perm_rounds_per_batch = 1;
  double corr_weight = 1.0;
  double ce_weight = 1.0;
  double mse_weight = 1.0;
  bool use_decoders = true;
  bool use_permutations = true;
  bool use_agreement = true;
  bool linear_encoder = false;
  std::vector<std::size_t> encoder_hidden = {32};
  std::size_t embed_dim = 8;
  std::vector<std::size_t> head_hidden = {32};
  std::uint64_t seed = 0;

  int resolved_pseudo_start() const;
  int resolved_perm_start() const;
  // cosine threshold in force at a given epoch (the single ramp hook)
  double effective_lambda(int epoch) const;
};

struct CoperModel {
  std::vector<MlpNetwork> encoders;
  std::vector<MlpNetwork> decoders;  // empty when disabled
  MlpNetwork head;                   // K logits; softmax applied on use
  std::vector<double> fusion_weights;
  TrainConfig config;
  int k = 0;

  static CoperModel create(const std::vector<std::size_t>& view_dims, int k,
                           const TrainConfig& cfg);
};

struct CoperGradients {
  std::vector<MlpGradients> encoders;
  std::vector<MlpGradients> decoders;
  MlpGradients head;
  std::vector<double> fusion;
  static CoperGradients zeros_like(const CoperModel& model);
};

// Frozen per-batch self-supervision inputs; gradients never flow into these.
struct BatchSupervision {
  // [view][batch column] -> soft target (empty = unlabeled)
  std::vector<std::vector<std::vector<double>>> view_targets;
  std::vector<std::vector<double>> fused_targets;  // [batch column]
  // [round][view]; the permuted correlation loss is averaged over rounds
  std::vector<std::vector<PermutationPlan>> perm_plan_rounds;
  bool has_ce = false;
  bool has_perm = false;
};

struct BatchLosses {
  double corr = 0.0;  // weighted contributions, so total() matches gradients
  double ce = 0.0;
  double mse = 0.0;
  double perm = 0.0;
  double total() const { return corr + ce + mse + perm; }
};

// Loss and gradients of the full objective on one batch. Shared by the
// training loop and the finite-difference checks.
BatchLosses coper_batch_gradients(const CoperModel& model,
                                  const std::vector<Matrix>& batch_views,
                                  const BatchSupervision& sup, CoperGradients& grads);

struct TrainLogRow {
  int epoch = 0;
  double corr = 0.0, ce = 0.0, mse = 0.0, perm = 0.0;
  double silhouette = 0.0;
  double acc = -1.0, ari = -1.0, nmi = -1.0;  // -1 when no labels
};

struct TrainResult {
  CoperModel model;
  std::vector<int> assignment;
  std::vector<TrainLogRow> log;
};

TrainResult train_coper(const MultiViewDataset& ds, const TrainConfig& cfg);

}  // namespace coper

#endif
