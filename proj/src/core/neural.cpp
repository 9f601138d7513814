#include "core/neural.hpp"

#include <algorithm>
#include <cmath>

#include "core/cca.hpp"
#include "core/metrics.hpp"
#include "core/rng.hpp"

namespace coper {

namespace {
constexpr double kLogEps = 1e-12;
}

MlpNetwork MlpNetwork::create(const std::vector<std::size_t>& dims, std::uint64_t seed) {
  MlpNetwork net;
  if (dims.size() < 2) return net;  // zero-depth = identity
  Rng root(seed);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    MlpLayer layer;
    layer.weight = Matrix(dims[l + 1], dims[l]);
    layer.bias.assign(dims[l + 1], 0.0);
    // symmetric uniform fan-in scaling
    double bound = 1.0 / std::sqrt(static_cast<double>(dims[l]));
    Rng rng = root.derive(l);
    for (auto& w : layer.weight.data) w = bound * (2.0 * rng.uniform() - 1.0);
    for (auto& b : layer.bias) b = bound * (2.0 * rng.uniform() - 1.0);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

MlpActivations mlp_forward(const MlpNetwork& net, const Matrix& x) {
  MlpActivations acts;
  acts.post.push_back(x);
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const MlpLayer& layer = net.layers[l];
    const Matrix& in = acts.post.back();
    if (in.rows != layer.weight.cols)
      fail(ErrorCode::InvalidShape, "mlp_forward: input dim does not match layer");
    Matrix z = matmul(layer.weight, in);
    for (std::size_t i = 0; i < z.rows; ++i)
      for (std::size_t j = 0; j < z.cols; ++j) z(i, j) += layer.bias[i];
    if (l + 1 < net.layers.size())  // rectifier on hidden layers only
      for (auto& v : z.data) v = v > 0.0 ? v : 0.0;
    acts.post.push_back(std::move(z));
  }
  return acts;
}

MlpGradients MlpGradients::zeros_like(const MlpNetwork& net) {
  MlpGradients g;
  for (const auto& layer : net.layers) {
    MlpLayer zero;
    zero.weight = Matrix(layer.weight.rows, layer.weight.cols);
    zero.bias.assign(layer.bias.size(), 0.0);
    g.layers.push_back(std::move(zero));
  }
  return g;
}

Matrix mlp_backward(const MlpNetwork& net, const MlpActivations& acts,
                    const Matrix& upstream, MlpGradients& grads) {
  if (acts.post.size() != net.layers.size() + 1 || grads.layers.size() != net.layers.size())
    fail(ErrorCode::InvalidState, "mlp_backward: activation cache does not match network");
  Matrix g = upstream;
  for (std::size_t li = net.layers.size(); li-- > 0;) {
    const MlpLayer& layer = net.layers[li];
    const Matrix& out = acts.post[li + 1];
    const Matrix& in = acts.post[li];
    if (g.rows != out.rows || g.cols != out.cols)
      fail(ErrorCode::InvalidShape, "mlp_backward: upstream shape mismatch");
    // rectifier mask for hidden layers (post > 0 iff pre > 0)
    if (li + 1 < net.layers.size())
      for (std::size_t i = 0; i < g.data.size(); ++i)
        if (out.data[i] <= 0.0) g.data[i] = 0.0;
    MlpLayer& lg = grads.layers[li];
    // dW += g * in^T, db += row sums
    for (std::size_t i = 0; i < g.rows; ++i) {
      for (std::size_t j = 0; j < g.cols; ++j) {
        double gij = g(i, j);
        if (gij == 0.0) continue;
        lg.bias[i] += gij;
        for (std::size_t d = 0; d < in.rows; ++d) lg.weight(i, d) += gij * in(d, j);
      }
    }
    g = matmul(transpose(layer.weight), g);
  }
  return g;
}

Matrix softmax_columns(const Matrix& logits) {
  Matrix p = logits;
  for (std::size_t j = 0; j < p.cols; ++j) {
    double mx = p(0, j);
    for (std::size_t i = 1; i < p.rows; ++i) mx = std::max(mx, p(i, j));
    double total = 0.0;
    for (std::size_t i = 0; i < p.rows; ++i) {
      double e = std::exp(p(i, j) - mx);
      p(i, j) = e;
      total += e;
    }
    for (std::size_t i = 0; i < p.rows; ++i) p(i, j) /= total;
  }
  return p;
}

double cross_entropy(const Matrix& p_rows, const Matrix& targets_rows, Matrix* grad_rows) {
  if (p_rows.rows != targets_rows.rows || p_rows.cols != targets_rows.cols || p_rows.empty())
    fail(ErrorCode::InvalidShape, "cross_entropy: shape mismatch");
  double loss = 0.0;
  if (grad_rows) *grad_rows = Matrix(p_rows.rows, p_rows.cols);
  double inv_n = 1.0 / static_cast<double>(p_rows.rows);
  for (std::size_t i = 0; i < p_rows.rows; ++i)
    for (std::size_t k = 0; k < p_rows.cols; ++k) {
      double y = targets_rows(i, k);
      if (y == 0.0) continue;
      loss -= y * std::log(p_rows(i, k) + kLogEps) * inv_n;
      if (grad_rows) (*grad_rows)(i, k) = -y / (p_rows(i, k) + kLogEps) * inv_n;
    }
  return loss;
}

Matrix fuse(const std::vector<Matrix>& embeddings, const std::vector<double>& weights) {
  if (embeddings.empty() || embeddings.size() != weights.size())
    fail(ErrorCode::InvalidShape, "fuse: one weight per embedding required");
  Matrix out(embeddings.front().rows, embeddings.front().cols);
  for (std::size_t v = 0; v < embeddings.size(); ++v) {
    if (embeddings[v].rows != out.rows || embeddings[v].cols != out.cols)
      fail(ErrorCode::InvalidShape, "fuse: embedding shapes differ");
    add_scaled(out, weights[v], embeddings[v]);
  }
  return out;
}

// Auto schedule: a quarter of the run on correlation(+mse) only, permutations
// joining at 3/8. Earlier self-labeling (a literal 10%/15% rescale of the
// full-scale 100/150/1000 recipe) proved unstable at desk scale: the first
// pseudo-labels then come from immature embeddings and can lock in a merged
// pair of clusters.
int TrainConfig::resolved_pseudo_start() const {
  if (pseudo_start >= 0) return pseudo_start;
  return static_cast<int>(std::lround(0.25 * epochs));
}

int TrainConfig::resolved_perm_start() const {
  int ps = resolved_pseudo_start();
  int value = perm_start >= 0 ? perm_start : static_cast<int>(std::lround(0.375 * epochs));
  return std::max(value, ps);
}

double TrainConfig::effective_lambda(int epoch) const {
  if (lambda_ramp_epochs <= 0) return lambda;
  int since = epoch - resolved_pseudo_start() + 1;
  if (since <= 0) return 0.0;
  double factor = std::min(1.0, static_cast<double>(since) /
                                    static_cast<double>(lambda_ramp_epochs));
  return lambda * factor;
}

CoperModel CoperModel::create(const std::vector<std::size_t>& view_dims, int k,
                              const TrainConfig& cfg) {
  if (k < 2) fail(ErrorCode::ConfigError, "CoperModel: k >= 2 required");
  CoperModel model;
  model.config = cfg;
  model.k = k;
  Rng root(cfg.seed ^ 0xc09e11ULL);
  for (std::size_t v = 0; v < view_dims.size(); ++v) {
    std::vector<std::size_t> dims;
    dims.push_back(view_dims[v]);
    if (!cfg.linear_encoder)
      for (std::size_t h : cfg.encoder_hidden) dims.push_back(h);
    dims.push_back(cfg.embed_dim);
    model.encoders.push_back(MlpNetwork::create(dims, root.derive(10 + v).next_u64()));
    if (cfg.use_decoders) {
      std::vector<std::size_t> rdims(dims.rbegin(), dims.rend());
      model.decoders.push_back(MlpNetwork::create(rdims, root.derive(40 + v).next_u64()));
    }
  }
  std::vector<std::size_t> head_dims;
  head_dims.push_back(cfg.embed_dim);
  for (std::size_t h : cfg.head_hidden) head_dims.push_back(h);
  head_dims.push_back(static_cast<std::size_t>(k));
  model.head = MlpNetwork::create(head_dims, root.derive(77).next_u64());
  model.fusion_weights.assign(view_dims.size(), 1.0 / static_cast<double>(view_dims.size()));
  return model;
}

CoperGradients CoperGradients::zeros_like(const CoperModel& model) {
  CoperGradients g;
  for (const auto& enc : model.encoders) g.encoders.push_back(MlpGradients::zeros_like(enc));
  for (const auto& dec : model.decoders) g.decoders.push_back(MlpGradients::zeros_like(dec));
  g.head = MlpGradients::zeros_like(model.head);
  g.fusion.assign(model.fusion_weights.size(), 0.0);
  return g;
}

namespace {

// CE on selected columns of a head output; returns loss (mean over selected
// columns) and accumulates dL/dlogits.
double head_cross_entropy(const Matrix& probs, const std::vector<std::vector<double>>& targets,
                          double weight, Matrix& d_logits) {
  std::size_t selected = 0;
  for (const auto& t : targets)
    if (!t.empty()) ++selected;
  if (selected == 0) return 0.0;
  double inv = 1.0 / static_cast<double>(selected);
  double loss = 0.0;
  for (std::size_t j = 0; j < probs.cols; ++j) {
    const auto& y = targets[j];
    if (y.empty()) continue;
    // dL/dp then softmax jacobian, fused per column
    double dot = 0.0;
    std::vector<double> gp(probs.rows, 0.0);
    for (std::size_t i = 0; i < probs.rows; ++i) {
      if (y[i] == 0.0) continue;
      loss -= y[i] * std::log(probs(i, j) + kLogEps) * inv;
      gp[i] = -y[i] / (probs(i, j) + kLogEps) * inv * weight;
    }
    for (std::size_t i = 0; i < probs.rows; ++i) dot += gp[i] * probs(i, j);
    for (std::size_t i = 0; i < probs.rows; ++i)
      d_logits(i, j) += probs(i, j) * (gp[i] - dot);
  }
  return loss;
}

void scatter_plan_gradient(const PermutationPlan& plan, const Matrix& g_permuted,
                           Matrix& g_out) {
  // H~(:, members[j]) = H(:, members[perm[j]]), so gradients flow back the
  // same route
  Matrix g = g_permuted;
  for (const auto& cl : plan.clusters)
    for (std::size_t j = 0; j < cl.members.size(); ++j) {
      std::size_t dst = cl.members[j];
      std::size_t src = cl.members[cl.perm[j]];
      if (dst == src) continue;
      for (std::size_t r = 0; r < g.rows; ++r) {
        g_out(r, src) += g_permuted(r, dst);
        g(r, dst) = 0.0;  // mark consumed
      }
    }
  add_scaled(g_out, 1.0, g);
}

}  // namespace

BatchLosses coper_batch_gradients(const CoperModel& model,
                                  const std::vector<Matrix>& batch_views,
                                  const BatchSupervision& sup, CoperGradients& grads) {
  const std::size_t n_views = model.encoders.size();
  if (batch_views.size() != n_views)
    fail(ErrorCode::InvalidShape, "coper_batch_gradients: view count mismatch");
  const TrainConfig& cfg = model.config;
  BatchLosses losses;

  // encoder forward
  std::vector<MlpActivations> enc_acts;
  std::vector<Matrix> h;
  for (std::size_t v = 0; v < n_views; ++v) {
    enc_acts.push_back(mlp_forward(model.encoders[v], batch_views[v]));
    h.push_back(enc_acts.back().post.back());
  }
  const std::size_t batch = h.front().cols;
  std::vector<Matrix> dh(n_views);
  for (std::size_t v = 0; v < n_views; ++v) dh[v] = Matrix(h[v].rows, h[v].cols);

  // pairwise correlation loss
  if (cfg.corr_weight != 0.0) {
    for (std::size_t v = 0; v < n_views; ++v)
      for (std::size_t w = v + 1; w < n_views; ++w) {
        CorrelationLossGrad g = correlation_loss_gradient(h[v], h[w], cfg.ridge);
        losses.corr += cfg.corr_weight * g.loss;
        add_scaled(dh[v], cfg.corr_weight, g.d_hv);
        add_scaled(dh[w], cfg.corr_weight, g.d_hw);
      }
  }

  // reconstruction
  if (!model.decoders.empty() && cfg.mse_weight != 0.0) {
    for (std::size_t v = 0; v < n_views; ++v) {
      MlpActivations dec_acts = mlp_forward(model.decoders[v], h[v]);
      const Matrix& xhat = dec_acts.post.back();
      Matrix residual = xhat - batch_views[v];
      double norm = 1.0 / (static_cast<double>(batch) * static_cast<double>(n_views));
      double l = 0.0;
      for (double r : residual.data) l += r * r;
      losses.mse += cfg.mse_weight * l * norm;
      Matrix upstream = (2.0 * norm * cfg.mse_weight) * residual;
      Matrix into_h = mlp_backward(model.decoders[v], dec_acts, upstream, grads.decoders[v]);
      add_scaled(dh[v], 1.0, into_h);
    }
  }

  // cross-entropy: per-view heads plus the fused prediction head
  if (sup.has_ce && cfg.ce_weight != 0.0) {
    double share = cfg.ce_weight / static_cast<double>(n_views + 1);
    for (std::size_t v = 0; v < n_views; ++v) {
      MlpActivations head_acts = mlp_forward(model.head, h[v]);
      Matrix probs = softmax_columns(head_acts.post.back());
      Matrix d_logits(probs.rows, probs.cols);
      double l = head_cross_entropy(probs, sup.view_targets[v], share, d_logits);
      losses.ce += share * l;
      Matrix into_h = mlp_backward(model.head, head_acts, d_logits, grads.head);
      add_scaled(dh[v], 1.0, into_h);
    }
    Matrix fused = fuse(h, model.fusion_weights);
    MlpActivations head_acts = mlp_forward(model.head, fused);
    Matrix probs = softmax_columns(head_acts.post.back());
    Matrix d_logits(probs.rows, probs.cols);
    double l = head_cross_entropy(probs, sup.fused_targets, share, d_logits);
    losses.ce += share * l;
    Matrix d_fused = mlp_backward(model.head, head_acts, d_logits, grads.head);
    for (std::size_t v = 0; v < n_views; ++v) {
      add_scaled(dh[v], model.fusion_weights[v], d_fused);
      double dot = 0.0;
      for (std::size_t i = 0; i < d_fused.data.size(); ++i) dot += d_fused.data[i] * h[v].data[i];
      grads.fusion[v] += dot;
    }
  }

  // correlation loss on within-cluster permuted pairings, averaged over the
  // plan rounds of this batch
  if (sup.has_perm && cfg.corr_weight != 0.0 && !sup.perm_plan_rounds.empty()) {
    double share = cfg.corr_weight / static_cast<double>(sup.perm_plan_rounds.size());
    for (const auto& plans : sup.perm_plan_rounds) {
      std::vector<Matrix> hp;
      for (std::size_t v = 0; v < n_views; ++v)
        hp.push_back(apply_plan_to_matrix(h[v], plans[v]));
      for (std::size_t v = 0; v < n_views; ++v)
        for (std::size_t w = v + 1; w < n_views; ++w) {
          CorrelationLossGrad g = correlation_loss_gradient(hp[v], hp[w], cfg.ridge);
          losses.perm += share * g.loss;
          scatter_plan_gradient(plans[v], share * g.d_hv, dh[v]);
          scatter_plan_gradient(plans[w], share * g.d_hw, dh[w]);
        }
    }
  }

  // encoder backward
  for (std::size_t v = 0; v < n_views; ++v)
    mlp_backward(model.encoders[v], enc_acts[v], dh[v], grads.encoders[v]);

  return losses;
}

// ---------------------------------------------------------------------------
// training loop
// ---------------------------------------------------------------------------

namespace {

struct ParamRef {
  double* data;
  double* grad;
  std::size_t n;
};

void collect_net(MlpNetwork& net, MlpGradients& g, std::vector<ParamRef>& out) {
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    out.push_back({net.layers[l].weight.data.data(), g.layers[l].weight.data.data(),
                   net.layers[l].weight.data.size()});
    out.push_back({net.layers[l].bias.data(), g.layers[l].bias.data(),
                   net.layers[l].bias.size()});
  }
}

std::vector<ParamRef> collect_params(CoperModel& model, CoperGradients& grads) {
  std::vector<ParamRef> out;
  for (std::size_t v = 0; v < model.encoders.size(); ++v)
    collect_net(model.encoders[v], grads.encoders[v], out);
  for (std::size_t v = 0; v < model.decoders.size(); ++v)
    collect_net(model.decoders[v], grads.decoders[v], out);
  collect_net(model.head, grads.head, out);
  out.push_back({model.fusion_weights.data(), grads.fusion.data(),
                 model.fusion_weights.size()});
  return out;
}

class Adam {
 public:
  Adam(double lr, std::size_t total) : lr_(lr), m_(total, 0.0), v_(total, 0.0) {}

  void step(const std::vector<ParamRef>& params) {
    ++t_;
    double bc1 = 1.0 - std::pow(0.9, static_cast<double>(t_));
    double bc2 = 1.0 - std::pow(0.999, static_cast<double>(t_));
    std::size_t off = 0;
    for (const auto& p : params) {
      for (std::size_t i = 0; i < p.n; ++i) {
        double g = p.grad[i];
        m_[off + i] = 0.9 * m_[off + i] + 0.1 * g;
        v_[off + i] = 0.999 * v_[off + i] + 0.001 * g * g;
        double mhat = m_[off + i] / bc1;
        double vhat = v_[off + i] / bc2;
        p.data[i] -= lr_ * mhat / (std::sqrt(vhat) + 1e-8);
      }
      off += p.n;
    }
  }

 private:
  double lr_;
  long t_ = 0;
  std::vector<double> m_, v_;
};

struct EpochState {
  PseudoLabelSet pls;
  std::vector<std::vector<double>> fused_targets;  // per sample, empty = none
  std::vector<int> perm_labels;                    // -1 = out
  bool active = false;
};

std::vector<double> normalized_mean_target(const PseudoLabelSet& pls, std::size_t i) {
  std::vector<double> t;
  std::size_t hits = 0;
  for (const auto& view : pls.per_view) {
    if (view[i].empty()) continue;
    if (t.empty()) t.assign(view[i].size(), 0.0);
    for (std::size_t k = 0; k < view[i].size(); ++k) t[k] += view[i][k];
    ++hits;
  }
  if (hits == 0) return t;
  double sum = 0.0;
  for (double v : t) sum += v;
  if (sum > 1e-12)
    for (double& v : t) v /= sum;
  return t;
}

}  // namespace

TrainResult train_coper(const MultiViewDataset& ds, const TrainConfig& cfg) {
  if (ds.views.empty()) fail(ErrorCode::ConfigError, "train_coper: dataset has no views");
  int k = ds.k;
  if (k < 2) fail(ErrorCode::ConfigError, "train_coper: dataset does not declare k >= 2");
  if (cfg.batch_size <= static_cast<int>(cfg.embed_dim) + 2)
    fail(ErrorCode::ConfigError,
         "train_coper: batch size must exceed embed_dim + 2 (correlation loss rank)");
  if (cfg.epochs < 1) fail(ErrorCode::ConfigError, "train_coper: epochs >= 1 required");
  if (static_cast<std::size_t>(cfg.batch_size) > ds.n_samples())
    fail(ErrorCode::ConfigError, "train_coper: batch size exceeds sample count");

  std::vector<std::size_t> view_dims;
  for (const auto& v : ds.views) view_dims.push_back(v.rows);

  TrainResult result;
  result.model = CoperModel::create(view_dims, k, cfg);
  CoperModel& model = result.model;

  CoperGradients grads = CoperGradients::zeros_like(model);
  std::vector<ParamRef> params = collect_params(model, grads);
  std::size_t total_params = 0;
  for (const auto& p : params) total_params += p.n;
  Adam adam(cfg.learning_rate, total_params);

  const int pseudo_start = cfg.resolved_pseudo_start();
  const int perm_start = cfg.resolved_perm_start();
  const std::size_t n = ds.n_samples();
  const std::size_t nv = ds.n_views();
  const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);
  Rng root(cfg.seed ^ 0x7261696eULL);

  EpochState state;

  std::size_t b_count = cfg.top_b > 0
                            ? static_cast<std::size_t>(cfg.top_b)
                            : static_cast<std::size_t>(
                                  (cfg.batch_size + k - 1) / k);
  b_count = std::min(b_count, n);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // shuffled batch order
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng shuffle_rng = root.derive(0x100000ULL + static_cast<std::uint64_t>(epoch));
    for (std::size_t i = n; i > 1; --i)
      std::swap(order[i - 1], order[static_cast<std::size_t>(shuffle_rng.below(i))]);

    BatchLosses epoch_losses;
    std::size_t n_batches = 0;
    const bool ce_active = epoch >= pseudo_start && state.active;
    const bool perm_active = cfg.use_permutations && epoch >= perm_start && state.active;

    for (std::size_t start = 0; start + batch <= n; start += batch) {
      std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                   order.begin() + static_cast<std::ptrdiff_t>(start + batch));
      std::vector<Matrix> xb;
      for (std::size_t v = 0; v < nv; ++v) xb.push_back(take_columns(ds.views[v], idx));

      BatchSupervision sup;
      if (ce_active) {
        sup.has_ce = true;
        sup.view_targets.assign(nv, std::vector<std::vector<double>>(batch));
        sup.fused_targets.assign(batch, {});
        for (std::size_t j = 0; j < batch; ++j) {
          std::size_t g = idx[j];
          for (std::size_t v = 0; v < nv; ++v)
            if (!state.pls.per_view[v][g].empty())
              sup.view_targets[v][j] = state.pls.per_view[v][g];
          sup.fused_targets[j] = state.fused_targets[g];
        }
      }
      if (perm_active) {
        std::vector<int> batch_labels(batch, -1);
        bool any = false;
        for (std::size_t j = 0; j < batch; ++j) {
          batch_labels[j] = state.perm_labels[idx[j]];
          any = any || batch_labels[j] >= 0;
        }
        if (any) {
          sup.has_perm = true;
          Rng plan_rng = root.derive(0x200000ULL + static_cast<std::uint64_t>(epoch) * 4096 +
                                     static_cast<std::uint64_t>(n_batches));
          int rounds = std::max(1, cfg.perm_rounds_per_batch);
          for (int r = 0; r < rounds; ++r) {
            std::vector<PermutationPlan> plans;
            for (std::size_t v = 0; v < nv; ++v)
              plans.push_back(
                  sample_plan(batch_labels, k, static_cast<int>(v) + r * 64,
                              plan_rng.next_u64()));
            sup.perm_plan_rounds.push_back(std::move(plans));
          }
        }
      }

      // zero gradients
      for (auto& p : params)
        for (std::size_t i = 0; i < p.n; ++i) p.grad[i] = 0.0;
      BatchLosses bl;
      try {
        bl = coper_batch_gradients(model, xb, sup, grads);
      } catch (const Error& e) {
        // numeric collapse (exploded weights, degenerate covariances) counts
        // as divergence once training has started
        if (e.code() == ErrorCode::SingularCovariance ||
            e.code() == ErrorCode::EigenFailure || e.code() == ErrorCode::NotPsd)
          fail(ErrorCode::TrainingDiverged,
               "train_coper: diverged at epoch " + std::to_string(epoch) + " (" +
                   e.what() + ")");
        throw;
      }
      if (!std::isfinite(bl.total()))
        fail(ErrorCode::TrainingDiverged,
             "train_coper: non-finite loss at epoch " + std::to_string(epoch));
      adam.step(params);

      epoch_losses.corr += bl.corr;
      epoch_losses.ce += bl.ce;
      epoch_losses.mse += bl.mse;
      epoch_losses.perm += bl.perm;
      ++n_batches;
    }

    // full-dataset pass: embeddings, prediction, log row, next pseudo-labels
    std::vector<Matrix> h_full;
    for (std::size_t v = 0; v < nv; ++v)
      h_full.push_back(mlp_forward(model.encoders[v], ds.views[v]).post.back());
    Matrix fused_w = fuse(h_full, model.fusion_weights);
    Matrix probs = softmax_columns(mlp_forward(model.head, fused_w).post.back());
    std::vector<int> assignment(n, 0);
    for (std::size_t j = 0; j < n; ++j) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < probs.rows; ++i)
        if (probs(i, j) > probs(best, j)) best = i;
      assignment[j] = static_cast<int>(best);
    }

    TrainLogRow row;
    row.epoch = epoch;
    double denom = n_batches > 0 ? static_cast<double>(n_batches) : 1.0;
    row.corr = epoch_losses.corr / denom;
    row.ce = epoch_losses.ce / denom;
    row.mse = epoch_losses.mse / denom;
    row.perm = epoch_losses.perm / denom;

    Matrix fused_avg = h_full.front();
    for (std::size_t v = 1; v < nv; ++v) add_scaled(fused_avg, 1.0, h_full[v]);
    fused_avg = (1.0 / static_cast<double>(nv)) * fused_avg;
    // predicted ids may skip clusters; silhouette needs compact labels
    std::vector<int> remap(static_cast<std::size_t>(k), -1);
    std::vector<int> compact(n);
    int distinct = 0;
    for (std::size_t i = 0; i < n; ++i) {
      int& slot = remap[static_cast<std::size_t>(assignment[i])];
      if (slot < 0) slot = distinct++;
      compact[i] = slot;
    }
    row.silhouette = distinct >= 2 ? silhouette(fused_avg, compact) : -1.0;
    if (ds.has_labels()) {
      row.acc = accuracy(assignment, ds.true_labels);
      row.ari = adjusted_rand_index(assignment, ds.true_labels);
      row.nmi = normalized_mutual_information(assignment, ds.true_labels);
    }
    result.log.push_back(row);
    result.assignment = assignment;

    // pseudo-labels for the next epoch
    // refresh pseudo-labels for the next epoch (skip after the last one)
    if (epoch + 1 >= pseudo_start && epoch + 1 < cfg.epochs) {
      Matrix p_rows = transpose(probs);  // N x K
      ConfidentSets cs = select_confident(p_rows, b_count);
      double lam = cfg.effective_lambda(epoch + 1);
      std::vector<ViewSoftLabels> refined;
      for (std::size_t v = 0; v < nv; ++v)
        refined.push_back(refine_per_view(h_full[v], cs, lam));
      if (cfg.use_agreement) {
        state.pls = multiview_agreement(refined);
      } else {
        state.pls = PseudoLabelSet{};
        state.pls.per_view = refined;
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t v = 0; v < nv; ++v)
            if (!refined[v][i].empty()) { state.pls.retained.push_back(i); break; }
      }
      state.pls.lambda = lam;
      state.pls.top_count = b_count;
      state.fused_targets.assign(n, {});
      for (std::size_t i : state.pls.retained)
        state.fused_targets[i] = normalized_mean_target(state.pls, i);
      state.perm_labels = permutation_labels(state.pls, p_rows);
      state.active = !state.pls.retained.empty();
    }
  }

  return result;
}

}  // namespace coper
