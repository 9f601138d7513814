#include "core/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <thread>

#include "core/cca.hpp"
#include "core/kmeans.hpp"
#include "core/lda.hpp"
#include "core/linalg.hpp"
#include "core/metrics.hpp"
#include "core/permute.hpp"
#include "core/perturb.hpp"
#include "core/pseudolabel.hpp"
#include "core/rng.hpp"

namespace coper::harness {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// sample standard deviation, matching "mean and standard deviation" reporting
double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

Matrix stack_rows(const std::vector<Matrix>& mats) {
  std::size_t rows = 0, cols = mats.front().cols;
  for (const auto& m : mats) rows += m.rows;
  Matrix out(rows, cols);
  std::size_t off = 0;
  for (const auto& m : mats) {
    for (std::size_t i = 0; i < m.rows; ++i)
      for (std::size_t j = 0; j < m.cols; ++j) out(off + i, j) = m(i, j);
    off += m.rows;
  }
  return out;
}

template <typename Fn>
void parallel_for(std::size_t jobs, Fn&& fn) {
  std::size_t workers = worker_count(jobs);
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::vector<std::future<void>> futs;
  std::size_t per = (jobs + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    std::size_t lo = w * per, hi = std::min(jobs, lo + per);
    if (lo >= hi) break;
    futs.push_back(std::async(std::launch::async, [lo, hi, &fn]() {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    }));
  }
  for (auto& f : futs) f.get();
}

struct EmbedMetrics {
  double acc = -1.0, ari = -1.0, nmi = -1.0, silhouette = 0.0;
  std::vector<int> pred;
};

EmbedMetrics cluster_and_score(const Matrix& embed, const MultiViewDataset& ds, int k,
                               std::uint64_t seed) {
  EmbedMetrics em;
  KMeansResult km = kmeans(transpose(embed), k, 20, 300, 1e-6, seed);
  em.pred = km.assignment;
  int distinct = 0;
  std::vector<char> seen(static_cast<std::size_t>(k), 0);
  for (int a : km.assignment)
    if (!seen[static_cast<std::size_t>(a)]) { seen[static_cast<std::size_t>(a)] = 1; ++distinct; }
  em.silhouette = distinct >= 2 ? silhouette(embed, km.assignment) : -1.0;
  if (ds.has_labels()) {
    em.acc = accuracy(km.assignment, ds.true_labels);
    em.ari = adjusted_rand_index(km.assignment, ds.true_labels);
    em.nmi = normalized_mutual_information(km.assignment, ds.true_labels);
  }
  return em;
}

int resolve_k(const MultiViewDataset& ds, const json& options) {
  int k = options.value("k", 0);
  if (k == 0) k = ds.k;
  if (k < 2) fail(ErrorCode::InvalidParameter, "k >= 2 required (dataset defines none)");
  return k;
}

// Unsupervised pseudo-label extraction for the linear pipeline: soft k-means
// on the fused embedding stands in for the cluster head.
std::vector<int> linear_perm_labels(const Matrix& u, const Matrix& v, int k, double lambda,
                                    double b_frac, double temperature, std::uint64_t seed) {
  Matrix fused = 0.5 * (u + v);
  Matrix p = soft_kmeans_probabilities(fused, k, temperature, seed);
  std::size_t n = u.cols;
  std::size_t b = static_cast<std::size_t>(
      std::ceil(b_frac * static_cast<double>(n) / static_cast<double>(k)));
  b = std::max<std::size_t>(1, std::min(b, n));
  ConfidentSets cs = select_confident(p, b);
  std::vector<ViewSoftLabels> refined{refine_per_view(u, cs, lambda),
                                      refine_per_view(v, cs, lambda)};
  PseudoLabelSet pls = multiview_agreement(refined);
  return permutation_labels(pls, p);
}

// mean |sigma_i - lambda_i/(1+lambda_i)| over the top k-1 components;
// the executable Fig.-4(i)(b) quantity
double eigen_gap_to_lda(const CcaModel& model, const Matrix& x1,
                        const std::vector<int>& truth, int k, double ridge) {
  LdaModel lda = fit_lda(x1, truth, k, ridge);
  std::size_t top = std::min<std::size_t>(static_cast<std::size_t>(k - 1),
                                          model.correlations.size());
  double gap = 0.0;
  for (std::size_t i = 0; i < top; ++i) {
    double lam_star = lda.eigvals[i] / (1.0 + lda.eigvals[i]);
    gap += std::fabs(model.correlations[i] - lam_star);
  }
  return top > 0 ? gap / static_cast<double>(top) : 0.0;
}

json aggregate_rows(const json& rows, const std::string& group_key,
                    const std::vector<std::string>& metrics) {
  json agg = json::object();
  std::vector<std::string> groups;
  for (const auto& r : rows) {
    std::string g = r.at(group_key).get<std::string>();
    if (std::find(groups.begin(), groups.end(), g) == groups.end()) groups.push_back(g);
  }
  for (const auto& g : groups) {
    json entry = json::object();
    for (const auto& m : metrics) {
      std::vector<double> vals;
      for (const auto& r : rows)
        if (r.at(group_key).get<std::string>() == g && r.contains(m) && !r[m].is_null())
          vals.push_back(r[m].get<double>());
      if (!vals.empty()) {
        entry[m + "_mean"] = mean_of(vals);
        entry[m + "_std"] = std_of(vals);
      }
    }
    agg[g] = entry;
  }
  return agg;
}

std::vector<std::uint64_t> seed_list(const json& options) {
  if (options.contains("seed_list")) {
    std::vector<std::uint64_t> out;
    for (const auto& s : options["seed_list"]) out.push_back(s.get<std::uint64_t>());
    if (out.empty()) fail(ErrorCode::InvalidParameter, "empty seed list");
    return out;
  }
  int n = options.value("seeds", 10);
  std::uint64_t base = options.value("seed", 0ULL);
  if (n < 1) fail(ErrorCode::InvalidParameter, "seeds must be >= 1");
  std::vector<std::uint64_t> out;
  for (int i = 0; i < n; ++i) out.push_back(base + static_cast<std::uint64_t>(i));
  return out;
}

}  // namespace

std::size_t worker_count(std::size_t jobs) {
  std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("COPER_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1) hw = static_cast<std::size_t>(v);
  }
  return std::min(hw, std::max<std::size_t>(1, jobs));
}

json run_gen(const json& options) {
  std::string preset = options.value("preset", "mixture");
  std::uint64_t seed = options.value("seed", 0ULL);
  std::string out_dir = options.value("out", std::string());
  std::string name = options.value("name", std::string("dataset"));
  if (out_dir.empty()) fail(ErrorCode::InvalidParameter, "gen: --out directory required");

  MultiViewDataset ds;
  if (preset == "mixture") {
    int k = options.value("k", 3);
    std::size_t n = options.value("n", std::size_t{600});
    std::vector<int> dims = options.value("view_dims", std::vector<int>{10, 10});
    int latent = options.value("latent_dim", 4);
    double separation = options.value("separation", 4.0);
    double noise = options.value("noise", 0.6);
    int confound_dim = options.value("confound_dim", 3);
    double confound_strength = options.value("confound_strength", 2.5);
    ds = benchmark_mixture(seed, n, k, dims, latent, separation, noise, confound_dim,
                           confound_strength);
  } else if (preset == "splitimg") {
    int k = options.value("k", 3);
    std::size_t n = options.value("n", std::size_t{800});
    int height = options.value("height", 16);
    int width = options.value("width", 8);
    double style = options.value("style", 0.5);
    double noise = options.value("noise", 0.3);
    ds = benchmark_split_images(seed, n, k, height, width, style, noise);
  } else {
    fail(ErrorCode::InvalidParameter, "gen: unknown preset '" + preset + "'");
  }
  save_dataset(ds, out_dir, name);

  json result;
  result["command"] = "gen";
  result["options"] = options;
  result["manifest"] = out_dir + "/" + name + ".json";
  result["n_samples"] = ds.n_samples();
  result["k"] = ds.k;
  json dims = json::array();
  for (const auto& v : ds.views) dims.push_back(v.rows);
  result["view_dims"] = dims;
  return result;
}

json run_linear_bench(const MultiViewDataset& ds, const json& options) {
  int k = resolve_k(ds, options);
  std::vector<std::string> methods =
      options.value("methods", std::vector<std::string>{"raw", "pca", "cca", "cca-perm"});
  auto seeds = seed_list(options);
  std::size_t dim = options.value("dim", std::size_t{0});
  if (dim == 0) dim = static_cast<std::size_t>(k);
  double ridge = options.value("ridge", 1e-4);
  int rounds = options.value("rounds", 4);
  double lambda = options.value("lambda", 0.5);
  double b_frac = options.value("b_frac", 0.5);
  double temperature = options.value("temperature", 0.5);

  json warnings = json::array();
  if (!ds.has_labels())
    warnings.push_back("dataset has no labels; acc/ari/nmi omitted");
  bool needs_cca = false;
  for (const auto& m : methods) needs_cca = needs_cca || m == "cca" || m == "cca-perm";
  if (needs_cca && ds.n_views() < 2)
    fail(ErrorCode::InvalidParameter, "linear-bench: cca methods require at least two views");

  for (const auto& m : methods)
    if (m != "raw" && m != "pca" && m != "cca" && m != "cca-perm")
      fail(ErrorCode::InvalidParameter,
           "linear-bench: unknown method '" + m + "' (valid: raw,pca,cca,cca-perm)");

  std::size_t max_dim = ds.views.front().rows;
  for (const auto& v : ds.views) max_dim = std::min(max_dim, v.rows);
  dim = std::min(dim, max_dim);

  struct Row { std::string method; std::uint64_t seed; EmbedMetrics em; };
  std::vector<Row> rows(methods.size() * seeds.size());

  parallel_for(rows.size(), [&](std::size_t job) {
    std::size_t mi = job / seeds.size();
    std::size_t si = job % seeds.size();
    const std::string& method = methods[mi];
    std::uint64_t seed = seeds[si];
    Rng salt(seed);
    Matrix embed;
    if (method == "raw") {
      embed = stack_rows(ds.views);
    } else if (method == "pca") {
      std::vector<Matrix> parts;
      for (const auto& v : ds.views) {
        std::size_t d = std::min(dim, std::min(v.rows, ds.n_samples()));
        parts.push_back(pca(v, d).embedded);
      }
      embed = stack_rows(parts);
    } else if (method == "cca") {
      CcaModel model = fit_cca(ds.views[0], ds.views[1], dim, ridge);
      embed = stack_rows({cca_transform(model, ds.views[0], CcaSide::First),
                          cca_transform(model, ds.views[1], CcaSide::Second)});
    } else {  // cca-perm
      CcaModel base = fit_cca(ds.views[0], ds.views[1], dim, ridge);
      Matrix u = cca_transform(base, ds.views[0], CcaSide::First);
      Matrix v = cca_transform(base, ds.views[1], CcaSide::Second);
      std::vector<int> labels =
          linear_perm_labels(u, v, k, lambda, b_frac, temperature, salt.derive(5).next_u64());
      CcaModel model =
          permuted_cca(ds, labels, k, rounds, dim, ridge, salt.derive(6).next_u64());
      embed = stack_rows({cca_transform(model, ds.views[0], CcaSide::First),
                          cca_transform(model, ds.views[1], CcaSide::Second)});
    }
    rows[job] = {method, seed, cluster_and_score(embed, ds, k, salt.derive(9).next_u64())};
  });

  json result;
  result["command"] = "linear-bench";
  result["options"] = options;
  json jrows = json::array();
  for (const auto& r : rows) {
    json jr;
    jr["method"] = r.method;
    jr["seed"] = r.seed;
    if (r.em.acc >= 0.0) {
      jr["acc"] = r.em.acc;
      jr["ari"] = r.em.ari;
      jr["nmi"] = r.em.nmi;
    }
    jr["silhouette"] = r.em.silhouette;
    jrows.push_back(jr);
  }
  result["rows"] = jrows;
  result["aggregate"] = aggregate_rows(jrows, "method", {"acc", "ari", "nmi", "silhouette"});
  result["csv_columns"] = json::array({"method", "seed", "acc", "ari", "nmi", "silhouette"});
  if (!warnings.empty()) result["warnings"] = warnings;
  return result;
}

json run_casestudy(const MultiViewDataset& ds, const json& options) {
  int k = resolve_k(ds, options);
  if (ds.n_views() != 2)
    fail(ErrorCode::InvalidParameter, "casestudy: exactly two views required");
  auto seeds = seed_list(options);
  int rounds = options.value("rounds", 2);
  std::size_t dim = options.value("dim", std::size_t{0});
  if (dim == 0) dim = static_cast<std::size_t>(k);
  dim = std::min(dim, std::min(ds.views[0].rows, ds.views[1].rows));
  double ridge = options.value("ridge", 1e-4);
  double lambda = options.value("lambda", 0.5);
  double b_frac = options.value("b_frac", 0.5);
  double temperature = options.value("temperature", 0.5);
  bool supervised = options.value("supervised", false);
  if (rounds < 0) fail(ErrorCode::InvalidParameter, "casestudy: rounds must be >= 0");
  if (supervised && !ds.has_labels())
    fail(ErrorCode::InvalidParameter, "casestudy: supervised mode needs labels");

  struct Row { std::uint64_t seed; int stage; double ari; double gap; };
  std::vector<std::vector<Row>> per_seed(seeds.size());

  parallel_for(seeds.size(), [&](std::size_t si) {
    std::uint64_t seed = seeds[si];
    Rng salt(seed);
    CcaModel model = fit_cca(ds.views[0], ds.views[1], dim, ridge);
    for (int stage = 0; stage <= rounds; ++stage) {
      if (stage > 0) {
        Matrix u = cca_transform(model, ds.views[0], CcaSide::First);
        Matrix v = cca_transform(model, ds.views[1], CcaSide::Second);
        std::vector<int> labels =
            supervised ? ds.true_labels
                       : linear_perm_labels(u, v, k, lambda, b_frac, temperature,
                                            salt.derive(100 + stage).next_u64());
        model = permuted_cca(ds, labels, k, stage, dim, ridge,
                             salt.derive(200 + stage).next_u64());
      }
      Matrix embed = stack_rows({cca_transform(model, ds.views[0], CcaSide::First),
                                 cca_transform(model, ds.views[1], CcaSide::Second)});
      // stage 0 derives the same clustering stream as linear-bench's cca
      // method, so a zero-round case study degenerates to that row exactly
      EmbedMetrics em = cluster_and_score(
          embed, ds, k,
          stage == 0 ? salt.derive(9).next_u64()
                     : salt.derive(300 + static_cast<std::uint64_t>(stage)).next_u64());
      double gap = ds.has_labels()
                       ? eigen_gap_to_lda(model, ds.views[0], ds.true_labels, k, ridge)
                       : -1.0;
      per_seed[si].push_back({seed, stage, em.ari, gap});
    }
  });

  json jrows = json::array();
  for (const auto& sr : per_seed)
    for (const auto& r : sr) {
      json jr;
      jr["seed"] = r.seed;
      jr["stage"] = r.stage;
      if (r.ari >= -1.0 && ds.has_labels()) jr["ari"] = r.ari;
      if (r.gap >= 0.0) jr["eigen_gap"] = r.gap;
      jrows.push_back(jr);
    }

  json agg;
  if (ds.has_labels()) {
    std::vector<double> stage_ari(static_cast<std::size_t>(rounds) + 1, 0.0);
    std::vector<double> stage_gap(static_cast<std::size_t>(rounds) + 1, 0.0);
    std::size_t nondecreasing = 0;
    for (const auto& sr : per_seed) {
      bool mono = true;
      for (std::size_t s = 0; s < sr.size(); ++s) {
        stage_ari[s] += sr[s].ari / static_cast<double>(per_seed.size());
        stage_gap[s] += sr[s].gap / static_cast<double>(per_seed.size());
        if (s > 0 && sr[s].ari < sr[s - 1].ari - 1e-9) mono = false;
      }
      if (mono) ++nondecreasing;
    }
    agg["stage_mean_ari"] = stage_ari;
    agg["stage_mean_eigen_gap"] = stage_gap;
    agg["ari_improvement"] = stage_ari.back() - stage_ari.front();
    agg["nondecreasing_seeds"] = nondecreasing;
    agg["n_seeds"] = per_seed.size();
  }

  json result;
  result["command"] = "casestudy";
  result["options"] = options;
  result["rows"] = jrows;
  result["aggregate"] = agg;
  result["csv_columns"] = json::array({"seed", "stage", "ari", "eigen_gap"});
  return result;
}

json run_perturb_sweep(const MultiViewDataset& ds, const json& options) {
  int k = resolve_k(ds, options);
  if (!ds.has_labels())
    fail(ErrorCode::InvalidParameter, "perturb-sweep: ground-truth labels required");
  auto seeds = seed_list(options);
  std::vector<double> noise_grid =
      options.value("noise_grid", std::vector<double>{0.0, 0.1, 0.2, 0.3});
  std::vector<double> subset_grid =
      options.value("subset_grid", std::vector<double>{0.2, 0.4, 0.6, 0.8, 1.0});
  double ridge = options.value("ridge", 1e-4);
  std::size_t pca_dim = options.value("pca_dim", std::size_t{8});

  Matrix all = stack_rows(ds.views);
  pca_dim = std::min({pca_dim, all.rows, ds.n_samples()});
  Matrix theta = pca(all, pca_dim).embedded;
  const std::size_t n = theta.cols;

  struct Job { std::string mode; double level; std::uint64_t seed; };
  std::vector<Job> jobs;
  for (double p : noise_grid)
    for (auto s : seeds) jobs.push_back({"noise", p, s});
  for (double f : subset_grid)
    for (auto s : seeds) jobs.push_back({"subset", f, s});

  std::vector<json> out_rows(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t ji) {
    const Job& job = jobs[ji];
    Rng rng = Rng(job.seed).derive(job.mode == "noise" ? 1 : 2);
    std::vector<int> pseudo = ds.true_labels;
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    for (std::size_t i = n; i > 1; --i)
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng.below(i))]);
    if (job.mode == "noise") {
      std::size_t flips = static_cast<std::size_t>(std::floor(job.level * static_cast<double>(n)));
      for (std::size_t i = 0; i < flips; ++i) {
        int truth = ds.true_labels[order[i]];
        int offset = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(k - 1)));
        pseudo[order[i]] = (truth + offset) % k;
      }
    } else {
      std::size_t keep = static_cast<std::size_t>(std::floor(job.level * static_cast<double>(n)));
      keep = std::max<std::size_t>(keep, static_cast<std::size_t>(k));
      std::vector<int> masked(n, -1);
      for (std::size_t i = 0; i < keep; ++i) masked[order[i]] = ds.true_labels[order[i]];
      pseudo = masked;
    }
    PerturbationReport rep = bound_check(theta, ds.true_labels, pseudo, k, ridge);
    json jr;
    jr["mode"] = job.mode;
    jr["level"] = job.level;
    jr["seed"] = job.seed;
    jr["max_gap"] = rep.max_gap;
    jr["spectral_bound"] = rep.spectral_bound;
    jr["bound_satisfied"] = rep.bound_satisfied;
    jr["e1_fro"] = frobenius_norm(rep.e1);
    jr["e2_fro"] = frobenius_norm(rep.e2);
    jr["e3_fro"] = frobenius_norm(rep.e3);
    jr["e_fro"] = frobenius_norm(rep.e);
    jr["d_fro"] = frobenius_norm(rep.d);
    out_rows[ji] = jr;
  });

  json jrows = json::array();
  for (auto& r : out_rows) jrows.push_back(std::move(r));

  auto level_means = [&](const std::string& mode, const std::vector<double>& grid) {
    json arr = json::array();
    for (double level : grid) {
      std::vector<double> gaps, bounds;
      std::size_t sat = 0, count = 0;
      for (const auto& r : jrows) {
        if (r["mode"] != mode || r["level"].get<double>() != level) continue;
        gaps.push_back(r["max_gap"].get<double>());
        bounds.push_back(r["spectral_bound"].get<double>());
        if (r["bound_satisfied"].get<bool>()) ++sat;
        ++count;
      }
      json e;
      e["level"] = level;
      e["mean_gap"] = mean_of(gaps);
      e["mean_bound"] = mean_of(bounds);
      e["bound_rate"] = count > 0 ? static_cast<double>(sat) / static_cast<double>(count) : 0.0;
      arr.push_back(e);
    }
    return arr;
  };

  json result;
  result["command"] = "perturb-sweep";
  result["options"] = options;
  result["rows"] = jrows;
  result["aggregate"] =
      json{{"noise", level_means("noise", noise_grid)},
           {"subset", level_means("subset", subset_grid)}};
  result["csv_columns"] =
      json::array({"mode", "level", "seed", "max_gap", "spectral_bound", "bound_satisfied",
                   "e1_fro", "e2_fro", "e3_fro", "e_fro", "d_fro"});
  return result;
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig cfg;
  static const std::vector<std::string> known = {
      "epochs", "pseudo_start", "perm_start", "batch_size", "learning_rate", "ridge",
      "lambda", "lambda_ramp_epochs", "top_b", "perm_rounds_per_batch", "corr_weight",
      "ce_weight", "mse_weight", "use_decoders", "use_permutations", "use_agreement",
      "linear_encoder", "encoder_hidden", "embed_dim", "head_hidden", "seed"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      fail(ErrorCode::ConfigError, "unknown config key '" + it.key() + "'");
  cfg.epochs = j.value("epochs", cfg.epochs);
  cfg.pseudo_start = j.value("pseudo_start", cfg.pseudo_start);
  cfg.perm_start = j.value("perm_start", cfg.perm_start);
  cfg.batch_size = j.value("batch_size", cfg.batch_size);
  cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
  cfg.ridge = j.value("ridge", cfg.ridge);
  cfg.lambda = j.value("lambda", cfg.lambda);
  cfg.lambda_ramp_epochs = j.value("lambda_ramp_epochs", cfg.lambda_ramp_epochs);
  cfg.top_b = j.value("top_b", cfg.top_b);
  cfg.perm_rounds_per_batch = j.value("perm_rounds_per_batch", cfg.perm_rounds_per_batch);
  cfg.corr_weight = j.value("corr_weight", cfg.corr_weight);
  cfg.ce_weight = j.value("ce_weight", cfg.ce_weight);
  cfg.mse_weight = j.value("mse_weight", cfg.mse_weight);
  cfg.use_decoders = j.value("use_decoders", cfg.use_decoders);
  cfg.use_permutations = j.value("use_permutations", cfg.use_permutations);
  cfg.use_agreement = j.value("use_agreement", cfg.use_agreement);
  cfg.linear_encoder = j.value("linear_encoder", cfg.linear_encoder);
  cfg.encoder_hidden = j.value("encoder_hidden", cfg.encoder_hidden);
  cfg.embed_dim = j.value("embed_dim", cfg.embed_dim);
  cfg.head_hidden = j.value("head_hidden", cfg.head_hidden);
  cfg.seed = j.value("seed", cfg.seed);
  return cfg;
}

json train_config_to_json(const TrainConfig& cfg) {
  json j;
  j["epochs"] = cfg.epochs;
  j["pseudo_start"] = cfg.pseudo_start;
  j["perm_start"] = cfg.perm_start;
  j["batch_size"] = cfg.batch_size;
  j["learning_rate"] = cfg.learning_rate;
  j["ridge"] = cfg.ridge;
  j["lambda"] = cfg.lambda;
  j["lambda_ramp_epochs"] = cfg.lambda_ramp_epochs;
  j["top_b"] = cfg.top_b;
  j["perm_rounds_per_batch"] = cfg.perm_rounds_per_batch;
  j["corr_weight"] = cfg.corr_weight;
  j["ce_weight"] = cfg.ce_weight;
  j["mse_weight"] = cfg.mse_weight;
  j["use_decoders"] = cfg.use_decoders;
  j["use_permutations"] = cfg.use_permutations;
  j["use_agreement"] = cfg.use_agreement;
  j["linear_encoder"] = cfg.linear_encoder;
  j["encoder_hidden"] = cfg.encoder_hidden;
  j["embed_dim"] = cfg.embed_dim;
  j["head_hidden"] = cfg.head_hidden;
  j["seed"] = cfg.seed;
  return j;
}

namespace {

json net_to_json(const MlpNetwork& net) {
  json layers = json::array();
  for (const auto& l : net.layers) {
    json jl;
    jl["rows"] = l.weight.rows;
    jl["cols"] = l.weight.cols;
    jl["weight"] = l.weight.data;
    jl["bias"] = l.bias;
    layers.push_back(jl);
  }
  return json{{"layers", layers}};
}

MlpNetwork net_from_json(const json& j) {
  MlpNetwork net;
  for (const auto& jl : j.at("layers")) {
    MlpLayer l;
    l.weight = Matrix(jl.at("rows").get<std::size_t>(), jl.at("cols").get<std::size_t>());
    l.weight.data = jl.at("weight").get<std::vector<double>>();
    if (l.weight.data.size() != l.weight.rows * l.weight.cols)
      fail(ErrorCode::ParseError, "checkpoint: weight size mismatch");
    l.bias = jl.at("bias").get<std::vector<double>>();
    net.layers.push_back(std::move(l));
  }
  return net;
}

}  // namespace

void save_checkpoint(const CoperModel& model, const std::string& path) {
  json j;
  j["format_version"] = 1;
  j["k"] = model.k;
  j["config"] = train_config_to_json(model.config);
  j["fusion_weights"] = model.fusion_weights;
  json encs = json::array(), decs = json::array();
  for (const auto& e : model.encoders) encs.push_back(net_to_json(e));
  for (const auto& d : model.decoders) decs.push_back(net_to_json(d));
  j["encoders"] = encs;
  j["decoders"] = decs;
  j["head"] = net_to_json(model.head);
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write checkpoint: " + path);
  out << j.dump(2) << '\n';
}

CoperModel load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open checkpoint: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail(ErrorCode::ParseError, path + ": " + e.what());
  }
  if (j.value("format_version", 0) != 1)
    fail(ErrorCode::ParseError, "checkpoint: unsupported format version");
  CoperModel model;
  model.k = j.at("k").get<int>();
  model.config = train_config_from_json(j.at("config"));
  model.fusion_weights = j.at("fusion_weights").get<std::vector<double>>();
  for (const auto& e : j.at("encoders")) model.encoders.push_back(net_from_json(e));
  for (const auto& d : j.at("decoders")) model.decoders.push_back(net_from_json(d));
  model.head = net_from_json(j.at("head"));
  return model;
}

void write_train_log_csv(const std::vector<TrainLogRow>& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write training log: " + path);
  bool metrics = !log.empty() && log.front().acc >= 0.0;
  out << "epoch,corr,ce,mse,perm,silhouette";
  if (metrics) out << ",acc,ari,nmi";
  out << '\n';
  for (const auto& r : log) {
    out << r.epoch << ',' << fmt(r.corr) << ',' << fmt(r.ce) << ',' << fmt(r.mse) << ','
        << fmt(r.perm) << ',' << fmt(r.silhouette);
    if (metrics) out << ',' << fmt(r.acc) << ',' << fmt(r.ari) << ',' << fmt(r.nmi);
    out << '\n';
  }
}

namespace {

// FNV-1a over the serialized checkpoint; stable fingerprint for reports
std::string fnv1a_hex(const std::string& payload) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : payload) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json train_once(const MultiViewDataset& ds, TrainConfig cfg, const std::string& out_dir,
                const std::string& stem) {
  TrainResult tr = train_coper(ds, cfg);
  const TrainLogRow& last = tr.log.back();
  json result;
  result["config"] = train_config_to_json(cfg);
  result["final"] = {{"corr", last.corr}, {"ce", last.ce},     {"mse", last.mse},
                     {"perm", last.perm}, {"silhouette", last.silhouette}};
  if (ds.has_labels()) {
    result["final"]["acc"] = last.acc;
    result["final"]["ari"] = last.ari;
    result["final"]["nmi"] = last.nmi;
  }
  double sil_sum = 0.0;
  for (const auto& r : tr.log) sil_sum += r.silhouette;
  result["mean_silhouette"] = sil_sum / static_cast<double>(tr.log.size());
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::string ckpt = out_dir + "/" + stem + "_checkpoint.json";
    std::string logp = out_dir + "/" + stem + "_log.csv";
    save_checkpoint(tr.model, ckpt);
    write_train_log_csv(tr.log, logp);
    std::ifstream in(ckpt);
    std::string payload((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    result["checkpoint"] = ckpt;
    result["log"] = logp;
    result["checkpoint_hash"] = fnv1a_hex(payload);
  }
  return result;
}

TrainConfig variant_config(const std::string& variant, TrainConfig cfg) {
  if (variant == "full") return cfg;
  if (variant == "linear-enc") { cfg.linear_encoder = true; return cfg; }
  if (variant == "no-corr") { cfg.corr_weight = 0.0; return cfg; }
  if (variant == "no-perm") { cfg.use_permutations = false; return cfg; }
  if (variant == "no-agree") { cfg.use_agreement = false; return cfg; }
  fail(ErrorCode::InvalidParameter,
       "unknown variant '" + variant +
           "' (valid: full, linear-enc, no-corr, no-perm, no-agree)");
}

}  // namespace

json run_train(const MultiViewDataset& ds, const json& options, const std::string& out_dir) {
  TrainConfig cfg = train_config_from_json(options.value("config", json::object()));
  if (options.contains("seed")) cfg.seed = options["seed"].get<std::uint64_t>();
  json result = train_once(ds, cfg, out_dir, options.value("name", std::string("train")));
  result["command"] = "train";
  result["options"] = options;
  return result;
}

json run_ablate(const MultiViewDataset& ds, const json& options) {
  std::vector<std::string> variants = options.value(
      "variants",
      std::vector<std::string>{"full", "linear-enc", "no-corr", "no-perm", "no-agree"});
  auto seeds = seed_list(options);
  TrainConfig base = train_config_from_json(options.value("config", json::object()));
  for (const auto& v : variants) variant_config(v, base);  // validate names up front

  struct Row { std::string variant; std::uint64_t seed; json final; };
  std::vector<Row> rows(variants.size() * seeds.size());
  parallel_for(rows.size(), [&](std::size_t job) {
    std::size_t vi = job / seeds.size();
    std::size_t si = job % seeds.size();
    TrainConfig cfg = variant_config(variants[vi], base);
    cfg.seed = seeds[si];
    json r = train_once(ds, cfg, "", "");
    rows[job] = {variants[vi], seeds[si], r["final"]};
  });

  json jrows = json::array();
  for (const auto& r : rows) {
    json jr;
    jr["method"] = r.variant;
    jr["seed"] = r.seed;
    for (const char* m : {"acc", "ari", "nmi", "silhouette"})
      if (r.final.contains(m)) jr[m] = r.final[m];
    jrows.push_back(jr);
  }

  json result;
  result["command"] = "ablate";
  result["options"] = options;
  result["rows"] = jrows;
  result["aggregate"] = aggregate_rows(jrows, "method", {"acc", "ari", "nmi", "silhouette"});
  result["csv_columns"] = json::array({"method", "seed", "acc", "ari", "nmi", "silhouette"});
  return result;
}

json run_tune(const MultiViewDataset& ds, const json& options) {
  TrainConfig base = train_config_from_json(options.value("config", json::object()));
  std::vector<int> batch_sizes = options.value("batch_sizes", std::vector<int>{64, 128, 256});
  std::vector<double> lambdas = options.value("lambdas", std::vector<double>{base.lambda});
  std::uint64_t seed = options.value("seed", 0ULL);

  struct Combo { int batch; double lambda; };
  std::vector<Combo> combos;
  for (int b : batch_sizes)
    for (double l : lambdas) combos.push_back({b, l});

  std::vector<json> finals(combos.size());
  parallel_for(combos.size(), [&](std::size_t ci) {
    TrainConfig cfg = base;
    cfg.batch_size = combos[ci].batch;
    cfg.lambda = combos[ci].lambda;
    cfg.seed = seed;
    finals[ci] = train_once(ds, cfg, "", "");
  });

  json jrows = json::array();
  std::size_t best = 0;
  for (std::size_t ci = 0; ci < combos.size(); ++ci) {
    json jr;
    jr["batch_size"] = combos[ci].batch;
    jr["lambda"] = combos[ci].lambda;
    jr["mean_silhouette"] = finals[ci]["mean_silhouette"];
    if (finals[ci]["final"].contains("acc")) jr["acc"] = finals[ci]["final"]["acc"];
    jrows.push_back(jr);
    if (finals[ci]["mean_silhouette"].get<double>() >
        finals[best]["mean_silhouette"].get<double>())
      best = ci;
  }

  json result;
  result["command"] = "tune";
  result["options"] = options;
  result["rows"] = jrows;
  result["best"] = jrows[best];
  result["best"]["config"] = [&] {
    TrainConfig cfg = base;
    cfg.batch_size = combos[best].batch;
    cfg.lambda = combos[best].lambda;
    return train_config_to_json(cfg);
  }();
  result["csv_columns"] = json::array({"batch_size", "lambda", "mean_silhouette", "acc"});
  return result;
}

json run_metrics(const std::vector<int>& pred, const std::vector<int>& truth,
                 const Matrix* embedding) {
  json result;
  result["command"] = "metrics";
  result["acc"] = accuracy(pred, truth);
  result["ari"] = adjusted_rand_index(pred, truth);
  result["nmi"] = normalized_mutual_information(pred, truth);
  if (embedding) result["silhouette"] = silhouette(*embedding, pred);
  return result;
}

void write_experiment_files(const json& result, const std::string& out_dir,
                            const std::string& stem) {
  if (out_dir.empty()) return;
  fs::create_directories(out_dir);
  {
    std::ofstream out(out_dir + "/" + stem + ".json");
    if (!out) fail(ErrorCode::IoError, "cannot write report JSON in " + out_dir);
    out << result.dump(2) << '\n';
  }
  if (!result.contains("csv_columns") || !result.contains("rows")) return;
  std::ofstream out(out_dir + "/" + stem + ".csv");
  if (!out) fail(ErrorCode::IoError, "cannot write report CSV in " + out_dir);
  const auto& cols = result["csv_columns"];
  for (std::size_t c = 0; c < cols.size(); ++c)
    out << (c ? "," : "") << cols[c].get<std::string>();
  out << '\n';
  for (const auto& row : result["rows"]) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (c) out << ',';
      std::string key = cols[c].get<std::string>();
      if (!row.contains(key)) continue;
      const auto& v = row[key];
      if (v.is_string()) out << v.get<std::string>();
      else if (v.is_boolean()) out << (v.get<bool>() ? 1 : 0);
      else if (v.is_number_integer()) out << v.get<long long>();
      else if (v.is_number_unsigned()) out << v.get<unsigned long long>();
      else if (v.is_number_float()) out << fmt(v.get<double>());
    }
    out << '\n';
  }
}

}  // namespace coper::harness
