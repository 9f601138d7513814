// coper CLI: dataset generation, linear baselines, case studies, perturbation
// sweeps, end-to-end training, ablations and metric reports. Talks to the
// shared library exclusively through the C API.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "coper/coper.h"

using nlohmann::json;

namespace {

struct CommonFlags {
  std::string data;
  std::string out;
  bool as_json = false;
  int seeds = 10;
  std::uint64_t seed = 0;
};

[[noreturn]] void die(coper_status status) {
  std::fprintf(stderr, "error (%s): %s\n", coper_status_name(status), coper_last_error());
  std::exit(static_cast<int>(status));
}

void check(coper_status status) {
  if (status != COPER_OK) die(status);
}

std::string take_string(char* owned) {
  std::string s(owned ? owned : "");
  coper_string_free(owned);
  return s;
}

coper_dataset* load_data(const std::string& manifest) {
  coper_dataset* ds = nullptr;
  check(coper_dataset_load(manifest.c_str(), &ds));
  return ds;
}

std::string f6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

void print_method_table(const json& result) {
  const json& agg = result["aggregate"];
  std::printf("%-12s %14s %14s %14s %14s\n", "method", "acc", "ari", "nmi", "silhouette");
  for (auto it = agg.begin(); it != agg.end(); ++it) {
    std::printf("%-12s", it.key().c_str());
    for (const char* m : {"acc", "ari", "nmi", "silhouette"}) {
      std::string mk = std::string(m) + "_mean";
      std::string sk = std::string(m) + "_std";
      if (it.value().contains(mk))
        std::printf(" %7s±%-6s", f6(it.value()[mk].get<double>()).c_str(),
                    f6(it.value()[sk].get<double>()).c_str());
      else
        std::printf(" %14s", "-");
    }
    std::printf("\n");
  }
}

void print_result(const std::string& command, const json& result) {
  if (command == "linear-bench" || command == "ablate") {
    print_method_table(result);
  } else if (command == "casestudy") {
    const json& agg = result["aggregate"];
    if (agg.contains("stage_mean_ari")) {
      std::printf("%-8s %12s %14s\n", "stage", "mean ARI", "mean eig-gap");
      const auto& ari = agg["stage_mean_ari"];
      const auto& gap = agg["stage_mean_eigen_gap"];
      for (std::size_t s = 0; s < ari.size(); ++s)
        std::printf("%-8zu %12s %14s\n", s, f6(ari[s].get<double>()).c_str(),
                    f6(gap[s].get<double>()).c_str());
      std::printf("ARI improvement: %s  (non-decreasing in %llu/%llu seeds)\n",
                  f6(agg["ari_improvement"].get<double>()).c_str(),
                  agg["nondecreasing_seeds"].get<unsigned long long>(),
                  agg["n_seeds"].get<unsigned long long>());
    }
  } else if (command == "perturb-sweep") {
    for (const char* mode : {"noise", "subset"}) {
      std::printf("%s sweep:\n%-8s %12s %12s %12s\n", mode, "level", "mean gap",
                  "mean bound", "bound rate");
      for (const auto& e : result["aggregate"][mode])
        std::printf("%-8s %12s %12s %12s\n", f6(e["level"].get<double>()).c_str(),
                    f6(e["mean_gap"].get<double>()).c_str(),
                    f6(e["mean_bound"].get<double>()).c_str(),
                    f6(e["bound_rate"].get<double>()).c_str());
    }
  } else if (command == "train") {
    const json& fin = result["final"];
    std::printf("final:");
    for (auto it = fin.begin(); it != fin.end(); ++it)
      std::printf(" %s=%s", it.key().c_str(), f6(it.value().get<double>()).c_str());
    std::printf("\n");
    if (result.contains("checkpoint"))
      std::printf("checkpoint: %s (hash %s)\nlog: %s\n",
                  result["checkpoint"].get<std::string>().c_str(),
                  result["checkpoint_hash"].get<std::string>().c_str(),
                  result["log"].get<std::string>().c_str());
  } else if (command == "tune") {
    std::printf("%-12s %-8s %16s %10s\n", "batch_size", "lambda", "mean_silhouette", "acc");
    for (const auto& r : result["rows"])
      std::printf("%-12d %-8s %16s %10s\n", r["batch_size"].get<int>(),
                  f6(r["lambda"].get<double>()).c_str(),
                  f6(r["mean_silhouette"].get<double>()).c_str(),
                  r.contains("acc") ? f6(r["acc"].get<double>()).c_str() : "-");
    std::printf("best: batch_size=%d lambda=%s\n", result["best"]["batch_size"].get<int>(),
                f6(result["best"]["lambda"].get<double>()).c_str());
  } else if (command == "metrics") {
    for (const char* m : {"acc", "ari", "nmi", "silhouette"})
      if (result.contains(m))
        std::printf("%s: %s\n", m, f6(result[m].get<double>()).c_str());
  } else if (command == "gen") {
    std::printf("wrote %s (n=%llu, k=%d)\n", result["manifest"].get<std::string>().c_str(),
                result["n_samples"].get<unsigned long long>(), result["k"].get<int>());
  }
  if (result.contains("warnings"))
    for (const auto& w : result["warnings"])
      std::fprintf(stderr, "warning: %s\n", w.get<std::string>().c_str());
}

// result emission: stdout (table or JSON) + optional files; wall time goes to
// stderr only so files stay byte-stable across runs
void emit(const CommonFlags& flags, const std::string& command,
          const std::string& result_str, double elapsed_s) {
  json result = json::parse(result_str);
  if (flags.as_json)
    std::printf("%s\n", result.dump(2).c_str());
  else
    print_result(command, result);
  if (!flags.out.empty())
    check(coper_write_report(result_str.c_str(), flags.out.c_str(), command.c_str()));
  std::fprintf(stderr, "runtime: %.2fs\n", elapsed_s);
}

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coper: permutation-augmented canonical correlation analysis "
               "for multi-view clustering"};
  app.require_subcommand(1);
  app.footer(
      "Exit codes: 0 ok; CLI parse errors use CLI11 defaults; domain errors map to\n"
      "  2 InvalidShape, 3 ParseError, 4 AlignmentError, 5 InvalidSpec,\n"
      "  6 InvalidLabels, 7 InvalidParameter, 8 SingularCovariance, 9 NotSymmetric,\n"
      "  10 EigenFailure, 11 NotPSD, 12 SingularScatter, 13 InvalidPlan,\n"
      "  14 InvalidState, 15 ConfigError, 16 TrainingDiverged, 17 IoError.\n"
      "COPER_THREADS caps seed-level worker parallelism.");

  // ---- gen ----
  auto* gen = app.add_subcommand("gen", "generate a synthetic multi-view dataset");
  struct {
    std::string preset = "mixture", out, name = "dataset";
    int k = 3;
    std::size_t n = 600;
    std::string views = "10,10";
    int latent = 4, height = 16, width = 8, confound_dim = 3;
    double separation = 4.0, noise = -1.0, style = 0.5, confound_strength = 2.5;
    std::uint64_t seed = 0;
  } g;
  gen->add_option("--preset", g.preset, "mixture | splitimg")->capture_default_str();
  gen->add_option("--k", g.k, "clusters")->capture_default_str();
  gen->add_option("--n", g.n, "samples")->capture_default_str();
  gen->add_option("--views", g.views, "per-view dims, e.g. 10,10 (mixture preset)")
      ->capture_default_str();
  gen->add_option("--latent", g.latent, "latent dimension (mixture)")->capture_default_str();
  gen->add_option("--separation", g.separation, "cluster mean scale (mixture)")
      ->capture_default_str();
  gen->add_option("--confound-dim", g.confound_dim,
                  "view-specific structured noise factors (mixture)")
      ->capture_default_str();
  gen->add_option("--confound-strength", g.confound_strength,
                  "structured noise strength (mixture)")
      ->capture_default_str();
  gen->add_option("--noise", g.noise, "view noise sigma (default per preset)");
  gen->add_option("--height", g.height, "image height (splitimg)")->capture_default_str();
  gen->add_option("--width", g.width, "image width (splitimg)")->capture_default_str();
  gen->add_option("--style", g.style, "shared style factor strength (splitimg)")
      ->capture_default_str();
  gen->add_option("--seed", g.seed, "random seed")->capture_default_str();
  gen->add_option("--out", g.out, "output directory")->required();
  gen->add_option("--name", g.name, "dataset basename")->capture_default_str();
  bool gen_json = false;
  gen->add_flag("--json", gen_json, "print the result document as JSON");

  // ---- shared experiment flags ----
  CommonFlags lb, cs, ps, tr, tu, ab;
  auto add_common = [](CLI::App* cmd, CommonFlags& f, bool with_seeds) {
    cmd->add_option("--data", f.data, "dataset manifest JSON")->required();
    cmd->add_option("--out", f.out, "directory for report files");
    cmd->add_flag("--json", f.as_json, "print the result document as JSON");
    cmd->add_option("--seed", f.seed, "base seed")->capture_default_str();
    if (with_seeds)
      cmd->add_option("--seeds", f.seeds, "number of seeds")->capture_default_str();
  };

  // ---- linear-bench ----
  auto* bench = app.add_subcommand("linear-bench", "Raw/PCA/CCA/CCA-w-perm baselines");
  add_common(bench, lb, true);
  struct {
    std::string methods = "raw,pca,cca,cca-perm";
    int k = 0, rounds = 4;
    std::size_t dim = 0;
    double ridge = 1e-4, lambda = 0.5, b_frac = 0.5, temperature = 0.5;
  } lbo;
  bench->add_option("--methods", lbo.methods, "comma list")->capture_default_str();
  bench->add_option("--k", lbo.k, "clusters (default: from manifest)");
  bench->add_option("--dim", lbo.dim, "embedding dim (default: k)");
  bench->add_option("--ridge", lbo.ridge, "covariance ridge")->capture_default_str();
  bench->add_option("--rounds", lbo.rounds, "stacked permutation rounds")
      ->capture_default_str();
  bench->add_option("--lambda", lbo.lambda, "cosine threshold")->capture_default_str();
  bench->add_option("--b-frac", lbo.b_frac, "confident fraction of N/k")
      ->capture_default_str();
  bench->add_option("--temperature", lbo.temperature, "soft k-means temperature")
      ->capture_default_str();

  // ---- casestudy ----
  auto* study = app.add_subcommand(
      "casestudy", "staged CCA -> pseudo-labels -> permuted CCA pipeline");
  add_common(study, cs, true);
  struct {
    int k = 0, rounds = 2;
    std::size_t dim = 0;
    double ridge = 1e-4, lambda = 0.5, b_frac = 0.5, temperature = 0.5;
    bool supervised = false;
  } cso;
  study->add_option("--k", cso.k, "clusters (default: from manifest)");
  study->add_option("--rounds", cso.rounds, "permutation stages")->capture_default_str();
  study->add_option("--dim", cso.dim, "embedding dim (default: k)");
  study->add_option("--ridge", cso.ridge, "covariance ridge")->capture_default_str();
  study->add_option("--lambda", cso.lambda, "cosine threshold")->capture_default_str();
  study->add_option("--b-frac", cso.b_frac, "confident fraction of N/k")
      ->capture_default_str();
  study->add_option("--temperature", cso.temperature, "soft k-means temperature")
      ->capture_default_str();
  study->add_flag("--supervised", cso.supervised, "permute with ground-truth labels");

  // ---- perturb-sweep ----
  auto* sweep = app.add_subcommand("perturb-sweep",
                                   "eigenvalue perturbation under label noise");
  add_common(sweep, ps, true);
  struct {
    int k = 0;
    std::string noise_grid = "0,0.1,0.2,0.3";
    std::string subset_grid = "0.2,0.4,0.6,0.8,1.0";
    double ridge = 1e-4;
    std::size_t pca_dim = 8;
  } pso;
  sweep->add_option("--k", pso.k, "clusters (default: from manifest)");
  sweep->add_option("--noise-grid", pso.noise_grid, "label-noise fractions")
      ->capture_default_str();
  sweep->add_option("--subset-grid", pso.subset_grid, "correct-subset fractions")
      ->capture_default_str();
  sweep->add_option("--ridge", pso.ridge, "covariance ridge")->capture_default_str();
  sweep->add_option("--pca-dim", pso.pca_dim, "PCA dim for the latent proxy")
      ->capture_default_str();

  // ---- train ----
  auto* train = app.add_subcommand("train", "end-to-end COPER training");
  add_common(train, tr, false);
  struct {
    std::string config, name = "train";
    int epochs = -1, batch = -1;
    double lr = -1.0, lambda = -1.0;
  } tro;
  train->add_option("--config", tro.config, "TrainConfig JSON file");
  train->add_option("--name", tro.name, "output file stem")->capture_default_str();
  train->add_option("--epochs", tro.epochs, "override epochs");
  train->add_option("--batch", tro.batch, "override batch size");
  train->add_option("--lr", tro.lr, "override learning rate");
  train->add_option("--lambda", tro.lambda, "override cosine threshold");

  // ---- tune ----
  auto* tune = app.add_subcommand("tune", "silhouette-driven configuration search");
  add_common(tune, tu, false);
  struct {
    std::string config, batch_sizes = "64,128,256", lambdas;
  } tuo;
  tune->add_option("--config", tuo.config, "TrainConfig JSON file");
  tune->add_option("--batch-sizes", tuo.batch_sizes, "comma list")->capture_default_str();
  tune->add_option("--lambdas", tuo.lambdas, "comma list (default: config lambda)");

  // ---- ablate ----
  auto* ablate = app.add_subcommand("ablate", "COPER component ablations");
  add_common(ablate, ab, true);
  struct {
    std::string variants = "full,linear-enc,no-corr,no-perm,no-agree", config;
  } abo;
  ablate->add_option("--variants", abo.variants, "comma list")->capture_default_str();
  ablate->add_option("--config", abo.config, "TrainConfig JSON file");

  // ---- metrics ----
  auto* metrics = app.add_subcommand("metrics", "score predicted labels");
  struct {
    std::string pred, truth, embedding, out;
    bool as_json = false;
  } mo;
  metrics->add_option("--pred", mo.pred, "predicted labels CSV")->required();
  metrics->add_option("--truth", mo.truth, "ground-truth labels CSV")->required();
  metrics->add_option("--embedding", mo.embedding, "embedding CSV for silhouette");
  metrics->add_option("--out", mo.out, "directory for report files");
  metrics->add_flag("--json", mo.as_json, "print the result document as JSON");

  CLI11_PARSE(app, argc, argv);

  auto split_csv = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
      if (c == ',') { out.push_back(cur); cur.clear(); }
      else cur.push_back(c);
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
  };
  auto split_doubles = [&](const std::string& s) {
    std::vector<double> out;
    for (const auto& t : split_csv(s)) out.push_back(std::stod(t));
    return out;
  };
  auto split_ints = [&](const std::string& s) {
    std::vector<int> out;
    for (const auto& t : split_csv(s)) out.push_back(std::stoi(t));
    return out;
  };
  auto load_config_json = [](const std::string& path) {
    json j = json::object();
    if (path.empty()) return j;
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) {
      std::fprintf(stderr, "error (IoError): cannot open config %s\n", path.c_str());
      std::exit(static_cast<int>(COPER_ERR_IO));
    }
    std::string text;
    char buf[4096];
    std::size_t got;
    while ((got = std::fread(buf, 1, sizeof(buf), f)) > 0) text.append(buf, got);
    std::fclose(f);
    try {
      j = json::parse(text);
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error (ParseError): %s: %s\n", path.c_str(), e.what());
      std::exit(static_cast<int>(COPER_ERR_PARSE));
    }
    return j;
  };

  if (gen->parsed()) {
    Timer t;
    json opts;
    opts["preset"] = g.preset;
    opts["k"] = g.k;
    opts["n"] = g.n;
    if (g.preset == "mixture") {
      opts["view_dims"] = split_ints(g.views);
      opts["latent_dim"] = g.latent;
      opts["separation"] = g.separation;
      opts["confound_dim"] = g.confound_dim;
      opts["confound_strength"] = g.confound_strength;
      if (g.noise >= 0.0) opts["noise"] = g.noise;
    } else {
      opts["height"] = g.height;
      opts["width"] = g.width;
      opts["style"] = g.style;
      if (g.noise >= 0.0) opts["noise"] = g.noise;
    }
    opts["seed"] = g.seed;
    opts["out"] = g.out;
    opts["name"] = g.name;
    char* result = nullptr;
    check(coper_run_gen(opts.dump().c_str(), &result));
    CommonFlags flags;
    flags.as_json = gen_json;
    emit(flags, "gen", take_string(result), t.seconds());
    return 0;
  }

  if (metrics->parsed()) {
    Timer t;
    char* result = nullptr;
    check(coper_run_metrics(mo.pred.c_str(), mo.truth.c_str(),
                            mo.embedding.empty() ? nullptr : mo.embedding.c_str(),
                            &result));
    CommonFlags flags;
    flags.as_json = mo.as_json;
    flags.out = mo.out;
    emit(flags, "metrics", take_string(result), t.seconds());
    return 0;
  }

  // dataset-backed commands
  auto run_with_dataset =
      [&](CommonFlags& flags, const std::string& command, const json& opts,
          coper_status (*fn)(const coper_dataset*, const char*, char**)) {
        Timer t;
        coper_dataset* ds = load_data(flags.data);
        char* result = nullptr;
        coper_status status = fn(ds, opts.dump().c_str(), &result);
        coper_dataset_free(ds);
        if (status != COPER_OK) die(status);
        emit(flags, command, take_string(result), t.seconds());
      };

  if (bench->parsed()) {
    json opts;
    opts["methods"] = split_csv(lbo.methods);
    if (lbo.k > 0) opts["k"] = lbo.k;
    if (lbo.dim > 0) opts["dim"] = lbo.dim;
    opts["ridge"] = lbo.ridge;
    opts["rounds"] = lbo.rounds;
    opts["lambda"] = lbo.lambda;
    opts["b_frac"] = lbo.b_frac;
    opts["temperature"] = lbo.temperature;
    opts["seeds"] = lb.seeds;
    opts["seed"] = lb.seed;
    run_with_dataset(lb, "linear-bench", opts, coper_run_linear_bench);
  } else if (study->parsed()) {
    json opts;
    if (cso.k > 0) opts["k"] = cso.k;
    if (cso.dim > 0) opts["dim"] = cso.dim;
    opts["rounds"] = cso.rounds;
    opts["ridge"] = cso.ridge;
    opts["lambda"] = cso.lambda;
    opts["b_frac"] = cso.b_frac;
    opts["temperature"] = cso.temperature;
    opts["supervised"] = cso.supervised;
    opts["seeds"] = cs.seeds;
    opts["seed"] = cs.seed;
    run_with_dataset(cs, "casestudy", opts, coper_run_casestudy);
  } else if (sweep->parsed()) {
    json opts;
    if (pso.k > 0) opts["k"] = pso.k;
    opts["noise_grid"] = split_doubles(pso.noise_grid);
    opts["subset_grid"] = split_doubles(pso.subset_grid);
    opts["ridge"] = pso.ridge;
    opts["pca_dim"] = pso.pca_dim;
    opts["seeds"] = ps.seeds;
    opts["seed"] = ps.seed;
    run_with_dataset(ps, "perturb-sweep", opts, coper_run_perturb_sweep);
  } else if (train->parsed()) {
    Timer t;
    json cfg = load_config_json(tro.config);
    if (tro.epochs > 0) cfg["epochs"] = tro.epochs;
    if (tro.batch > 0) cfg["batch_size"] = tro.batch;
    if (tro.lr > 0.0) cfg["learning_rate"] = tro.lr;
    if (tro.lambda >= 0.0) cfg["lambda"] = tro.lambda;
    json opts;
    opts["config"] = cfg;
    opts["seed"] = tr.seed;
    opts["name"] = tro.name;
    coper_dataset* ds = load_data(tr.data);
    char* result = nullptr;
    coper_status status = coper_run_train(ds, opts.dump().c_str(),
                                          tr.out.empty() ? nullptr : tr.out.c_str(),
                                          &result);
    coper_dataset_free(ds);
    if (status != COPER_OK) die(status);
    // train writes its own files; emit only prints
    CommonFlags flags = tr;
    flags.out.clear();
    emit(flags, "train", take_string(result), t.seconds());
  } else if (tune->parsed()) {
    json opts;
    opts["config"] = load_config_json(tuo.config);
    opts["batch_sizes"] = split_ints(tuo.batch_sizes);
    if (!tuo.lambdas.empty()) opts["lambdas"] = split_doubles(tuo.lambdas);
    opts["seed"] = tu.seed;
    run_with_dataset(tu, "tune", opts, coper_run_tune);
  } else if (ablate->parsed()) {
    json opts;
    opts["variants"] = split_csv(abo.variants);
    opts["config"] = load_config_json(abo.config);
    opts["seeds"] = ab.seeds;
    opts["seed"] = ab.seed;
    run_with_dataset(ab, "ablate", opts, coper_run_ablate);
  }
  return 0;
}
