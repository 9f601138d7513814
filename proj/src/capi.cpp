#include "coper/coper.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "core/cca.hpp"
#include "core/harness.hpp"
#include "core/kmeans.hpp"
#include "core/metrics.hpp"

namespace {

thread_local std::string g_last_error;

coper_status to_status(coper::ErrorCode code) {
  return static_cast<coper_status>(static_cast<int>(code));
}

template <typename Fn>
coper_status guarded(Fn&& fn) {
  try {
    fn();
    return COPER_OK;
  } catch (const coper::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return COPER_ERR_UNKNOWN;
  } catch (...) {
    g_last_error = "unknown failure";
    return COPER_ERR_UNKNOWN;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

nlohmann::json parse_options(const char* options_json) {
  if (!options_json || !*options_json) return nlohmann::json::object();
  try {
    return nlohmann::json::parse(options_json);
  } catch (const std::exception& e) {
    coper::fail(coper::ErrorCode::ParseError, std::string("options JSON: ") + e.what());
  }
}

std::vector<int> read_label_csv(const char* path) {
  if (!path) coper::fail(coper::ErrorCode::InvalidParameter, "label file path is null");
  std::ifstream in(path);
  if (!in) coper::fail(coper::ErrorCode::IoError, std::string("cannot open: ") + path);
  std::vector<int> labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      labels.push_back(std::stoi(line));
    } catch (...) {
      coper::fail(coper::ErrorCode::ParseError,
                  std::string(path) + ": non-numeric token at row " + std::to_string(lineno));
    }
  }
  if (labels.empty())
    coper::fail(coper::ErrorCode::ParseError, std::string(path) + ": no labels");
  return labels;
}

}  // namespace

struct coper_dataset {
  coper::MultiViewDataset ds;
};

struct coper_cca_model {
  coper::CcaModel model;
};

extern "C" {

const char* coper_status_name(coper_status status) {
  if (status == COPER_ERR_UNKNOWN) return "Unknown";
  return coper::error_code_name(static_cast<coper::ErrorCode>(static_cast<int>(status)));
}

const char* coper_last_error(void) { return g_last_error.c_str(); }

void coper_string_free(char* s) { std::free(s); }

coper_status coper_dataset_load(const char* manifest_path, coper_dataset** out) {
  return guarded([&] {
    if (!manifest_path || !out)
      coper::fail(coper::ErrorCode::InvalidParameter, "null argument");
    auto* handle = new coper_dataset{coper::load_dataset(manifest_path)};
    *out = handle;
  });
}

coper_status coper_dataset_save(const coper_dataset* ds, const char* dir, const char* name) {
  return guarded([&] {
    if (!ds || !dir) coper::fail(coper::ErrorCode::InvalidParameter, "null argument");
    coper::save_dataset(ds->ds, dir, name ? name : "dataset");
  });
}

void coper_dataset_free(coper_dataset* ds) { delete ds; }

size_t coper_dataset_n_samples(const coper_dataset* ds) {
  return ds ? ds->ds.n_samples() : 0;
}
size_t coper_dataset_n_views(const coper_dataset* ds) { return ds ? ds->ds.n_views() : 0; }
size_t coper_dataset_view_dim(const coper_dataset* ds, size_t view) {
  return ds && view < ds->ds.n_views() ? ds->ds.views[view].rows : 0;
}
int coper_dataset_k(const coper_dataset* ds) { return ds ? ds->ds.k : 0; }
int coper_dataset_has_labels(const coper_dataset* ds) {
  return ds && ds->ds.has_labels() ? 1 : 0;
}

coper_status coper_dataset_labels(const coper_dataset* ds, int* out) {
  return guarded([&] {
    if (!ds || !out) coper::fail(coper::ErrorCode::InvalidParameter, "null argument");
    if (!ds->ds.has_labels())
      coper::fail(coper::ErrorCode::InvalidState, "dataset has no labels");
    std::memcpy(out, ds->ds.true_labels.data(), ds->ds.true_labels.size() * sizeof(int));
  });
}

coper_status coper_dataset_view(const coper_dataset* ds, size_t view, double* out) {
  return guarded([&] {
    if (!ds || !out) coper::fail(coper::ErrorCode::InvalidParameter, "null argument");
    if (view >= ds->ds.n_views())
      coper::fail(coper::ErrorCode::InvalidParameter, "view index out of range");
    const coper::Matrix& m = ds->ds.views[view];
    std::memcpy(out, m.data.data(), m.data.size() * sizeof(double));
  });
}

coper_status coper_fit_cca(const double* x1, size_t d1, const double* x2, size_t d2,
                           size_t n, size_t dim, double ridge, coper_cca_model** out) {
  return guarded([&] {
    if (!x1 || !x2 || !out) coper::fail(coper::ErrorCode::InvalidParameter, "null argument");
    coper::Matrix m1(d1, n), m2(d2, n);
    std::memcpy(m1.data.data(), x1, d1 * n * sizeof(double));
    std::memcpy(m2.data.data(), x2, d2 * n * sizeof(double));
    *out = new coper_cca_model{coper::fit_cca(m1, m2, dim, ridge)};
  });
}

void coper_cca_model_free(coper_cca_model* model) { delete model; }

size_t coper_cca_dim(const coper_cca_model* model) {
  return model ? model->model.correlations.size() : 0;
}

coper_status coper_cca_correlations(const coper_cca_model* model, double* out) {
  return guarded([&] {
    if (!model || !out) coper::fail(coper::ErrorCode::InvalidParameter, "null argument");
    std::memcpy(out, model->model.correlations.data(),
                model->model.correlations.size() * sizeof(double));
  });
}

coper_status coper_cca_transform(const coper_cca_model* model, int side, const double* x,
                                 size_t d, size_t n, double* out) {
  return guarded([&] {
    if (!model || !x || !out) coper::fail(coper::ErrorCode::InvalidParameter, "null argument");
    coper::Matrix mx(d, n);
    std::memcpy(mx.data.data(), x, d * n * sizeof(double));
    coper::Matrix r = coper::cca_transform(
        model->model, mx, side == 0 ? coper::CcaSide::First : coper::CcaSide::Second);
    std::memcpy(out, r.data.data(), r.data.size() * sizeof(double));
  });
}

coper_status coper_correlation_loss(const double* hv, size_t dv, const double* hw,
                                    size_t dw, size_t n, double ridge, double* out) {
  return guarded([&] {
    if (!hv || !hw || !out) coper::fail(coper::ErrorCode::InvalidParameter, "null argument");
    coper::Matrix mv(dv, n), mw(dw, n);
    std::memcpy(mv.data.data(), hv, dv * n * sizeof(double));
    std::memcpy(mw.data.data(), hw, dw * n * sizeof(double));
    *out = coper::correlation_loss(mv, mw, ridge);
  });
}

coper_status coper_kmeans(const double* x, size_t n, size_t d, int k, int restarts,
                          int max_iter, double tol, uint64_t seed, int* labels_out,
                          double* inertia_out) {
  return guarded([&] {
    if (!x || !labels_out) coper::fail(coper::ErrorCode::InvalidParameter, "null argument");
    coper::Matrix mx(n, d);
    std::memcpy(mx.data.data(), x, n * d * sizeof(double));
    coper::KMeansResult r = coper::kmeans(mx, k, restarts, max_iter, tol, seed);
    std::memcpy(labels_out, r.assignment.data(), r.assignment.size() * sizeof(int));
    if (inertia_out) *inertia_out = r.inertia;
  });
}

coper_status coper_accuracy(const int* pred, const int* truth, size_t n, double* out) {
  return guarded([&] {
    if (!pred || !truth || !out) coper::fail(coper::ErrorCode::InvalidParameter, "null argument");
    *out = coper::accuracy(std::vector<int>(pred, pred + n),
                           std::vector<int>(truth, truth + n));
  });
}

coper_status coper_adjusted_rand_index(const int* pred, const int* truth, size_t n,
                                       double* out) {
  return guarded([&] {
    if (!pred || !truth || !out) coper::fail(coper::ErrorCode::InvalidParameter, "null argument");
    *out = coper::adjusted_rand_index(std::vector<int>(pred, pred + n),
                                      std::vector<int>(truth, truth + n));
  });
}

coper_status coper_normalized_mutual_information(const int* pred, const int* truth,
                                                 size_t n, double* out) {
  return guarded([&] {
    if (!pred || !truth || !out) coper::fail(coper::ErrorCode::InvalidParameter, "null argument");
    *out = coper::normalized_mutual_information(std::vector<int>(pred, pred + n),
                                                std::vector<int>(truth, truth + n));
  });
}

coper_status coper_run_gen(const char* options_json, char** result_json) {
  return guarded([&] {
    if (!result_json) coper::fail(coper::ErrorCode::InvalidParameter, "null argument");
    *result_json = dup_string(coper::harness::run_gen(parse_options(options_json)).dump(2));
  });
}

#define COPER_DEFINE_RUNNER(capi_name, harness_fn)                                    \
  coper_status capi_name(const coper_dataset* ds, const char* options_json,           \
                         char** result_json) {                                        \
    return guarded([&] {                                                              \
      if (!ds || !result_json)                                                        \
        coper::fail(coper::ErrorCode::InvalidParameter, "null argument");             \
      *result_json =                                                                  \
          dup_string(coper::harness::harness_fn(ds->ds, parse_options(options_json))  \
                         .dump(2));                                                   \
    });                                                                               \
  }

COPER_DEFINE_RUNNER(coper_run_linear_bench, run_linear_bench)
COPER_DEFINE_RUNNER(coper_run_casestudy, run_casestudy)
COPER_DEFINE_RUNNER(coper_run_perturb_sweep, run_perturb_sweep)
COPER_DEFINE_RUNNER(coper_run_ablate, run_ablate)
COPER_DEFINE_RUNNER(coper_run_tune, run_tune)

#undef COPER_DEFINE_RUNNER

coper_status coper_run_train(const coper_dataset* ds, const char* options_json,
                             const char* out_dir, char** result_json) {
  return guarded([&] {
    if (!ds || !result_json) coper::fail(coper::ErrorCode::InvalidParameter, "null argument");
    *result_json = dup_string(
        coper::harness::run_train(ds->ds, parse_options(options_json),
                                  out_dir ? out_dir : "")
            .dump(2));
  });
}

coper_status coper_run_metrics(const char* pred_csv, const char* truth_csv,
                               const char* embedding_csv, char** result_json) {
  return guarded([&] {
    if (!result_json) coper::fail(coper::ErrorCode::InvalidParameter, "null argument");
    std::vector<int> pred = read_label_csv(pred_csv);
    std::vector<int> truth = read_label_csv(truth_csv);
    nlohmann::json result;
    if (embedding_csv) {
      // embedding CSV uses the dataset view layout: features x samples
      coper::MultiViewDataset tmp;
      std::ifstream in(embedding_csv);
      if (!in) coper::fail(coper::ErrorCode::IoError,
                           std::string("cannot open: ") + embedding_csv);
      std::vector<std::vector<double>> rows;
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> vals;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
        rows.push_back(std::move(vals));
      }
      coper::Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
      for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) m(i, j) = rows[i][j];
      result = coper::harness::run_metrics(pred, truth, &m);
    } else {
      result = coper::harness::run_metrics(pred, truth, nullptr);
    }
    *result_json = dup_string(result.dump(2));
  });
}

coper_status coper_write_report(const char* result_json, const char* out_dir,
                                const char* stem) {
  return guarded([&] {
    if (!result_json || !out_dir || !stem)
      coper::fail(coper::ErrorCode::InvalidParameter, "null argument");
    coper::harness::write_experiment_files(nlohmann::json::parse(result_json), out_dir,
                                           stem);
  });
}

}  // extern "C"
