#ifndef COPER_CORE_HARNESS_HPP
#define COPER_CORE_HARNESS_HPP

#include <string>

#include <json.hpp>

#include "core/dataset.hpp"
#include "core/neural.hpp"

namespace coper::harness {

using nlohmann::json;

// All runners take an options document and return a result document. Wall
// time is intentionally absent from results so files are byte-stable; the
// CLI reports it on the console.

json run_gen(const json& options);
json run_linear_bench(const MultiViewDataset& ds, const json& options);
json run_casestudy(const MultiViewDataset& ds, const json& options);
json run_perturb_sweep(const MultiViewDataset& ds, const json& options);
json run_train(const MultiViewDataset& ds, const json& options,
               const std::string& out_dir);
json run_ablate(const MultiViewDataset& ds, const json& options);
json run_tune(const MultiViewDataset& ds, const json& options);
json run_metrics(const std::vector<int>& pred, const std::vector<int>& truth,
                 const Matrix* embedding);

// <stem>.json + <stem>.csv under out_dir ("" = skip).
void write_experiment_files(const json& result, const std::string& out_dir,
                            const std::string& stem);

TrainConfig train_config_from_json(const json& j);
json train_config_to_json(const TrainConfig& cfg);

void save_checkpoint(const CoperModel& model, const std::string& path);
CoperModel load_checkpoint(const std::string& path);

void write_train_log_csv(const std::vector<TrainLogRow>& log, const std::string& path);

// Seed-level parallelism, capped by COPER_THREADS (default 1 worker per
// hardware thread). Results land in input order.
std::size_t worker_count(std::size_t jobs);

}  // namespace coper::harness

#endif
