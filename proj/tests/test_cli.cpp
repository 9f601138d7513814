// End-to-end checks of the CLI binary: exit codes, reproducible output files,
// JSON/table agreement. Invoked by ctest with the binary path as argv[1].

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int g_failures = 0;

void check(bool ok, const std::string& what) {
  std::printf("[%s] %s\n", ok ? "ok" : "FAIL", what.c_str());
  if (!ok) ++g_failures;
}

struct RunResult {
  int exit_code;
  std::string out;
};

RunResult run(const std::string& cmd) {
  std::string full = cmd + " > /tmp/coper_cli_stdout.txt 2> /tmp/coper_cli_stderr.txt";
  int rc = std::system(full.c_str());
  std::ifstream in("/tmp/coper_cli_stdout.txt");
  std::string out((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return {WEXITSTATUS(rc), out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

fs::path fresh_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("coper_cli_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: test_cli <path-to-coper-binary>\n");
    return 2;
  }
  std::string cli = argv[1];

  // --- gen determinism: byte-identical across two runs ---
  fs::path g1 = fresh_dir("gen1"), g2 = fresh_dir("gen2");
  std::string gen_flags = " gen --k 3 --n 60 --views 6,5 --seed 7 --out ";
  RunResult r1 = run(cli + gen_flags + g1.string());
  RunResult r2 = run(cli + gen_flags + g2.string());
  check(r1.exit_code == 0 && r2.exit_code == 0, "gen exits 0");
  check(fs::exists(g1 / "dataset.json"), "gen wrote a manifest");
  bool identical = true;
  for (const char* f : {"dataset.json", "dataset_view0.csv", "dataset_view1.csv",
                        "dataset_labels.csv"})
    identical = identical && slurp(g1 / f) == slurp(g2 / f) && !slurp(g1 / f).empty();
  check(identical, "gen output files byte-identical across runs");

  std::string manifest = (g1 / "dataset.json").string();

  // --- different seed differs ---
  fs::path g3 = fresh_dir("gen3");
  run(cli + " gen --k 3 --n 60 --views 6,5 --seed 8 --out " + g3.string());
  check(slurp(g3 / "dataset_view0.csv") != slurp(g1 / "dataset_view0.csv"),
        "different seed produces different data");

  // --- invalid spec exits with the InvalidSpec code ---
  RunResult bad = run(cli + " gen --k 3 --n 60 --views 0,5 --out " + fresh_dir("bad").string());
  check(bad.exit_code == 5, "zero-dim view exits with code 5 (InvalidSpec)");

  // --- linear-bench determinism + --json/table agreement ---
  fs::path b1 = fresh_dir("bench1"), b2 = fresh_dir("bench2");
  std::string bench_flags = " linear-bench --data " + manifest + " --seeds 2 --out ";
  RunResult hb = run(cli + bench_flags + b1.string());
  RunResult jb = run(cli + bench_flags + b2.string() + " --json");
  check(hb.exit_code == 0 && jb.exit_code == 0, "linear-bench exits 0");
  check(slurp(b1 / "linear-bench.json") == slurp(b2 / "linear-bench.json") &&
            slurp(b1 / "linear-bench.csv") == slurp(b2 / "linear-bench.csv"),
        "linear-bench report files byte-identical across runs");

  // table prints the same numbers the JSON carries (to printed precision)
  json doc = json::parse(jb.out);
  bool cross_format = true;
  {
    std::stringstream table(hb.out);
    std::string line;
    std::getline(table, line);  // header
    while (std::getline(table, line)) {
      if (line.empty()) continue;
      std::stringstream ls(line);
      std::string method;
      ls >> method;
      if (!doc["aggregate"].contains(method)) { cross_format = false; break; }
      std::string cell;
      ls >> cell;  // acc mean±std
      double acc_mean = std::atof(cell.substr(0, cell.find("\xc2\xb1")).c_str());
      double expect = doc["aggregate"][method]["acc_mean"].get<double>();
      if (std::abs(acc_mean - expect) > 5e-7) { cross_format = false; break; }
    }
  }
  check(cross_format, "--json and table render the same numbers");

  // --- metrics command ---
  fs::path m = fresh_dir("metrics");
  {
    std::ofstream pred(m / "pred.csv");
    pred << "0\n1\n0\n1\n";
    std::ofstream truth(m / "truth.csv");
    truth << "1\n0\n1\n0\n";
  }
  RunResult mm = run(cli + " metrics --pred " + (m / "pred.csv").string() + " --truth " +
                     (m / "truth.csv").string() + " --json");
  check(mm.exit_code == 0, "metrics exits 0");
  check(json::parse(mm.out)["acc"].get<double>() == 1.0, "metrics acc correct");

  // missing file -> IoError 17
  RunResult miss = run(cli + " metrics --pred /nope.csv --truth " +
                       (m / "truth.csv").string());
  check(miss.exit_code == 17, "missing label file exits with code 17 (IoError)");

  // --- ablate: unknown variant lists valid ones, exit 7 ---
  RunResult unk = run(cli + " ablate --data " + manifest + " --variants bogus --seeds 1");
  check(unk.exit_code == 7, "unknown variant exits with code 7 (InvalidParameter)");
  check(slurp("/tmp/coper_cli_stderr.txt").find("no-perm") != std::string::npos,
        "unknown-variant error lists the valid variants");

  // --- train determinism: reproducible checkpoint hash ---
  fs::path t1 = fresh_dir("train1"), t2 = fresh_dir("train2");
  std::string cfg_path = (fresh_dir("cfg") / "cfg.json").string();
  {
    std::ofstream cfg(cfg_path);
    cfg << R"({"epochs": 8, "batch_size": 24, "embed_dim": 4, "encoder_hidden": [6]})";
  }
  std::string train_flags = " train --data " + manifest + " --config " + cfg_path +
                            " --seed 4 --json --out ";
  RunResult tr1 = run(cli + train_flags + t1.string());
  RunResult tr2 = run(cli + train_flags + t2.string());
  check(tr1.exit_code == 0 && tr2.exit_code == 0, "train exits 0");
  bool train_identical =
      slurp(t1 / "train_checkpoint.json") == slurp(t2 / "train_checkpoint.json") &&
      slurp(t1 / "train_log.csv") == slurp(t2 / "train_log.csv") &&
      !slurp(t1 / "train_checkpoint.json").empty();
  check(train_identical, "train checkpoint and log byte-identical across runs");
  check(json::parse(tr1.out)["checkpoint_hash"] == json::parse(tr2.out)["checkpoint_hash"],
        "checkpoint hash reproducible");

  // --- casestudy + perturb-sweep smoke with files ---
  fs::path c1 = fresh_dir("case1");
  RunResult cs = run(cli + " casestudy --data " + manifest +
                     " --seeds 2 --rounds 1 --out " + c1.string());
  check(cs.exit_code == 0 && fs::exists(c1 / "casestudy.csv"), "casestudy runs and writes files");

  fs::path p1 = fresh_dir("sweep1");
  RunResult psw = run(cli + " perturb-sweep --data " + manifest +
                      " --seeds 2 --noise-grid 0,0.1 --subset-grid 0.5,1.0 --out " +
                      p1.string());
  check(psw.exit_code == 0 && fs::exists(p1 / "perturb-sweep.csv"),
        "perturb-sweep runs and writes files");
  {
    std::string csv = slurp(p1 / "perturb-sweep.csv");
    check(csv.rfind("mode,level,seed,max_gap,spectral_bound,bound_satisfied", 0) == 0,
          "perturb-sweep CSV has the documented columns");
  }

  // --- tune smoke ---
  RunResult tn = run(cli + " tune --data " + manifest +
                     " --batch-sizes 24,30 --config " + cfg_path + " --json");
  check(tn.exit_code == 0, "tune exits 0");
  check(json::parse(tn.out).contains("best"), "tune reports a best configuration");

  std::printf("%s\n", g_failures == 0 ? "ALL CLI CHECKS PASSED" : "CLI CHECKS FAILED");
  return g_failures == 0 ? 0 : 1;
}
