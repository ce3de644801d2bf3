// SPDX-License-Identifier: Apache-2.0
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "doctest.h"

#include "bsm/error.hpp"
#include "bsm/experiment.hpp"

using namespace bsm;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("bsm_test_" + tag + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kSmall =
    "train.method = bsm\ntrain.noise_rate = 0.2\ntrain.max_epochs = 4\ntrain.seed = 3\n"
    "dataset.n_train = 200\ndataset.n_val = 100\n";

}  // namespace

TEST_CASE("run writes every report file with provenance") {
  TempDir tmp("run");
  const auto cfg = parse_config(kSmall);
  const auto r = run_experiment(cfg, tmp.path);
  for (const char* f : {"metrics.csv", "metrics.json", "predictions.csv", "reliability.csv", "referral.csv",
                        "threshold.csv", "distance.csv", "correlation.csv", "domain_shift.csv", "train_log.json",
                        "model_0.txt"})
    CHECK(fs::exists(tmp.path / f));
  const auto csv = slurp(tmp.path / "metrics.csv");
  CHECK(csv.rfind("# bsm 1.0.0 config_hash=" + config_hash(cfg), 0) == 0);
  CHECK(csv.find("method=bsm") != std::string::npos);
  CHECK(r.report.accuracy > 0.5);
  CHECK(r.summary.distance_samples > 0);
}

TEST_CASE("report recomputation matches the run") {
  TempDir tmp("report");
  const auto r = run_experiment(parse_config(kSmall), tmp.path).report;
  const auto again = report_from_predictions(tmp.path / "predictions.csv");
  CHECK(again.ece == r.ece);
  CHECK(again.nll == r.nll);
  CHECK(again.brier == r.brier);
  CHECK(again.roc_auc == r.roc_auc);
  CHECK(again.accuracy == r.accuracy);
  CHECK(again.config_hash == r.config_hash);
  CHECK(again.seed == r.seed);
  CHECK(again.method == "bsm");
}

TEST_CASE("saved models reproduce predictions") {
  TempDir tmp("load");
  auto cfg = parse_config(kSmall);
  run_experiment(cfg, tmp.path / "a");
  cfg.load_models_dir = (tmp.path / "a").string();
  run_experiment(cfg, tmp.path / "b");
  CHECK(slurp(tmp.path / "a" / "predictions.csv") == slurp(tmp.path / "b" / "predictions.csv"));
}

TEST_CASE("ensemble runs write one model per member") {
  TempDir tmp("ens");
  auto cfg = parse_config(std::string(kSmall) + "estimator.kind = ensemble\nestimator.members = 3\n");
  run_experiment(cfg, tmp.path);
  CHECK(fs::exists(tmp.path / "model_2.txt"));
  CHECK_FALSE(fs::exists(tmp.path / "model_3.txt"));
}

TEST_CASE("separable fixture reports perfect accuracy") {
  TempDir tmp("blobs");
  const auto cfg = parse_config(
      "train.method = ce\ntrain.max_epochs = 10\ndataset.kind = blobs\ndataset.noise = 0\n"
      "dataset.n_train = 200\ndataset.n_val = 100\n");
  CHECK(run_experiment(cfg, tmp.path).report.accuracy == 1.0);
}

TEST_CASE("sweeps") {
  TempDir tmp("sweep");
  const auto base = parse_config(kSmall);
  const std::vector<std::string> one{"0.3"};
  const auto rows = run_sweep(base, SweepAxis::alphas, one, tmp.path / "single");
  REQUIRE(rows.size() == 1);
  REQUIRE(rows[0].report.has_value());
  const auto direct = run_experiment(apply_sweep_value(base, SweepAxis::alphas, "0.3", 0), tmp.path / "direct");
  CHECK(rows[0].report->ece == direct.report.ece);
  CHECK(rows[0].report->seed == direct.report.seed);

  const std::vector<std::string> methods{"ce", "nonsense", "mixup_ce"};
  const auto mr = run_sweep(base, SweepAxis::methods, methods, tmp.path / "methods");
  REQUIRE(mr.size() == 3);
  CHECK(mr[0].report.has_value());
  CHECK_FALSE(mr[1].report.has_value());
  CHECK_FALSE(mr[1].error.empty());
  CHECK(mr[2].report->method == "mixup_ce");
  const auto table = slurp(tmp.path / "methods" / "sweep.csv");
  CHECK(table.find("axis,value,method,noise_rate,estimator,roc_auc,ece,brier,nll,accuracy,seed,status") !=
        std::string::npos);

  CHECK(apply_sweep_value(base, SweepAxis::tta_repeats, "8", 2).estimator.kind == EstimatorKind::tta);
  CHECK(apply_sweep_value(base, SweepAxis::tta_repeats, "8", 2).train.seed == base.train.seed + 2);
  CHECK(apply_sweep_value(base, SweepAxis::ensemble_sizes, "4", 0).estimator.members == 4);
  CHECK_THROWS_AS(parse_sweep_axis("depths"), Error);
}

TEST_CASE("predictions parser rejects malformed files") {
  TempDir tmp("bad");
  fs::create_directories(tmp.path);
  std::ofstream(tmp.path / "p.csv") << "# bsm 1.0.0\nfoo,bar\n";
  CHECK_THROWS_AS(read_predictions(tmp.path / "p.csv"), Error);
  CHECK_THROWS_AS(read_predictions(tmp.path / "missing.csv"), Error);
}
