// SPDX-License-Identifier: Apache-2.0
//
// bsm: command-line runner over the C API.
//
//   bsm run    --config exp.cfg [--out DIR] [--<key> VALUE ...]
//   bsm sweep  --config exp.cfg --axis alphas --values 0.3,0.5,1 [--out DIR]
//   bsm report --predictions DIR/predictions.csv [--out DIR]
//
// Every configuration key is also a flag (e.g. --train.method bsm). A
// relative output directory is resolved under $BSM_OUTPUT_ROOT when set.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bsm/bsm.h"

namespace {

struct ConfigDeleter {
  void operator()(bsm_config* c) const { bsm_config_free(c); }
};
struct ReportDeleter {
  void operator()(bsm_report* r) const { bsm_report_free(r); }
};
using ConfigPtr = std::unique_ptr<bsm_config, ConfigDeleter>;
using ReportPtr = std::unique_ptr<bsm_report, ReportDeleter>;

int report_failure(bsm_status status, const std::string& context) {
  std::fprintf(stderr, "bsm: %s: %s (%s)\n", context.c_str(), bsm_last_error(), bsm_status_name(status));
  return status == BSM_ERR_TRAINING_DIVERGENCE ? 3 : 2;
}

std::string resolve_output(const std::string& dir) {
  const char* root = std::getenv("BSM_OUTPUT_ROOT");
  std::filesystem::path p(dir);
  if (root && *root && p.is_relative()) p = std::filesystem::path(root) / p;
  return p.string();
}

struct ConfigArgs {
  std::string config_path;
  std::string out_dir;
  std::map<std::string, std::string> overrides;
};

void add_config_flags(CLI::App* cmd, ConfigArgs& args) {
  cmd->add_option("-c,--config", args.config_path, "Experiment config file (key = value lines)");
  cmd->add_option("-o,--out", args.out_dir, "Output directory (overrides output.dir)");
  for (size_t i = 0; i < bsm_config_key_count(); ++i) {
    const std::string key = bsm_config_key_name(i);
    cmd->add_option_function<std::string>(
        "--" + key, [&args, key](const std::string& v) { args.overrides[key] = v; }, "Sets " + key);
  }
}

// Loads the file (if any) and applies flag overrides in key order.
int build_config(const ConfigArgs& args, ConfigPtr& out) {
  bsm_config* raw = nullptr;
  bsm_status st;
  if (!args.config_path.empty()) {
    st = bsm_config_load(args.config_path.c_str(), &raw);
  } else {
    std::string text;
    for (const auto& [k, v] : args.overrides) text += k + " = " + v + "\n";
    st = bsm_config_parse(text.c_str(), &raw);
  }
  if (st != BSM_OK) return report_failure(st, "config");
  out.reset(raw);
  for (const auto& [k, v] : args.overrides) {
    st = bsm_config_set(out.get(), k.c_str(), v.c_str());
    if (st != BSM_OK) return report_failure(st, "config");
  }
  return 0;
}

std::string output_dir(const ConfigArgs& args, const bsm_config* cfg) {
  if (!args.out_dir.empty()) return resolve_output(args.out_dir);
  size_t needed = 0;
  bsm_config_get(cfg, "output.dir", nullptr, 0, &needed);
  std::string buf(needed, '\0');
  bsm_config_get(cfg, "output.dir", buf.data(), buf.size(), &needed);
  buf.resize(needed ? needed - 1 : 0);
  return resolve_output(buf);
}

void print_report(const bsm_report* r) {
  const std::pair<const char*, bsm_metric> rows[] = {{"roc_auc", BSM_METRIC_ROC_AUC},
                                                     {"ece", BSM_METRIC_ECE},
                                                     {"brier", BSM_METRIC_BRIER},
                                                     {"nll", BSM_METRIC_NLL},
                                                     {"accuracy", BSM_METRIC_ACCURACY}};
  for (const auto& [name, id] : rows) {
    double v = 0.0;
    bsm_report_get(r, id, &v);
    std::printf("%-9s %.6f\n", name, v);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Label-noise-robust training and uncertainty evaluation"};
  app.set_version_flag("--version", std::string(bsm_version()));
  app.require_subcommand(1);

  ConfigArgs run_args;
  auto* run = app.add_subcommand("run", "Train, evaluate and write every report file");
  add_config_flags(run, run_args);

  ConfigArgs sweep_args;
  std::string axis;
  std::vector<std::string> values;
  auto* sweep = app.add_subcommand("sweep", "Run one experiment per value along an axis");
  add_config_flags(sweep, sweep_args);
  sweep->add_option("--axis", axis, "alphas | noise_rates | methods | tta_repeats | ensemble_sizes")->required();
  sweep->add_option("--values", values, "Comma separated values")->required()->delimiter(',');

  std::string predictions;
  std::string report_out;
  auto* report = app.add_subcommand("report", "Recompute metrics from a persisted predictions.csv");
  report->add_option("-p,--predictions", predictions, "predictions.csv written by `run`")->required();
  report->add_option("-o,--out", report_out, "Also write metrics.csv/metrics.json here");

  CLI11_PARSE(app, argc, argv);

  if (*run) {
    ConfigPtr cfg;
    if (int rc = build_config(run_args, cfg)) return rc;
    const auto dir = output_dir(run_args, cfg.get());
    bsm_report* raw = nullptr;
    const auto st = bsm_run(cfg.get(), dir.c_str(), &raw);
    if (st != BSM_OK) return report_failure(st, "run");
    ReportPtr r(raw);
    std::printf("wrote %s\n", dir.c_str());
    print_report(r.get());
    return 0;
  }

  if (*sweep) {
    ConfigPtr cfg;
    if (int rc = build_config(sweep_args, cfg)) return rc;
    const auto dir = output_dir(sweep_args, cfg.get());
    std::vector<const char*> vals;
    for (const auto& v : values) vals.push_back(v.c_str());
    size_t failed = 0;
    const auto st = bsm_sweep(cfg.get(), axis.c_str(), vals.data(), vals.size(), dir.c_str(), &failed);
    if (st != BSM_OK) return report_failure(st, "sweep");
    std::printf("wrote %s/sweep.csv (%zu of %zu members failed)\n", dir.c_str(), failed, vals.size());
    return failed == 0 ? 0 : 1;
  }

  bsm_report* raw = nullptr;
  const auto st = bsm_report_from_predictions(predictions.c_str(), &raw);
  if (st != BSM_OK) return report_failure(st, "report");
  ReportPtr r(raw);
  print_report(r.get());
  if (!report_out.empty()) {
    const auto dir = resolve_output(report_out);
    const auto wst = bsm_report_write(r.get(), dir.c_str(), 1, 1);
    if (wst != BSM_OK) return report_failure(wst, "report");
  }
  return 0;
}
