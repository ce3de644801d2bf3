// SPDX-License-Identifier: Apache-2.0
#include "bsm/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"

#include "bsm/analysis.hpp"
#include "bsm/dataset.hpp"
#include "bsm/error.hpp"
#include "bsm/estimators.hpp"
#include "bsm/rng.hpp"

namespace bsm {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io_error, "cannot write " + path.string());
  return out;
}

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? std::numeric_limits<double>::quiet_NaN() : s / static_cast<double>(v.size());
}

nlohmann::json json_num(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

EstimatorOutput estimate(const ExperimentConfig& cfg, std::span<const MlpModel> models, const Matrix& inputs,
                         std::uint64_t stream) {
  Rng rng(derive_seed(cfg.train.seed, stream));
  switch (cfg.estimator.kind) {
    case EstimatorKind::single: return single_forward(models.front(), inputs);
    case EstimatorKind::ensemble: return ensemble_predict(models, inputs);
    case EstimatorKind::mc_dropout:
      return mc_dropout_predict(models.front(), inputs, cfg.estimator.passes, cfg.estimator.tau_inv, rng);
    case EstimatorKind::tta:
      return tta_predict(models.front(), inputs, cfg.train.policy, cfg.estimator.repeats, rng);
  }
  fail(ErrorCode::invalid_input, "unknown estimator");
}

void write_reliability(const fs::path& path, const ReliabilityBins& bins, const std::string& prov) {
  auto out = open_out(path);
  out << prov << "bin_lo,bin_hi,count,conf_mean,acc,gap\n";
  for (const auto& b : bins.bins) {
    out << num(b.lo) << ',' << num(b.hi) << ',' << b.count << ',';
    if (b.count == 0) out << ",,\n";
    else out << num(b.conf_mean) << ',' << num(b.acc) << ',' << num(b.gap()) << '\n';
  }
}

}  // namespace

std::string provenance_line(const MetricsReport& r) {
  return "# bsm " + r.version + " config_hash=" + r.config_hash + " seed=" + std::to_string(r.seed) +
         " method=" + r.method + " noise_rate=" + num(r.noise_rate) + " estimator=" + r.estimator +
         " bin_width=" + num(r.bin_width) + "\n";
}

MetricsReport compute_metrics(const PredictionBatch& batch, double bin_width) {
  MetricsReport r;
  r.bin_width = bin_width;
  r.ece = expected_calibration_error(batch, bin_width).ece;
  r.brier = brier_score(batch);
  r.nll = negative_log_likelihood_binary(batch);
  r.accuracy = accuracy(batch);
  try {
    r.roc_auc = roc_auc(positive_scores(batch), batch.labels);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::undefined_metric) throw;
    r.roc_auc = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

void write_predictions(const fs::path& path, const PredictionBatch& batch, const MetricsReport& provenance) {
  auto out = open_out(path);
  out << provenance_line(provenance) << "sample_index,label";
  for (std::size_t k = 0; k < batch.num_classes(); ++k) out << ",p" << k;
  out << '\n';
  for (std::size_t i = 0; i < batch.size(); ++i) {
    out << i << ',' << batch.labels[i];
    for (double p : batch.row(i)) out << ',' << num(p);
    out << '\n';
  }
}

PredictionBatch read_predictions(const fs::path& path, MetricsReport* provenance) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_error, "cannot read " + path.string());
  std::string line;
  MetricsReport prov;
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::size_t k = 0;
  bool header_seen = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ss(line.substr(1));
      std::string tok;
      ss >> tok;
      if (tok == "bsm") ss >> prov.version;
      while (ss >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const auto key = tok.substr(0, eq), val = tok.substr(eq + 1);
        if (key == "config_hash") prov.config_hash = val;
        else if (key == "seed") prov.seed = std::stoull(val);
        else if (key == "method") prov.method = val;
        else if (key == "noise_rate") prov.noise_rate = std::strtod(val.c_str(), nullptr);
        else if (key == "estimator") prov.estimator = val;
        else if (key == "bin_width") prov.bin_width = std::strtod(val.c_str(), nullptr);
      }
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!header_seen) {
      if (cells.size() < 4 || cells[0] != "sample_index" || cells[1] != "label")
        fail(ErrorCode::parse_error, path.string() + ": missing 'sample_index,label,p0,...' header");
      k = cells.size() - 2;
      header_seen = true;
      continue;
    }
    if (cells.size() != k + 2) fail(ErrorCode::parse_error, path.string() + ": line " + std::to_string(lineno) + " has wrong column count");
    labels.push_back(std::stoi(cells[1]));
    std::vector<double> r(k);
    for (std::size_t c = 0; c < k; ++c) {
      char* end = nullptr;
      r[c] = std::strtod(cells[c + 2].c_str(), &end);
      if (end == cells[c + 2].c_str()) fail(ErrorCode::parse_error, path.string() + ": bad probability on line " + std::to_string(lineno));
    }
    rows.push_back(std::move(r));
  }
  if (!header_seen) fail(ErrorCode::parse_error, path.string() + ": empty predictions file");
  PredictionBatch batch;
  batch.probs.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t c = 0; c < k; ++c) batch.probs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
  batch.labels = std::move(labels);
  validate(batch);
  if (provenance) *provenance = prov;
  return batch;
}

MetricsReport report_from_predictions(const fs::path& path) {
  MetricsReport prov;
  const auto batch = read_predictions(path, &prov);
  MetricsReport r = compute_metrics(batch, prov.bin_width);
  r.method = prov.method;
  r.noise_rate = prov.noise_rate;
  r.estimator = prov.estimator;
  r.seed = prov.seed;
  r.config_hash = prov.config_hash;
  if (!prov.version.empty()) r.version = prov.version;
  return r;
}

void write_metrics(const fs::path& dir, const MetricsReport& r, bool csv, bool json, const AnalysisSummary* summary) {
  if (csv) {
    auto out = open_out(dir / "metrics.csv");
    out << provenance_line(r) << "method,noise_rate,estimator,roc_auc,ece,brier,nll,accuracy,seed\n";
    out << r.method << ',' << num(r.noise_rate) << ',' << r.estimator << ',' << num(r.roc_auc) << ',' << num(r.ece)
        << ',' << num(r.brier) << ',' << num(r.nll) << ',' << num(r.accuracy) << ',' << r.seed << '\n';
  }
  if (json) {
    nlohmann::json j;
    j["method"] = r.method;
    j["noise_rate"] = r.noise_rate;
    j["estimator"] = r.estimator;
    j["roc_auc"] = json_num(r.roc_auc);
    j["ece"] = r.ece;
    j["brier"] = r.brier;
    j["nll"] = r.nll;
    j["accuracy"] = r.accuracy;
    j["bin_width"] = r.bin_width;
    j["provenance"] = {{"config_hash", r.config_hash}, {"seed", r.seed}, {"version", r.version}};
    if (summary) {
      j["analysis"] = {{"spearman_similarity_rho", json_num(summary->spearman_similarity_rho)},
                       {"spearman_similarity_p", json_num(summary->spearman_similarity_p)},
                       {"spearman_distance_rho", json_num(summary->spearman_distance_rho)},
                       {"spearman_distance_p", json_num(summary->spearman_distance_p)},
                       {"mean_uncertainty_in_domain", json_num(summary->mean_uncertainty_in_domain)},
                       {"mean_uncertainty_shifted", json_num(summary->mean_uncertainty_shifted)},
                       {"distance_samples", summary->distance_samples}};
    }
    auto out = open_out(dir / "metrics.json");
    out << j.dump(2) << '\n';
  }
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) fail(ErrorCode::io_error, "cannot create " + out_dir.string() + ": " + ec.message());

  const Dataset data = build_dataset(cfg.train.dataset, cfg.train.noise_rate, cfg.train.seed);

  MetricsReport prov;
  prov.method = to_string(cfg.train.method);
  prov.noise_rate = cfg.train.noise_rate;
  prov.estimator = to_string(cfg.estimator.kind);
  prov.seed = cfg.train.seed;
  prov.config_hash = config_hash(cfg);
  prov.bin_width = cfg.analysis.bin_width;
  const std::string prov_line = provenance_line(prov);

  std::vector<MlpModel> models;
  const int count = cfg.model_count();
  if (!cfg.load_models_dir.empty()) {
    for (int m = 0; m < count; ++m)
      models.push_back(load_model(fs::path(cfg.load_models_dir) / ("model_" + std::to_string(m) + ".txt")));
  } else {
    nlohmann::json log;
    log["config_hash"] = prov.config_hash;
    log["version"] = kVersion;
    log["members"] = nlohmann::json::array();
    for (int m = 0; m < count; ++m) {
      auto trained = train(cfg.train, data, m);
      log["members"].push_back(to_json(trained.log));
      models.push_back(std::move(trained.model));
    }
    auto out = open_out(out_dir / "train_log.json");
    out << log.dump(2) << '\n';
  }
  for (int m = 0; m < count; ++m) save_model(out_dir / ("model_" + std::to_string(m) + ".txt"), models[static_cast<std::size_t>(m)]);

  // Metrics on the (clean) validation split.
  const auto est = estimate(cfg, models, data.val.inputs, 201);
  const PredictionBatch batch = est.batch(data.val.clean_labels);
  MetricsReport report = compute_metrics(batch, cfg.analysis.bin_width);
  report.method = prov.method;
  report.noise_rate = prov.noise_rate;
  report.estimator = prov.estimator;
  report.seed = prov.seed;
  report.config_hash = prov.config_hash;

  write_predictions(out_dir / "predictions.csv", batch, prov);
  write_reliability(out_dir / "reliability.csv", expected_calibration_error(batch, cfg.analysis.bin_width).reliability,
                    prov_line);

  const auto correct = correctness(batch);
  const auto scores = positive_scores(batch);
  {
    const auto curve = referral_curve(est.uncertainty, correct, scores, batch.labels, cfg.analysis.fractions);
    auto out = open_out(out_dir / "referral.csv");
    out << prov_line << "rejected_fraction,n_retained,accuracy,roc_auc\n";
    for (const auto& p : curve.points)
      out << num(p.rejected_fraction) << ',' << p.n_retained << ',' << num(p.accuracy) << ','
          << (p.roc_auc ? num(*p.roc_auc) : std::string()) << '\n';
  }
  {
    const auto curve = threshold_curve(est.uncertainty, correct, cfg.analysis.thresholds);
    auto out = open_out(out_dir / "threshold.csv");
    out << prov_line << "threshold,n_retained,accuracy\n";
    for (const auto& p : curve.points) out << num(p.threshold) << ',' << p.n_retained << ',' << num(p.accuracy) << '\n';
  }

  AnalysisSummary summary;
  {
    const Matrix train_features = forward(models.front(), data.train.inputs, false).features;
    const Matrix val_features = forward(models.front(), data.val.inputs, false).features;
    const auto dist = distance_records(val_features, train_features, est.uncertainty, correct);
    summary.distance_samples = dist.records.size();
    auto out = open_out(out_dir / "distance.csv");
    out << prov_line << "sample_index,min_cosine_distance,similarity,uncertainty,correct\n";
    std::vector<double> d, s, u;
    for (const auto& r : dist.records) {
      out << r.sample_index << ',' << num(r.min_cosine_distance) << ',' << num(r.similarity()) << ','
          << num(r.uncertainty) << ',' << (r.correct ? 1 : 0) << '\n';
      d.push_back(r.min_cosine_distance);
      s.push_back(r.similarity());
      u.push_back(r.uncertainty);
    }
    auto corr = [&](std::span<const double> x) -> Correlation {
      try {
        return spearman(x, u);
      } catch (const Error&) {
        return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
      }
    };
    const auto cs = corr(s);
    const auto cd = corr(d);
    summary.spearman_similarity_rho = cs.rho;
    summary.spearman_similarity_p = cs.p_value;
    summary.spearman_distance_rho = cd.rho;
    summary.spearman_distance_p = cd.p_value;
    auto cout_ = open_out(out_dir / "correlation.csv");
    cout_ << prov_line << "variable,rho,p_value,n\n";
    cout_ << "similarity," << num(cs.rho) << ',' << num(cs.p_value) << ',' << u.size() << '\n';
    cout_ << "distance," << num(cd.rho) << ',' << num(cd.p_value) << ',' << u.size() << '\n';
  }
  {
    const auto sd = column_stddev(data.train.inputs);
    Matrix shifted = data.val.inputs;
    for (Eigen::Index c = 0; c < shifted.cols(); ++c)
      shifted.col(c).array() += cfg.analysis.domain_shift * sd[static_cast<std::size_t>(c)];
    const auto shifted_est = estimate(cfg, models, shifted, 202);
    summary.mean_uncertainty_in_domain = mean(est.uncertainty);
    summary.mean_uncertainty_shifted = mean(shifted_est.uncertainty);
    auto out = open_out(out_dir / "domain_shift.csv");
    out << prov_line << "set,mean_uncertainty,n\n";
    out << "in_domain," << num(summary.mean_uncertainty_in_domain) << ',' << est.uncertainty.size() << '\n';
    out << "shifted," << num(summary.mean_uncertainty_shifted) << ',' << shifted_est.uncertainty.size() << '\n';
  }

  write_metrics(out_dir, report, cfg.write_csv, cfg.write_json, &summary);
  return {report, summary};
}

SweepAxis parse_sweep_axis(const std::string& name) {
  if (name == "alphas") return SweepAxis::alphas;
  if (name == "noise_rates") return SweepAxis::noise_rates;
  if (name == "methods") return SweepAxis::methods;
  if (name == "tta_repeats") return SweepAxis::tta_repeats;
  if (name == "ensemble_sizes") return SweepAxis::ensemble_sizes;
  fail(ErrorCode::invalid_input, "unknown sweep axis '" + name + "'");
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::alphas: return "alphas";
    case SweepAxis::noise_rates: return "noise_rates";
    case SweepAxis::methods: return "methods";
    case SweepAxis::tta_repeats: return "tta_repeats";
    case SweepAxis::ensemble_sizes: return "ensemble_sizes";
  }
  return "?";
}

ExperimentConfig apply_sweep_value(const ExperimentConfig& base, SweepAxis axis, const std::string& value,
                                   std::size_t ordinal) {
  ExperimentConfig cfg = base;
  cfg.train.seed = base.train.seed + ordinal;
  switch (axis) {
    case SweepAxis::alphas: set_config_value(cfg, "train.alpha", value); break;
    case SweepAxis::noise_rates: set_config_value(cfg, "train.noise_rate", value); break;
    case SweepAxis::methods: set_config_value(cfg, "train.method", value); break;
    case SweepAxis::tta_repeats:
      cfg.estimator.kind = EstimatorKind::tta;
      set_config_value(cfg, "estimator.repeats", value);
      break;
    case SweepAxis::ensemble_sizes:
      cfg.estimator.kind = EstimatorKind::ensemble;
      set_config_value(cfg, "estimator.members", value);
      break;
  }
  return cfg;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& base, SweepAxis axis, std::span<const std::string> values,
                                const fs::path& out_dir) {
  require(!values.empty(), "sweep needs at least one value");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) fail(ErrorCode::io_error, "cannot create " + out_dir.string() + ": " + ec.message());

  std::vector<SweepRow> rows;
  for (std::size_t k = 0; k < values.size(); ++k) {
    SweepRow row;
    row.value = values[k];
    try {
      const auto cfg = apply_sweep_value(base, axis, values[k], k);
      row.report = run_experiment(cfg, out_dir / (to_string(axis) + "_" + std::to_string(k))).report;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }

  auto out = open_out(out_dir / "sweep.csv");
  MetricsReport prov;
  prov.method = to_string(base.train.method);
  prov.noise_rate = base.train.noise_rate;
  prov.estimator = to_string(base.estimator.kind);
  prov.seed = base.train.seed;
  prov.config_hash = config_hash(base);
  prov.bin_width = base.analysis.bin_width;
  out << provenance_line(prov) << "axis,value,method,noise_rate,estimator,roc_auc,ece,brier,nll,accuracy,seed,status\n";
  for (const auto& row : rows) {
    out << to_string(axis) << ',' << row.value << ',';
    if (row.report) {
      const auto& r = *row.report;
      out << r.method << ',' << num(r.noise_rate) << ',' << r.estimator << ',' << num(r.roc_auc) << ',' << num(r.ece)
          << ',' << num(r.brier) << ',' << num(r.nll) << ',' << num(r.accuracy) << ',' << r.seed << ",ok\n";
    } else {
      std::string msg = row.error;
      for (char& c : msg)
        if (c == ',' || c == '\n') c = ';';
      out << ",,,,,,,,,error: " << msg << '\n';
    }
  }
  return rows;
}

}  // namespace bsm
