// SPDX-License-Identifier: Apache-2.0
#include "bsm/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "bsm/error.hpp"

namespace bsm {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) throw std::invalid_argument("expected a number, got '" + s + "'");
  return v;
}

long long to_int(const std::string& s) {
  long long v = 0;
  const auto* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) throw std::invalid_argument("expected an integer, got '" + s + "'");
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw std::invalid_argument("expected true/false, got '" + s + "'");
}

std::vector<double> to_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto t = trim(item);
    if (!t.empty()) out.push_back(to_double(t));
  }
  return out;
}

std::string list_text(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s;
}

struct Field {
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
  bool hashed = true;
};

#define BSM_REAL(key, member) \
  {key, {[](ExperimentConfig& c, const std::string& v) { c.member = to_double(v); }, [](const ExperimentConfig& c) { return fmt(c.member); }}}
#define BSM_INT(key, member) \
  {key, {[](ExperimentConfig& c, const std::string& v) { c.member = static_cast<decltype(c.member)>(to_int(v)); }, [](const ExperimentConfig& c) { return std::to_string(c.member); }}}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"train.method",
       {[](ExperimentConfig& c, const std::string& v) { c.train.method = parse_method(v); },
        [](const ExperimentConfig& c) { return to_string(c.train.method); }}},
      BSM_REAL("train.alpha", train.alpha),
      BSM_REAL("train.noise_rate", train.noise_rate),
      BSM_REAL("train.learning_rate", train.learning_rate),
      BSM_REAL("train.lr_decay", train.lr_decay),
      BSM_REAL("train.weight_decay", train.weight_decay),
      BSM_INT("train.batch_size", train.batch_size),
      BSM_INT("train.max_epochs", train.max_epochs),
      BSM_INT("train.patience", train.patience),
      BSM_INT("train.warmup_epochs", train.warmup_epochs),
      BSM_INT("train.bmm_iterations", train.bmm_iterations),
      {"train.augment",
       {[](ExperimentConfig& c, const std::string& v) { c.train.augment = to_bool(v); },
        [](const ExperimentConfig& c) { return std::string(c.train.augment ? "true" : "false"); }}},
      {"train.bootstrap",
       {[](ExperimentConfig& c, const std::string& v) {
          if (v == "hard") c.train.bootstrap = Bootstrap::hard;
          else if (v == "soft") c.train.bootstrap = Bootstrap::soft;
          else throw std::invalid_argument("expected hard or soft, got '" + v + "'");
        },
        [](const ExperimentConfig& c) { return std::string(c.train.bootstrap == Bootstrap::hard ? "hard" : "soft"); }}},
      BSM_INT("train.seed", train.seed),
      BSM_INT("model.hidden1", train.shape.hidden1),
      BSM_INT("model.hidden2", train.shape.hidden2),
      BSM_REAL("model.dropout", train.shape.dropout),
      {"dataset.kind",
       {[](ExperimentConfig& c, const std::string& v) { c.train.dataset.kind = parse_dataset_kind(v); },
        [](const ExperimentConfig& c) { return to_string(c.train.dataset.kind); }}},
      BSM_INT("dataset.n_train", train.dataset.n_train),
      BSM_INT("dataset.n_val", train.dataset.n_val),
      BSM_REAL("dataset.noise", train.dataset.generator_noise),
      BSM_REAL("augment.noise_sigma", train.policy.noise_sigma),
      BSM_REAL("augment.scale_jitter", train.policy.scale_jitter),
      {"estimator.kind",
       {[](ExperimentConfig& c, const std::string& v) { c.estimator.kind = parse_estimator_kind(v); },
        [](const ExperimentConfig& c) { return to_string(c.estimator.kind); }}},
      BSM_INT("estimator.members", estimator.members),
      BSM_INT("estimator.passes", estimator.passes),
      BSM_INT("estimator.repeats", estimator.repeats),
      BSM_REAL("estimator.tau_inv", estimator.tau_inv),
      BSM_REAL("analysis.bin_width", analysis.bin_width),
      {"analysis.fractions",
       {[](ExperimentConfig& c, const std::string& v) { c.analysis.fractions = to_list(v); },
        [](const ExperimentConfig& c) { return list_text(c.analysis.fractions); }}},
      {"analysis.thresholds",
       {[](ExperimentConfig& c, const std::string& v) { c.analysis.thresholds = to_list(v); },
        [](const ExperimentConfig& c) { return list_text(c.analysis.thresholds); }}},
      BSM_REAL("analysis.domain_shift", analysis.domain_shift),
      {"output.dir",
       {[](ExperimentConfig& c, const std::string& v) { c.output_dir = v; },
        [](const ExperimentConfig& c) { return c.output_dir; }, false}},
      {"output.formats",
       {[](ExperimentConfig& c, const std::string& v) {
          c.write_csv = c.write_json = false;
          std::stringstream ss(v);
          std::string item;
          while (std::getline(ss, item, ',')) {
            const auto t = trim(item);
            if (t == "csv") c.write_csv = true;
            else if (t == "json") c.write_json = true;
            else if (!t.empty()) throw std::invalid_argument("unknown report format '" + t + "'");
          }
          if (!c.write_csv && !c.write_json) throw std::invalid_argument("no report format selected");
        },
        [](const ExperimentConfig& c) {
          std::string s = c.write_csv ? "csv" : "";
          if (c.write_json) s += s.empty() ? "json" : ", json";
          return s;
        },
        false}},
      {"output.load_models",
       {[](ExperimentConfig& c, const std::string& v) { c.load_models_dir = v; },
        [](const ExperimentConfig& c) { return c.load_models_dir; }, false}},
  };
  return table;
}

#undef BSM_REAL
#undef BSM_INT

const Field& field(const std::string& key) {
  for (const auto& [k, f] : fields())
    if (k == key) return f;
  fail(ErrorCode::parse_error, key + ": unknown configuration key");
}

}  // namespace

EstimatorKind parse_estimator_kind(const std::string& name) {
  if (name == "single") return EstimatorKind::single;
  if (name == "ensemble") return EstimatorKind::ensemble;
  if (name == "mc_dropout") return EstimatorKind::mc_dropout;
  if (name == "tta") return EstimatorKind::tta;
  fail(ErrorCode::invalid_input, "unknown estimator kind '" + name + "'");
}

std::string to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::single: return "single";
    case EstimatorKind::ensemble: return "ensemble";
    case EstimatorKind::mc_dropout: return "mc_dropout";
    case EstimatorKind::tta: return "tta";
  }
  return "?";
}

void ExperimentConfig::validate() const {
  train.validate();
  switch (estimator.kind) {
    case EstimatorKind::ensemble: require(estimator.members >= 1, "estimator.members must be at least 1"); break;
    case EstimatorKind::mc_dropout:
      require(estimator.passes >= 1, "estimator.passes must be at least 1");
      require(estimator.tau_inv >= 0.0, "estimator.tau_inv must be nonnegative");
      require(train.shape.dropout > 0.0, "model.dropout must be positive for estimator.kind = mc_dropout");
      break;
    case EstimatorKind::tta: require(estimator.repeats >= 0, "estimator.repeats must be nonnegative"); break;
    case EstimatorKind::single: break;
  }
  require(analysis.bin_width > 0.0 && analysis.bin_width <= 1.0, "analysis.bin_width must lie in (0, 1]");
  for (double f : analysis.fractions) require(f >= 0.0 && f < 1.0, "analysis.fractions entries must lie in [0, 1)");
  require(analysis.domain_shift >= 0.0, "analysis.domain_shift must be nonnegative");
}

void set_config_value(ExperimentConfig& config, const std::string& key, const std::string& value) {
  const Field& f = field(key);
  try {
    f.set(config, trim(value));
  } catch (const Error& e) {
    fail(ErrorCode::parse_error, key + ": " + e.what());
  } catch (const std::exception& e) {
    fail(ErrorCode::parse_error, key + ": " + e.what());
  }
}

std::string get_config_value(const ExperimentConfig& config, const std::string& key) { return field(key).get(config); }

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, f] : fields()) k.push_back(name);
    return k;
  }();
  return keys;
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig config;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::parse_error, "line " + std::to_string(lineno) + ": expected 'key = value'");
    const auto key = trim(std::string_view(t).substr(0, eq));
    const auto value = trim(std::string_view(t).substr(eq + 1));
    if (!seen.insert(key).second) fail(ErrorCode::parse_error, key + ": duplicate key (line " + std::to_string(lineno) + ")");
    set_config_value(config, key, value);
  }
  if (!seen.count("train.method")) fail(ErrorCode::parse_error, "train.method: required field is missing");
  try {
    config.validate();
  } catch (const Error& e) {
    fail(ErrorCode::parse_error, e.what());
  }
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_error, "cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string canonical_text(const ExperimentConfig& config) {
  std::string out;
  for (const auto& [key, f] : fields())
    if (f.hashed) out += key + " = " + f.get(config) + "\n";
  return out;
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_text(config)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace bsm
