// SPDX-License-Identifier: Apache-2.0
#include <string>

#include "doctest.h"

#include "bsm/config.hpp"
#include "bsm/error.hpp"

using namespace bsm;

namespace {

ErrorCode code_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode{};
}

std::string message_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("parse a full config") {
  const auto c = parse_config(
      "# experiment\n"
      "train.method = bsm\n"
      "train.noise_rate = 0.2   # injected\n"
      "estimator.kind = tta\n"
      "estimator.repeats = 64\n"
      "analysis.fractions = 0, 0.1, 0.2\n"
      "dataset.kind = blobs\n"
      "train.bootstrap = soft\n");
  CHECK(c.train.method == Method::bsm);
  CHECK(c.train.noise_rate == 0.2);
  CHECK(c.estimator.kind == EstimatorKind::tta);
  CHECK(c.estimator.repeats == 64);
  CHECK(c.analysis.fractions == std::vector<double>{0, 0.1, 0.2});
  CHECK(c.train.dataset.kind == DatasetKind::blobs);
  CHECK(c.train.bootstrap == Bootstrap::soft);
  CHECK(c.train.learning_rate == 5e-4);
  CHECK(c.train.batch_size == 32);
  CHECK(c.train.patience == 20);
}

TEST_CASE("parse errors name the field") {
  CHECK(code_of("train.noise_rate = 0.2\n") == ErrorCode::parse_error);
  CHECK(message_of("train.noise_rate = 0.2\n").find("train.method") != std::string::npos);
  CHECK(message_of("train.method = ce\ntrain.bogus = 1\n").find("train.bogus") != std::string::npos);
  CHECK(message_of("train.method = ce\ntrain.alpha = abc\n").find("train.alpha") != std::string::npos);
  CHECK(message_of("train.method = ce\ntrain.method = bsm\n").find("duplicate") != std::string::npos);
  CHECK(code_of("train.method = ce\njust words\n") == ErrorCode::parse_error);
  CHECK(code_of("train.method = ce\ntrain.noise_rate = 2\n") == ErrorCode::parse_error);
  CHECK(code_of("train.method = focal\n") == ErrorCode::parse_error);
}

TEST_CASE("set and get round trip every key") {
  auto c = parse_config("train.method = ce\n");
  for (const auto& key : config_keys()) {
    const auto v = get_config_value(c, key);
    set_config_value(c, key, v);
    CHECK(get_config_value(c, key) == v);
  }
  set_config_value(c, "train.alpha", "0.5");
  CHECK(c.train.alpha == 0.5);
  CHECK_THROWS_AS(set_config_value(c, "nope", "1"), Error);
}

TEST_CASE("config hash covers results, not output location") {
  auto a = parse_config("train.method = ce\n");
  auto b = a;
  b.output_dir = "elsewhere";
  b.write_json = false;
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  b.train.seed = 1;
  CHECK(config_hash(a) != config_hash(b));
  CHECK(parse_config(canonical_text(a) + "output.dir = x\n").train.method == Method::ce);
  CHECK(config_hash(parse_config(canonical_text(a))) == config_hash(a));
}
