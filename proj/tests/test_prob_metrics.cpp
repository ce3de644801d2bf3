// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "doctest.h"

#include "bsm/error.hpp"
#include "bsm/prob_metrics.hpp"
#include "bsm/rng.hpp"
#include "test_util.hpp"

using namespace bsm;
using bsm::test::batch_of;
using bsm::test::confidence_batch;
using doctest::Approx;

TEST_CASE("entropy") {
  const std::vector<double> onehot{1.0, 0.0}, uniform{0.5, 0.5}, skew{0.8, 0.2};
  CHECK(predictive_entropy(onehot) == 0.0);
  CHECK(predictive_entropy(uniform) == Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(predictive_entropy(skew) == Approx(0.5004024235381879).epsilon(1e-12));
}

TEST_CASE("entropy stays within [0, ln K]") {
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    const std::size_t k = 2 + rng.index(6);
    std::vector<double> p(k);
    double s = 0.0;
    for (auto& v : p) s += (v = rng.uniform());
    for (auto& v : p) v /= s;
    const double h = predictive_entropy(p);
    CHECK(h >= 0.0);
    CHECK(h <= std::log(double(k)) + 1e-12);
  }
}

TEST_CASE("ece hand binning") {
  const auto b = confidence_batch({0.95, 0.85, 0.65, 0.55}, {1, 1, 0, 1});
  const auto r = expected_calibration_error(b, 0.1);
  CHECK(r.ece == Approx(0.325).epsilon(1e-12));
  REQUIRE(r.reliability.bins.size() == 10);
  CHECK(r.reliability.bins[9].count == 1);
  CHECK(r.reliability.bins[6].count == 1);
  CHECK(r.reliability.bins[6].acc == 0.0);
}

TEST_CASE("ece degenerate cases") {
  CHECK(expected_calibration_error(confidence_batch({1.0}, {1})).ece == 0.0);
  // Confidence 0.75 in a bin whose accuracy is 3/4.
  const auto b = confidence_batch({0.75, 0.75, 0.75, 0.75}, {1, 1, 1, 0});
  CHECK(expected_calibration_error(b).ece == Approx(0.0).epsilon(1e-15));
}

TEST_CASE("ece bins are half-open on the left") {
  CHECK(confidence_bin(0.1, 0.1, 10) == 0);
  CHECK(confidence_bin(0.1000001, 0.1, 10) == 1);
  CHECK(confidence_bin(0.0, 0.1, 10) == 0);
  CHECK(confidence_bin(1.0, 0.1, 10) == 9);
  CHECK(confidence_bin(0.5, 0.25, 4) == 1);
}

TEST_CASE("ece lies in [0, 1] and ignores sample order") {
  Rng rng(11);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> conf;
    std::vector<int> correct;
    for (int i = 0; i < 40; ++i) {
      conf.push_back(rng.uniform(0.5, 1.0));
      correct.push_back(rng.bernoulli(0.7));
    }
    const double e = expected_calibration_error(confidence_batch(conf, correct)).ece;
    CHECK(e >= 0.0);
    CHECK(e <= 1.0);
    auto perm = rng.permutation(conf.size());
    std::vector<double> c2;
    std::vector<int> k2;
    for (auto i : perm) {
      c2.push_back(conf[i]);
      k2.push_back(correct[i]);
    }
    CHECK(expected_calibration_error(confidence_batch(c2, k2)).ece == Approx(e).epsilon(1e-12));
  }
}

TEST_CASE("binary nll") {
  // p = 1 is clamped to 1 - 1e-12 before the log.
  CHECK(negative_log_likelihood_binary(batch_of({{1.0, 0.0}, {0.0, 1.0}}, {0, 1})) == Approx(0.0).scale(1.0).epsilon(1e-9));
  CHECK(negative_log_likelihood_binary(batch_of({{0.5, 0.5}}, {1})) == Approx(std::log(2.0)));
  CHECK(negative_log_likelihood_binary(batch_of({{0.1, 0.9}, {0.6, 0.4}}, {1, 0})) ==
        Approx(0.30809306971190853).epsilon(1e-12));
  // Clamped rather than infinite.
  CHECK(negative_log_likelihood_binary(batch_of({{1.0, 0.0}}, {1})) == Approx(-std::log(kLogClamp)));
  CHECK_THROWS_AS(negative_log_likelihood_binary(batch_of({{0.2, 0.3, 0.5}}, {2})), Error);
  try {
    negative_log_likelihood_binary(batch_of({{0.2, 0.3, 0.5}}, {2}));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::unsupported_shape);
  }
}

TEST_CASE("brier") {
  CHECK(brier_score(batch_of({{1.0, 0.0}}, {0})) == 0.0);
  CHECK(brier_score(batch_of({{0.5, 0.5}}, {1})) == Approx(0.25));
  CHECK(brier_score(batch_of({{0.7, 0.3}}, {0})) == Approx(0.09).epsilon(1e-12));
}

TEST_CASE("roc auc") {
  const std::vector<int> y{1, 1, 0, 0};
  const std::vector<double> perfect{0.9, 0.8, 0.3, 0.2}, flat{0.5, 0.5, 0.5, 0.5}, tied{0.9, 0.4, 0.4, 0.1};
  CHECK(roc_auc(perfect, y) == 1.0);
  CHECK(roc_auc(flat, y) == 0.5);
  CHECK(roc_auc(tied, y) == Approx(0.875).epsilon(1e-15));
  const std::vector<int> one_class{1, 1};
  const std::vector<double> two{0.2, 0.3};
  try {
    roc_auc(two, one_class);
    FAIL("expected undefined_metric");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::undefined_metric);
  }
}

TEST_CASE("roc auc label flip symmetry") {
  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> s;
    std::vector<int> y, yf;
    for (int i = 0; i < 30; ++i) {
      s.push_back(std::round(rng.uniform() * 10.0) / 10.0);
      y.push_back(i % 3 == 0 ? 1 : 0);
      yf.push_back(1 - y.back());
    }
    CHECK(roc_auc(s, y) + roc_auc(s, yf) == Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("accuracy") {
  CHECK(accuracy(batch_of({{0.9, 0.1}, {0.2, 0.8}}, {0, 1})) == 1.0);
  CHECK(accuracy(batch_of({{0.9, 0.1}, {0.2, 0.8}}, {1, 0})) == 0.0);
  CHECK(accuracy(batch_of({{0.9, 0.1}, {0.2, 0.8}, {0.6, 0.4}, {0.3, 0.7}}, {0, 1, 0, 0})) == 0.75);
}

TEST_CASE("validation rejects malformed batches") {
  CHECK_THROWS_AS(validate(batch_of({{0.6, 0.6}}, {0})), Error);
  CHECK_THROWS_AS(validate(batch_of({{0.5, 0.5}}, {2})), Error);
  CHECK_THROWS_AS(validate(batch_of({{-0.1, 1.1}}, {0})), Error);
  CHECK_NOTHROW(validate(batch_of({{0.5, 0.5}}, {1})));
}

TEST_CASE("average ranks") {
  const std::vector<double> v{10, 20, 20, 5};
  const auto r = average_ranks(v);
  CHECK(r == std::vector<double>{2, 3.5, 3.5, 1});
}
