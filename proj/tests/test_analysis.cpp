// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "doctest.h"

#include "bsm/analysis.hpp"
#include "bsm/error.hpp"
#include "bsm/rng.hpp"

using namespace bsm;
using doctest::Approx;

TEST_CASE("referral curve") {
  const std::vector<double> u{0.9, 0.8, 0.1, 0.1};
  const std::vector<bool> correct{false, false, true, true};
  const std::vector<double> scores{0.4, 0.6, 0.9, 0.2};
  const std::vector<int> labels{1, 0, 1, 0};
  const std::vector<double> fr{0.5, 0.0};
  const auto c = referral_curve(u, correct, scores, labels, fr);
  REQUIRE(c.points.size() == 2);
  CHECK(c.points[0].rejected_fraction == 0.0);
  CHECK(c.points[0].accuracy == 0.5);
  CHECK(c.points[0].n_retained == 4);
  CHECK(c.points[1].accuracy == 1.0);
  CHECK(c.points[1].n_retained == 2);
  REQUIRE(c.points[1].roc_auc.has_value());
  CHECK(*c.points[1].roc_auc == 1.0);
}

TEST_CASE("referral with a perfect oracle is nondecreasing") {
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    std::vector<bool> correct;
    std::vector<double> u, s;
    std::vector<int> y;
    for (int i = 0; i < 101; ++i) {
      correct.push_back(rng.bernoulli(0.8));
      u.push_back(correct.back() ? 0.0 : 1.0);
      s.push_back(rng.uniform());
      y.push_back(i % 2);
    }
    std::vector<double> fr;
    for (int k = 0; k < 19; ++k) fr.push_back(0.05 * k);
    const auto c = referral_curve(u, correct, s, y, fr);
    for (std::size_t k = 1; k < c.points.size(); ++k) CHECK(c.points[k].accuracy >= c.points[k - 1].accuracy);
  }
}

TEST_CASE("referral drops duplicate retained counts") {
  const std::vector<double> u{0.3, 0.2, 0.1};
  const std::vector<bool> correct{true, true, false};
  const std::vector<double> s{0.2, 0.7, 0.4};
  const std::vector<int> y{0, 1, 1};
  const std::vector<double> fr{0.3, 0.32};
  const auto c = referral_curve(u, correct, s, y, fr);
  CHECK(c.points.size() == 1);
  CHECK(c.diagnostics.size() == 1);
}

TEST_CASE("threshold curve") {
  const std::vector<double> u{0.1, 0.5, 0.9};
  const std::vector<bool> correct{true, true, false};
  const std::vector<double> ts{0.05, 0.5, 1.0};
  const auto c = threshold_curve(u, correct, ts);
  REQUIRE(c.points.size() == 2);
  CHECK(c.points[0].threshold == 0.5);
  CHECK(c.points[0].accuracy == 1.0);
  CHECK(c.points[0].n_retained == 2);
  CHECK(c.points[1].accuracy == Approx(2.0 / 3.0));
  CHECK(c.diagnostics.size() == 1);
}

TEST_CASE("minimum cosine distance") {
  Matrix bank(3, 2);
  bank << 1, 0, 0, 0, 2, 2;
  const std::vector<double> in_bank{1, 1}, orth{0, 1}, zero{0, 0};
  CHECK(min_cosine_distance(in_bank, bank) == Approx(0.0).scale(1.0).epsilon(1e-15));
  Matrix xaxis(1, 2);
  xaxis << 3, 0;
  CHECK(min_cosine_distance(orth, xaxis) == Approx(1.0));
  const std::vector<double> neg{-3, 0};
  CHECK(min_cosine_distance(neg, xaxis) == Approx(2.0));
  CHECK_THROWS_AS(min_cosine_distance(zero, bank), Error);
  Matrix zeros = Matrix::Zero(2, 2);
  CHECK_THROWS_AS(min_cosine_distance(orth, zeros), Error);
}

TEST_CASE("distance records skip zero features") {
  Matrix q(3, 2), bank(2, 2);
  q << 1, 0, 0, 0, 0, 1;
  bank << 1, 0, 1, 1;
  const std::vector<double> u{0.1, 0.2, 0.3};
  const auto d = distance_records(q, bank, u, {true, false, true});
  REQUIRE(d.records.size() == 2);
  CHECK(d.records[1].sample_index == 2);
  CHECK(d.records[1].uncertainty == 0.3);
  CHECK(d.records[1].similarity() == Approx(std::sqrt(0.5)));
  CHECK(d.diagnostics.size() == 1);
}

TEST_CASE("spearman") {
  const std::vector<double> x{1, 2, 3}, y{3, 2, 1};
  CHECK(spearman(x, y).rho == Approx(-1.0));
  const std::vector<double> tx{1, 2, 2, 4}, ty{1, 3, 2, 4};
  CHECK(spearman(tx, ty).rho == Approx(0.9486832980505138).epsilon(1e-12));
  CHECK(spearman(tx, ty).p_value == Approx(0.05131670194948623).epsilon(1e-9));
  const std::vector<double> a{17, 86, 60, 77, 47, 3, 70, 87, 88, 92}, b{70, 29, 85, 61, 80, 34, 60, 31, 73, 66};
  CHECK(spearman(a, b).rho == Approx(-0.16363636363636364).epsilon(1e-12));
  CHECK(spearman(a, b).p_value == Approx(0.6514773427962428).epsilon(1e-9));
  const std::vector<double> c(4, 1.0);
  CHECK_THROWS_AS(spearman(c, ty), Error);
}

TEST_CASE("spearman is invariant under increasing transforms") {
  Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> x, y, fx, gy;
    for (int i = 0; i < 25; ++i) {
      x.push_back(std::round(rng.normal() * 4));
      y.push_back(rng.normal());
      fx.push_back(std::exp(x.back()) + 3.0);
      gy.push_back(y.back() * y.back() * y.back());
    }
    const auto a = spearman(x, y), b = spearman(fx, gy);
    CHECK(a.rho == b.rho);
    CHECK(a.p_value == b.p_value);
    std::vector<double> inc(x.size());
    for (std::size_t i = 0; i < inc.size(); ++i) inc[i] = double(i);
    std::vector<double> sq(inc);
    for (auto& v : sq) v = v * v;
    CHECK(spearman(inc, sq).rho == Approx(1.0));
  }
}

TEST_CASE("exact and approximate spearman p-values agree for moderate N") {
  const std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, y{2, 1, 4, 3, 7, 5, 6, 10, 9, 8};
  const double exact = spearman_exact_p(x, y);
  const double approx = spearman(x, y).p_value;
  CHECK(exact > 0.0);
  CHECK(exact < 0.01);
  CHECK(std::fabs(exact - approx) < 0.01);
  const std::vector<double> big(11, 0.0);
  CHECK_THROWS_AS(spearman_exact_p(big, big), Error);
}
