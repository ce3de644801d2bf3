// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numeric>

#include "doctest.h"

#include "bsm/error.hpp"
#include "bsm/losses.hpp"
#include "bsm/rng.hpp"

using namespace bsm;
using doctest::Approx;

namespace {

std::vector<double> logits_for(std::vector<double> probs) {
  for (auto& p : probs) p = std::log(p);
  return probs;
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST_CASE("softmax") {
  const std::vector<double> zero{0, 0}, same{4, 4, 4}, ln2{std::log(2.0), 0};
  CHECK(softmax(zero) == std::vector<double>{0.5, 0.5});
  for (double p : softmax(same)) CHECK(p == Approx(1.0 / 3.0));
  const auto s = softmax(ln2);
  CHECK(s[0] == Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(s[1] == Approx(1.0 / 3.0).epsilon(1e-15));
  const std::vector<double> big{1000.0, 0.0};
  CHECK(std::isfinite(softmax(big)[1]));
}

TEST_CASE("ce loss") {
  const std::vector<double> peaked{50, 0}, flat{0, 0}, ln2{std::log(2.0), 0};
  const auto p = ce_loss(peaked, 0);
  CHECK(p.value == Approx(0.0).epsilon(1e-15));
  CHECK(std::fabs(p.grad_logits[0]) < 1e-15);
  CHECK(ce_loss(flat, 1).value == Approx(std::log(2.0)));
  CHECK(ce_loss(ln2, 1).value == Approx(1.0986122886681098).epsilon(1e-14));
  const std::vector<double> huge{-800.0, 800.0};
  CHECK(std::isfinite(ce_loss(huge, 0).value));
  CHECK_THROWS_AS(ce_loss(flat, 2), Error);
}

TEST_CASE("bootstrapping loss") {
  const auto agree = logits_for({0.6, 0.4});
  CHECK(bs_loss(agree, 0, 0.5).value == Approx(0.5108256237659907).epsilon(1e-14));
  const auto disagree = logits_for({0.3, 0.7});
  CHECK(bs_loss(disagree, 0, 0.4).value == Approx(0.8650537).epsilon(1e-7));
  CHECK(bs_loss(disagree, 0, 0.4).value == Approx(-(0.6 * std::log(0.3) + 0.4 * std::log(0.7))).epsilon(1e-14));
  CHECK_THROWS_AS(bs_loss(agree, 0, 1.5), Error);
}

TEST_CASE("bootstrapping loss ignores w when the prediction matches the label") {
  Rng rng(8);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> z{rng.normal(), rng.normal(), rng.normal()};
    const int label = int(std::max_element(z.begin(), z.end()) - z.begin());
    CHECK(bs_loss(z, label, rng.uniform()).value == Approx(ce_loss(z, label).value).epsilon(1e-14));
  }
}

TEST_CASE("mixup ce loss") {
  const auto z = logits_for({0.6, 0.4});
  CHECK(mixup_ce_loss(z, 0, 1, 0.5).value == Approx(0.7135581778200728).epsilon(1e-14));
  CHECK(mixup_ce_loss(z, 1, 0, 1.0).value == Approx(ce_loss(z, 1).value).epsilon(1e-15));
  for (double g : {0.0, 0.3, 0.9}) CHECK(mixup_ce_loss(z, 1, 1, g).value == Approx(ce_loss(z, 1).value).epsilon(1e-15));
}

TEST_CASE("bsm loss") {
  const auto z = logits_for({0.3, 0.7});
  CHECK(bsm_loss(z, 0, 1, 0.5, 0.4, 0.0).value == Approx(0.6108643).epsilon(1e-7));
  CHECK(bsm_loss(z, 0, 1, 0.5, 0.4, 0.0).value ==
        Approx(0.5 * -(0.6 * std::log(0.3) + 0.4 * std::log(0.7)) + 0.5 * -std::log(0.7)).epsilon(1e-14));
  CHECK(bsm_loss(z, 0, 1, 1.0, 0.3, 0.9).value == Approx(bs_loss(z, 0, 0.3).value).epsilon(1e-15));
  CHECK(bsm_loss(z, 0, 1, 0.2, 0.0, 0.0).value == mixup_ce_loss(z, 0, 1, 0.2).value);
}

TEST_CASE("gradients sum to zero for normalized targets") {
  Rng rng(21);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> z{rng.normal(0, 3), rng.normal(0, 3), rng.normal(0, 3), rng.normal(0, 3)};
    const int a = int(rng.index(4)), b = int(rng.index(4));
    const double w = rng.uniform(), g = rng.uniform();
    CHECK(std::fabs(sum(ce_loss(z, a).grad_logits)) < 1e-12);
    CHECK(std::fabs(sum(bs_loss(z, a, w, Bootstrap::soft).grad_logits)) < 1e-12);
    CHECK(std::fabs(sum(bsm_loss(z, a, b, g, w, 1 - w).grad_logits)) < 1e-12);
  }
}

TEST_CASE("all losses finite for finite logits") {
  Rng rng(22);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> z{rng.normal(0, 300), rng.normal(0, 300)};
    CHECK(std::isfinite(bsm_loss(z, 0, 1, rng.uniform(), rng.uniform(), rng.uniform()).value));
    CHECK(std::isfinite(bs_loss(z, 1, rng.uniform(), Bootstrap::soft).value));
  }
}

TEST_CASE("central differences match analytic gradients") {
  Rng rng(23);
  const double step = 1e-5;
  for (int t = 0; t < 100; ++t) {
    std::vector<double> z{rng.normal(0, 2), rng.normal(0, 2), rng.normal(0, 2)};
    const int a = int(rng.index(3)), b = int(rng.index(3));
    const double g = rng.uniform(), w = rng.uniform(), w2 = rng.uniform();
    const auto top = std::max_element(z.begin(), z.end());
    for (auto& v : z)
      if (&v != &*top && *top - v < 1e-3) v -= 0.5;
    auto check = [&](auto fn) {
      const auto an = fn(z).grad_logits;
      for (std::size_t k = 0; k < z.size(); ++k) {
        auto zp = z, zm = z;
        zp[k] += step;
        zm[k] -= step;
        const double fd = (fn(zp).value - fn(zm).value) / (2 * step);
        CHECK(std::fabs(fd - an[k]) <= 1e-5 * std::max(1.0, std::fabs(fd)));
      }
    };
    check([&](const auto& l) { return ce_loss(l, a); });
    check([&](const auto& l) { return bs_loss(l, a, w); });
    check([&](const auto& l) { return mixup_ce_loss(l, a, b, g); });
    check([&](const auto& l) { return bsm_loss(l, a, b, g, w, w2); });
  }
}
