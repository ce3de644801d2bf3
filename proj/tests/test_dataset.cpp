// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <set>

#include "doctest.h"

#include "bsm/dataset.hpp"
#include "bsm/error.hpp"

using namespace bsm;

TEST_CASE("generated datasets are balanced and seeded") {
  for (auto kind : {DatasetKind::two_moons, DatasetKind::blobs}) {
    const auto d = generate_dataset(kind, 100, 0.2, 1);
    CHECK(std::count(d.clean_labels.begin(), d.clean_labels.end(), 0) == 50);
    CHECK(d.inputs.rows() == 100);
    CHECK(d.clean_labels == d.observed_labels);
    const auto e = generate_dataset(kind, 100, 0.2, 1);
    CHECK(d.inputs == e.inputs);
    CHECK(d.clean_labels == e.clean_labels);
  }
  CHECK_THROWS_AS(generate_dataset(DatasetKind::blobs, 7, 0.1, 1), Error);
}

TEST_CASE("noise-free blobs collapse to two points") {
  const auto d = generate_dataset(DatasetKind::blobs, 40, 0.0, 2);
  for (Eigen::Index i = 0; i < d.inputs.rows(); ++i) {
    const double c = d.clean_labels[std::size_t(i)] == 0 ? -1.0 : 1.0;
    CHECK(d.inputs(i, 0) == c);
    CHECK(d.inputs(i, 1) == c);
  }
}

TEST_CASE("label noise injection") {
  std::vector<int> y(1000);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = int(i % 2);
  const auto none = inject_label_noise(y, 0.0, 3);
  CHECK(none.labels == y);
  CHECK(none.flipped.empty());
  const auto all = inject_label_noise(y, 1.0, 3);
  for (std::size_t i = 0; i < y.size(); ++i) CHECK(all.labels[i] == 1 - y[i]);
  const auto some = inject_label_noise(y, 0.2, 3);
  CHECK(some.flipped.size() == 200);
  CHECK(std::is_sorted(some.flipped.begin(), some.flipped.end()));
  const std::set<std::size_t> idx(some.flipped.begin(), some.flipped.end());
  for (std::size_t i = 0; i < y.size(); ++i) CHECK((some.labels[i] != y[i]) == (idx.count(i) == 1));
  CHECK_THROWS_AS(inject_label_noise(y, 1.5, 3), Error);
}

TEST_CASE("build dataset keeps validation clean") {
  const auto d = build_dataset(DatasetSpec{}, 0.2, 4);
  CHECK(d.train.flipped.size() == 400);
  CHECK(d.val.flipped.empty());
  CHECK(d.val.clean_labels == d.val.observed_labels);
  CHECK(d.train.inputs != d.val.inputs.topRows(d.val.inputs.rows()).eval());
  const auto sd = column_stddev(d.train.inputs);
  CHECK(sd.size() == 2);
  CHECK(sd[0] > 0.0);
}
