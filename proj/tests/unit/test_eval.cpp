// Copyright 2026 The CBF Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <cmath>
#include <numeric>
#include <vector>

#include "cbf/eval.hpp"
#include "cbf/rng.hpp"
#include "check.hpp"
#include "support.hpp"

using namespace cbf;
using namespace cbf::test;

namespace {

TaxonomyPtr generic(int n) {
  std::vector<ClassInfo> c;
  for (int i = 0; i < n; ++i) c.push_back({i, "c" + std::to_string(i), ElevationBand::Low});
  return std::make_shared<const Taxonomy>(Taxonomy(c));
}

ConfusionMatrix matrix(std::size_t n, std::vector<std::uint64_t> counts) {
  ConfusionMatrix cm(n);
  cm.counts = std::move(counts);
  return cm;
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("confusion counts") {
  const auto t = generic(3);
  const LabelMap a(3, 1, {0, 1, 2}, t);
  const auto same = confusion(a, a);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(same.at(i, j) == (i == j ? 1u : 0u));

  const auto t2 = generic(2);
  const auto cm = confusion(LabelMap(2, 1, {1, 1}, t2), LabelMap(2, 1, {0, 1}, t2));
  CHECK(cm.at(0, 1) == 1);
  CHECK(cm.at(1, 1) == 1);
  CHECK(cm.at(0, 0) == 0);
  CHECK(cm.at(1, 0) == 0);

  CHECK_CBF_ERROR(confusion(LabelMap(2, 1, {0, 1}, t2), LabelMap(1, 2, {0, 1}, t2)), ErrorKind::Dimension);
  CHECK_CBF_ERROR(confusion(LabelMap(2, 1, {0, 1}, t2), LabelMap(2, 1, {0, 1}, t)), ErrorKind::Taxonomy);
}

TEST_CASE("confusion matches a pixel counter") {
  Rng rng(10);
  const auto t = generic(4);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<ClassId> p(256), q(256);
    for (auto& v : p) v = ClassId(rng.uniform_int(0, 3));
    for (auto& v : q) v = ClassId(rng.uniform_int(0, 3));
    const auto cm = confusion(LabelMap(16, 16, p, t), LabelMap(16, 16, q, t));
    for (ClassId a = 0; a < 4; ++a)
      for (ClassId b = 0; b < 4; ++b) {
        std::uint64_t count = 0;
        for (std::size_t i = 0; i < 256; ++i) count += q[i] == a && p[i] == b;
        CHECK(cm.at(std::size_t(a), std::size_t(b)) == count);
      }
    CHECK(cm.total() == 256);
  }
}

TEST_CASE("overall accuracy") {
  CHECK(overall_accuracy(matrix(2, {4, 0, 0, 6})) == 1.0);
  CHECK(overall_accuracy(matrix(2, {0, 4, 6, 0})) == 0.0);
  CHECK(overall_accuracy(matrix(2, {3, 2, 0, 5})) == doctest::Approx(0.8));
  CHECK_CBF_ERROR(overall_accuracy(ConfusionMatrix(2)), ErrorKind::Empty);
  CHECK_CBF_ERROR(overall_accuracy(ConfusionMatrix(0)), ErrorKind::Empty);
}

TEST_CASE("mean iou") {
  auto r = mean_iou(matrix(3, {2, 0, 0, 0, 3, 0, 0, 0, 1}));
  CHECK(r.miou == 1.0);

  r = mean_iou(matrix(2, {2, 2, 0, 6}));
  CHECK(*r.per_class[0] == doctest::Approx(0.5));
  CHECK(*r.per_class[1] == doctest::Approx(0.75));
  CHECK(r.miou == doctest::Approx(0.625));

  r = mean_iou(matrix(3, {2, 0, 0, 0, 0, 0, 0, 0, 2}));
  CHECK_FALSE(r.per_class[1].has_value());
  CHECK(r.miou == 1.0);
  CHECK_CBF_ERROR(mean_iou(ConfusionMatrix(2)), ErrorKind::Empty);
}

TEST_CASE("metrics agree with the brute-force oracle") {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = int(rng.uniform_int(1, 6));
    const int w = int(rng.uniform_int(1, 32)), h = int(rng.uniform_int(1, 32));
    const auto t = generic(n);
    std::vector<ClassId> p(std::size_t(w) * h), q(p.size());
    // Skew towards few classes so some are absent.
    const int used = int(rng.uniform_int(1, n));
    for (auto& v : p) v = ClassId(rng.uniform_int(0, used - 1));
    for (auto& v : q) v = ClassId(rng.uniform_int(0, used - 1));
    const auto m = metrics_of(confusion(LabelMap(w, h, p, t), LabelMap(w, h, q, t)));
    const auto o = oracle_metrics(p, q, n);
    CHECK(std::abs(m.oa - o.oa) <= 1e-12);
    CHECK(std::abs(m.miou - o.miou) <= 1e-12);
    REQUIRE(m.per_class_iou.size() == o.iou.size());
    for (std::size_t c = 0; c < o.iou.size(); ++c) {
      CHECK(m.per_class_iou[c].has_value() == o.iou[c].has_value());
      if (o.iou[c]) CHECK(std::abs(*m.per_class_iou[c] - *o.iou[c]) <= 1e-12);
    }
  }
}

TEST_CASE("permuting class ids permutes per-class iou") {
  Rng rng(2);
  const auto t = generic(5);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<ClassId> p(100), q(100);
    for (auto& v : p) v = ClassId(rng.uniform_int(0, 4));
    for (auto& v : q) v = ClassId(rng.uniform_int(0, 4));
    std::vector<ClassId> perm(5);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = 5; i > 1; --i) std::swap(perm[i - 1], perm[std::size_t(rng.uniform_int(0, std::int64_t(i) - 1))]);
    auto pp = p, pq = q;
    for (auto& v : pp) v = perm[std::size_t(v)];
    for (auto& v : pq) v = perm[std::size_t(v)];
    const auto a = metrics_of(confusion(LabelMap(10, 10, p, t), LabelMap(10, 10, q, t)));
    const auto b = metrics_of(confusion(LabelMap(10, 10, pp, t), LabelMap(10, 10, pq, t)));
    CHECK(a.oa == b.oa);
    CHECK(a.miou == doctest::Approx(b.miou).epsilon(1e-12));
    for (std::size_t c = 0; c < 5; ++c) CHECK(a.per_class_iou[c] == b.per_class_iou[std::size_t(perm[c])]);
  }
}

TEST_CASE("confusion matrices add") {
  auto a = matrix(2, {1, 2, 3, 4});
  a += matrix(2, {1, 1, 1, 1});
  CHECK(a.counts == std::vector<std::uint64_t>{2, 3, 4, 5});
  CHECK(a.trace() == 7);
  CHECK_CBF_ERROR(a += ConfusionMatrix(3), ErrorKind::Dimension);
}

TEST_CASE("metrics csv") {
  const auto t = generic(3);
  CHECK(metrics_csv_header(*t) == "iteration,stage,oa,miou,iou_c0,iou_c1,iou_c2");
  const auto m = metrics_of(matrix(3, {2, 2, 0, 0, 6, 0, 0, 0, 0}));
  CHECK(metrics_csv_row(2, "stage1", m) == "2,stage1,0.800000,0.625000,0.500000,0.750000,");
}

}
