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


#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "cbf/synth.hpp"
#include "check.hpp"
#include "support.hpp"

using namespace cbf;
using namespace cbf::test;

namespace {

SceneSpec plain_spec(ClassId background, int w, int h) {
  SceneSpec spec = default_scene_spec(0, 96);
  spec.width = w;
  spec.height = h;
  spec.background = background;
  spec.shapes.clear();
  spec.seed = 5;
  return spec;
}

// The rule each default corruption pair is built for.
int rule_for(ClassId truth, ClassId wrong) {
  static const std::map<std::pair<ClassId, ClassId>, int> table = {
      {{kGround, kVeg}, 1},      {{kPavement, kGround}, 2}, {{kWater, kBuilding}, 3},
      {{kVeg, kWater}, 4},       {{kWater, kAirplane}, 5},  {{kVeg, kCar}, 6},
      {{kGround, kAirplane}, 7}, {{kGround, kCar}, 8},      {{kGround, kShip}, 9}};
  const auto it = table.find({truth, wrong});
  return it == table.end() ? 0 : it->second;
}

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("background only") {
  const auto scene = generate_scene(plain_spec(kWater, 10, 8));
  for (auto l : scene.truth.labels()) CHECK(l == kWater);
  CHECK(scene.image.width() == 10);
  CHECK(scene.image.channels() == 3);
  for (auto s : scene.shadow_mask) CHECK(s == 0);
}

TEST_CASE("generation is deterministic") {
  const auto spec = default_scene_spec(17);
  const auto a = generate_scene(spec), b = generate_scene(spec);
  CHECK(a.image == b.image);
  CHECK(a.truth == b.truth);
  CHECK(a.shadow_mask == b.shadow_mask);
  auto other = spec;
  other.seed = 18;
  CHECK_FALSE(generate_scene(other).truth == a.truth);
}

TEST_CASE("building areas add up") {
  auto spec = plain_spec(kGround, 40, 40);
  ShapeSpec b;
  b.kind = ShapeKind::Rectangle;
  b.cls = kBuilding;
  b.count_min = b.count_max = 5;
  b.size_min = b.size_max = 4;
  b.on = kGround;
  spec.shapes.push_back(b);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    spec.seed = seed;
    const auto scene = generate_scene(spec);
    std::map<ClassId, std::size_t> hist;
    for (auto l : scene.truth.labels()) ++hist[l];
    CHECK(hist[kBuilding] == 5u * 4u * 4u);
    CHECK(hist[kGround] == 1600u - 80u);
    CHECK(hist.size() == 2);
  }
}

TEST_CASE("shadows darken pixels next to buildings") {
  auto spec = plain_spec(kGround, 30, 30);
  ShapeSpec b;
  b.cls = kBuilding;
  b.size_min = b.size_max = 5;
  b.on = kGround;
  b.casts_shadow = true;
  spec.shapes.push_back(b);
  spec.noise_sigma = 0.0f;
  const auto scene = generate_scene(spec);
  std::size_t shadowed = 0;
  for (std::size_t i = 0; i < scene.shadow_mask.size(); ++i) {
    if (!scene.shadow_mask[i]) continue;
    ++shadowed;
    CHECK(scene.truth[i] == kGround);
    const int x = int(i % 30), y = int(i / 30);
    CHECK(scene.image.at(x, y, 0) == doctest::Approx(spec.colors[kGround][0] * spec.shadow.factor));
  }
  // Shifts of a 5x5 square by (k,k), k = 1..3, cover 25 + 9 + 9 pixels; 16
  // of them overlap the square. Clipping at the frame can only remove some.
  int max_x = 0, max_y = 0;
  for (std::size_t i = 0; i < scene.truth.pixel_count(); ++i)
    if (scene.truth[i] == kBuilding) {
      max_x = std::max(max_x, int(i % 30));
      max_y = std::max(max_y, int(i / 30));
    }
  if (max_x + 3 < 30 && max_y + 3 < 30) CHECK(shadowed == 27);
  else CHECK(shadowed < 27);
  CHECK(shadowed > 0);
}

TEST_CASE("infeasible placement is reported") {
  auto spec = plain_spec(kVeg, 10, 10);
  ShapeSpec s;
  s.cls = kCar;
  s.size_min = s.size_max = 3;
  s.on = kPavement;
  spec.shapes.push_back(s);
  CHECK_CBF_ERROR(generate_scene(spec), ErrorKind::Parameter);
}

TEST_CASE("spec validation") {
  auto spec = plain_spec(kVeg, 10, 10);
  spec.width = 0;
  CHECK_CBF_ERROR(spec.validate(), ErrorKind::Parameter);
  spec = default_scene_spec(0);
  spec.colors[kGround] = spec.colors[kVeg];
  CHECK_CBF_ERROR(spec.validate(), ErrorKind::Parameter);
}

TEST_CASE("scene spec text round trip") {
  const auto spec = default_scene_spec(23, 64);
  const auto text = serialize_scene_spec(spec);
  const auto back = parse_scene_spec(text, ucm());
  CHECK(serialize_scene_spec(back) == text);
  const auto a = generate_scene(spec), b = generate_scene(back);
  CHECK(a.image == b.image);
  CHECK(a.truth == b.truth);
  CHECK_CBF_ERROR(parse_scene_spec("width = 10\nheight = ten\n", ucm()), ErrorKind::Format);
}

TEST_CASE("no holes means the truth comes back") {
  const auto scene = generate_scene(default_scene_spec(3));
  auto model = CorruptionModel::defaults(*ucm(), 1);
  model.hole_rate = 0.0;
  const auto c = corrupt(scene.truth, model);
  CHECK(c.holes.empty());
  const auto pred = argmax_labels(c.probs, ucm());
  CHECK(pred.labels == scene.truth);
  for (float f : pred.confidence) CHECK(f == doctest::Approx(0.9f));
}

TEST_CASE("enclosed ground patch inside pavement") {
  std::vector<ClassId> l(100, kPavement);
  for (int y = 4; y < 7; ++y)
    for (int x = 3; x < 6; ++x) l[std::size_t(y) * 10 + x] = kGround;
  const LabelMap truth(10, 10, l, ucm());
  CorruptionModel model;
  model.pairs = {{kGround, kVeg}};
  model.hole_rate = 1.0;
  model.whole_regions = true;
  const auto c = corrupt(truth, model);
  REQUIRE(c.holes.size() == 1);
  const auto pred = argmax_labels(c.probs, ucm());
  for (std::size_t i = 0; i < 100; ++i) {
    if (l[i] == kGround) {
      CHECK(pred.labels[i] == kVeg);
      CHECK(pred.confidence[i] == 0.45f);
      CHECK(c.mask[i] == 1);
    } else {
      CHECK(pred.labels[i] == kPavement);
      CHECK(pred.confidence[i] == 0.9f);
    }
  }
  // The mislabeled patch satisfies the vegetation hole rule.
  const auto units = aggregate_units(pixel_superpixels(10, 10), pred.labels, pred.confidence, 0.7);
  const auto graph = build_graph(units, 10, 10);
  std::vector<ClassId> cls;
  std::vector<bool> ok;
  for (const auto& u : units) {
    cls.push_back(u.unit_class);
    ok.push_back(u.status == UnitStatus::Classified);
  }
  const int hole = graph.unit_map()[43];
  const auto v = oracle_intra(hole, 10, 10, graph.unit_map(), cls, ok);
  REQUIRE(v.has_value());
  CHECK(v->rule == 1);
  CHECK(v->new_class == kPavement);
}

TEST_CASE("corrupted rows stay normalized") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto scene = generate_scene(default_scene_spec(seed + 40));
    const auto c = corrupt(scene.truth, CorruptionModel::defaults(*ucm(), seed));
    for (std::size_t p = 0; p < c.probs.pixel_count(); ++p) {
      double s = 0;
      for (int k = 0; k < c.probs.classes(); ++k) s += c.probs.row(p)[k];
      CHECK(std::abs(s - 1.0) <= 1e-5);
    }
  }
}

TEST_CASE("corruption model validation") {
  CorruptionModel m;
  m.corrupted_confidence = 0.8f;
  CHECK_CBF_ERROR(m.validate(0.7), ErrorKind::Parameter);
  m = CorruptionModel{};
  m.pairs = {{kVeg, kVeg}};
  CHECK_CBF_ERROR(m.validate(0.7), ErrorKind::Parameter);
  m = CorruptionModel{};
  m.hole_rate = 1.5;
  CHECK_CBF_ERROR(m.validate(0.7), ErrorKind::Parameter);
}

TEST_CASE("every default hole is fixed by its rule") {
  std::set<int> rules_seen;
  const auto bench = default_benchmark(12, 4);
  for (std::size_t s = 0; s < bench.size(); ++s) {
    const auto& truth = bench[s].scene.truth;
    const auto c = corrupt(truth, CorruptionModel::defaults(*ucm(), s));
    const auto pred = argmax_labels(c.probs, ucm());
    const int w = truth.width(), h = truth.height();
    const auto units = aggregate_units(pixel_superpixels(w, h), pred.labels, pred.confidence, 0.7);
    const auto graph = build_graph(units, w, h);
    std::vector<ClassId> cls;
    std::vector<bool> ok;
    for (const auto& u : units) {
      cls.push_back(u.unit_class);
      ok.push_back(u.status == UnitStatus::Classified);
    }
    for (const auto& hole : c.holes) {
      const int expected = rule_for(hole.truth, hole.wrong);
      REQUIRE(expected > 0);
      const int unit = graph.unit_map()[hole.pixels.front()];
      // The hole is exactly one unit.
      CHECK(units[std::size_t(unit)].pixels == hole.pixels);
      CHECK(cls[std::size_t(unit)] == hole.wrong);
      CHECK_FALSE(ok[std::size_t(unit)]);
      const auto fired = oracle_intra_all(unit, w, h, graph.unit_map(), cls, ok);
      REQUIRE_FALSE(fired.empty());
      CHECK(fired.front().rule == expected);
      CHECK(fired.front().new_class == hole.truth);
      rules_seen.insert(expected);
    }
  }
  CHECK(rules_seen.size() >= 7);
}

TEST_CASE("benchmark split and naming") {
  const auto a = default_benchmark(10, 3, 48);
  const auto b = default_benchmark(10, 3, 48);
  REQUIRE(a.size() == 10);
  std::map<Split, int> count;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++count[a[i].split];
    CHECK(a[i].name == b[i].name);
    CHECK(a[i].split == b[i].split);
    CHECK(a[i].scene.image == b[i].scene.image);
  }
  CHECK(a[0].name == "scene_000");
  CHECK(count[Split::Train] == 6);
  CHECK(count[Split::Val] == 2);
  CHECK(count[Split::Test] == 2);
  CHECK(parse_split(to_string(Split::Val)) == Split::Val);
}

}
