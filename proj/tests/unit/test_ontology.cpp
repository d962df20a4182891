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
#include <numeric>
#include <vector>

#include "cbf/ontology.hpp"
#include "cbf/rng.hpp"
#include "cbf/synth.hpp"
#include "check.hpp"
#include "golden.hpp"
#include "support.hpp"

using namespace cbf;
using namespace cbf::test;

namespace {

TaxonomyPtr taxonomy_without(std::initializer_list<std::string_view> drop) {
  std::vector<ClassInfo> kept;
  for (const auto& c : ucm()->classes()) {
    if (std::find(drop.begin(), drop.end(), c.name) != drop.end()) continue;
    kept.push_back({ClassId(kept.size()), c.name, c.band});
  }
  return std::make_shared<const Taxonomy>(Taxonomy(kept));
}

}  // namespace

TEST_SUITE("ontology") {

TEST_CASE("built-in rule counts") {
  const auto intra = builtin_intra_rules(ucm());
  CHECK(intra.size() == 9);
  std::vector<std::string> ids;
  for (const auto& r : intra.rules()) ids.push_back(r.id);
  CHECK(ids == std::vector<std::string>{"r1", "r2", "r3", "r4", "r5", "r6", "r7", "r8", "r9"});
  for (int i = 0; i < 6; ++i) {
    CHECK(intra.rules()[std::size_t(i)].antecedent.kind == AntecedentKind::SurroundedBy);
    CHECK(intra.rules()[std::size_t(i)].consequent.kind == ConsequentKind::AdoptSurroundClass);
  }
  for (int i = 6; i < 9; ++i) {
    CHECK(intra.rules()[std::size_t(i)].antecedent.kind == AntecedentKind::NoNeighborOf);
    CHECK(intra.rules()[std::size_t(i)].consequent.kind == ConsequentKind::AdoptMaxClass);
  }
  const auto& r3 = *intra.find("r3");
  CHECK(r3.subject_classes == std::vector<ClassId>{kBuilding});
  CHECK(r3.antecedent.classes == std::vector<ClassId>{kGround, kWater});

  // Rules whose subject set or antecedent set does not resolve are dropped:
  // r5 and r7 are about airplanes, r9 about ships.
  const auto reduced = builtin_intra_rules(taxonomy_without({"Airplane", "Ship"}));
  CHECK(reduced.size() == 6);
  CHECK(reduced.find("r5") == nullptr);
  CHECK(reduced.find("r7") == nullptr);
  CHECK(reduced.find("r9") == nullptr);

  auto single = std::make_shared<const Taxonomy>(Taxonomy({{0, "Vegetation", ElevationBand::Low}}));
  CHECK(builtin_intra_rules(single).size() == 0);
  CHECK_CBF_ERROR(builtin_intra_rules(std::make_shared<const Taxonomy>()), ErrorKind::Taxonomy);

  const auto extra = builtin_extra_rules(ucm());
  CHECK(extra.size() == 7);
  CHECK(extra.find("e1")->consequent.value == 1);
  for (auto id : {"e2", "e3", "e4"}) CHECK(extra.find(id)->consequent.value == -1);
  CHECK(extra.find("e7")->subject_classes == std::vector<ClassId>{kBuilding});
  CHECK(extra.find("e7")->consequent.value == 2);
  CHECK(extra.find("e6")->subject_status == UnitStatus::Classified);
}

TEST_CASE("rule base ordering and validation") {
  RuleBase base(ucm());
  Rule r;
  r.id = "b";
  r.kind = RuleKind::IntraCorrection;
  r.subject_classes = {kCar};
  r.antecedent = {AntecedentKind::Unconditional, {}};
  r.consequent = {ConsequentKind::AdoptMaxClass, 0};
  r.priority = 1;
  base.add(r);
  r.id = "a";
  base.add(r);
  CHECK(base.rules()[0].id == "a");
  CHECK_CBF_ERROR(base.add(r), ErrorKind::DuplicateRule);

  Rule bad = r;
  bad.id = "c";
  bad.consequent = {ConsequentKind::AssertShadow, 1};
  CHECK_CBF_ERROR(base.add(bad), ErrorKind::RuleKind);
  bad.kind = RuleKind::ExtraShadow;
  bad.consequent.value = 2;
  CHECK_CBF_ERROR(base.add(bad), ErrorKind::RuleKind);

  const RuleKind extra_kinds[] = {RuleKind::ExtraShadow, RuleKind::ExtraElevation};
  const auto all = [] {
    RuleBase b = builtin_intra_rules(ucm());
    b.append(builtin_extra_rules(ucm()));
    return b;
  }();
  CHECK(all.size() == 16);
  CHECK(all.filtered(extra_kinds).semantically_equal(builtin_extra_rules(ucm())));
}

TEST_CASE("building enclosed by water becomes water") {
  const auto r = reason_grid(parse_grid({"WWWW", "WbbW", "WWWW"}));
  REQUIRE(r.intra.log.size() == 1);
  const auto& e = r.intra.log.entries[0];
  CHECK(e.old_class == kBuilding);
  CHECK(e.new_class == kWater);
  CHECK(e.rule_id == "r3");
  CHECK(e.unit == 1);
  for (auto l : r.intra.labels.labels()) CHECK(l == kWater);
}

TEST_CASE("misclassified car beside pavement stays") {
  const auto g = parse_grid({"VVVV", "VccP", "VVPP"});
  const auto r = reason_grid(g);
  CHECK(r.intra.log.empty());
  CHECK(r.intra.labels == g.label_map());
  // Hand evaluation of all nine antecedents for the car unit.
  const auto& um = r.graph.unit_map();
  std::vector<ClassId> cls;
  std::vector<bool> ok;
  for (const auto& u : r.units) {
    cls.push_back(u.unit_class);
    ok.push_back(u.status == UnitStatus::Classified);
  }
  CHECK_FALSE(oracle_intra(um[5], g.width, g.height, um, cls, ok).has_value());
}

TEST_CASE("nothing misclassified means nothing changes") {
  const auto g = parse_grid({"VVGG", "VBBG", "PPPP"});
  const auto r = reason_grid(g);
  CHECK(r.intra.log.empty());
  CHECK(r.intra.labels == g.label_map());
  CHECK(r.intra.corrected == snapshot_of(r.units));
}

TEST_CASE("golden correction scenes") {
  for (const auto& scene : golden_intra()) {
    CAPTURE(scene.rule);
    const auto g = grid_of(scene.pred);
    const auto truth = grid_of(scene.truth).label_map();
    const auto r = reason_grid(g);
    REQUIRE(r.intra.log.size() == 1);
    CHECK(r.intra.log.entries[0].rule_id == scene.rule);
    CHECK(r.intra.labels == truth);

    std::vector<ClassId> cls;
    std::vector<bool> ok;
    for (const auto& u : r.units) {
      cls.push_back(u.unit_class);
      ok.push_back(u.status == UnitStatus::Classified);
    }
    const int hole = r.intra.log.entries[0].unit;
    const auto verdict = oracle_intra(hole, g.width, g.height, r.graph.unit_map(), cls, ok);
    REQUIRE(verdict.has_value());
    CHECK("r" + std::to_string(verdict->rule) == scene.rule);
    CHECK(verdict->new_class == r.intra.log.entries[0].new_class);

    // Second pass over the corrected state changes nothing.
    std::vector<InferenceUnit> after = r.units;
    for (std::size_t u = 0; u < after.size(); ++u) {
      after[u].unit_class = r.intra.corrected[u].unit_class;
      after[u].status = r.intra.corrected[u].status;
    }
    const auto again = apply_intra(r.intra.labels, after, r.graph, builtin_intra_rules(ucm()));
    CHECK(again.log.empty());
    CHECK(again.labels == r.intra.labels);
  }
}

TEST_CASE("golden extra scenes") {
  for (const auto& scene : golden_extra()) {
    CAPTURE(scene.rule);
    const auto r = reason_grid(grid_of(scene.pred));
    CHECK(r.extra.shadow == channel_of(scene.shadow));
    CHECK(r.extra.elevation == channel_of(scene.elevation));
    CHECK_NOTHROW(r.extra.validate());
  }
}

TEST_CASE("extra rules see corrected units as classified") {
  // The car is corrected to Vegetation, so the misclassified-car shadow rule
  // no longer applies and it takes the low elevation of Vegetation.
  const auto r = reason_grid(parse_grid({"VVVV", "VccV", "VVVV"}));
  REQUIRE(r.intra.log.size() == 1);
  CHECK(r.extra.shadow == std::vector<std::int8_t>(12, 0));
  CHECK(r.extra.elevation == std::vector<std::int8_t>(12, 0));

  // An unmatched misclassified unit gets the default encoding.
  const auto none = reason_grid(parse_grid({"PPP", "PbP", "PPP"}));
  CHECK(none.intra.log.empty());
  CHECK(none.extra.shadow[4] == 0);
  CHECK(none.extra.elevation[4] == 0);
}

TEST_CASE("apply errors") {
  const auto g = parse_grid({"VVV", "VcV"});
  const auto r = reason_grid(g);
  CHECK_CBF_ERROR(apply_intra(g.label_map(), r.units, r.graph, builtin_extra_rules(ucm())),
                  ErrorKind::RuleKind);
  CHECK_CBF_ERROR(apply_extra(r.units, r.graph, builtin_intra_rules(ucm()), r.intra.corrected),
                  ErrorKind::RuleKind);
  Snapshot short_snap = r.intra.corrected;
  short_snap.pop_back();
  CHECK_CBF_ERROR(apply_extra(r.units, r.graph, builtin_extra_rules(ucm()), short_snap), ErrorKind::State);
  const std::vector<int> bad_order{0, 0};
  CHECK_CBF_ERROR(apply_intra(g.label_map(), r.units, r.graph, builtin_intra_rules(ucm()), bad_order),
                  ErrorKind::Parameter);
}

TEST_CASE("correction is independent of visiting order and logs every change") {
  const auto intra = builtin_intra_rules(ucm());
  auto model = CorruptionModel::defaults(*ucm(), 0);
  Rng rng(21);
  const auto bench = default_benchmark(4, 99, 48);
  for (std::size_t s = 0; s < bench.size(); ++s) {
    const Scene& scene = bench[s].scene;
    model.seed = std::uint64_t(s);
    const auto c = corrupt(scene.truth, model);
    const auto pred = argmax_labels(c.probs, ucm());
    const auto units = aggregate_units(pixel_superpixels(48, 48), pred.labels, pred.confidence, 0.7);
    const auto graph = build_graph(units, 48, 48);
    const auto base = apply_intra(pred.labels, units, graph, intra);
    std::vector<int> order(units.size());
    std::iota(order.begin(), order.end(), 0);
    for (int k = 0; k < 5; ++k) {
      for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[std::size_t(rng.uniform_int(0, std::int64_t(i) - 1))]);
      const auto other = apply_intra(pred.labels, units, graph, intra, order);
      CHECK(other.labels == base.labels);
      CHECK(other.log == base.log);
      CHECK(other.corrected == base.corrected);
    }
    // Every changed pixel lies in exactly one logged unit and takes its class.
    std::vector<int> logged(pred.labels.pixel_count(), -1);
    for (std::size_t k = 0; k < base.log.size(); ++k) {
      const auto& e = base.log.entries[k];
      CHECK(e.old_class != e.new_class);
      for (auto p : units[std::size_t(e.unit)].pixels) {
        CHECK(logged[p] == -1);
        logged[p] = int(k);
      }
    }
    for (std::size_t p = 0; p < logged.size(); ++p) {
      if (base.labels[p] != pred.labels[p]) {
        REQUIRE(logged[p] >= 0);
        CHECK(base.labels[p] == base.log.entries[std::size_t(logged[p])].new_class);
      } else {
        CHECK(logged[p] == -1);
      }
    }
  }
}

}
