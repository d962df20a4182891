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

#include "cbf/ontology.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>

#include "cbf/error.hpp"

namespace cbf {
namespace {

void normalize(std::vector<ClassId>& set) {
  std::sort(set.begin(), set.end());
  set.erase(std::unique(set.begin(), set.end()), set.end());
}

bool contains(const std::vector<ClassId>& set, ClassId c) {
  return std::binary_search(set.begin(), set.end(), c);
}

bool antecedent_holds(const Antecedent& a, const RegionGraph& graph, int unit, const Snapshot& snap) {
  switch (a.kind) {
    case AntecedentKind::SurroundedBy:
      return is_surrounded_by(graph, unit, a.classes, snap);
    case AntecedentKind::NoNeighborOf:
      return !has_classified_neighbor_in(graph, unit, a.classes, snap);
    case AntecedentKind::NeighborhoodContains:
      return has_classified_neighbor_in(graph, unit, a.classes, snap);
    case AntecedentKind::Unconditional:
      return true;
  }
  return false;
}

bool subject_matches(const Rule& r, const UnitState& s) {
  return s.status == r.subject_status && contains(r.subject_classes, s.unit_class);
}

void check_units_graph(const std::vector<InferenceUnit>& units, const RegionGraph& graph) {
  if (units.size() != graph.unit_count())
    throw Error(ErrorKind::State, "unit list and region graph disagree on unit count");
}

// Built-in rule description in concept names, resolved later.
struct Template {
  const char* id;
  UnitStatus status;
  std::vector<const char*> subject;
  AntecedentKind antecedent;
  std::vector<const char*> antecedent_classes;
  ConsequentKind consequent;
  int value;
};

std::optional<std::vector<ClassId>> resolve(const std::vector<const char*>& names,
                                            const NameBindings& bindings, std::size_t n) {
  std::vector<ClassId> ids;
  for (const char* name : names) {
    auto it = bindings.find(name);
    if (it != bindings.end() && it->second >= 0 && std::size_t(it->second) < n)
      ids.push_back(it->second);
  }
  normalize(ids);
  if (ids.empty()) return std::nullopt;
  return ids;
}

RuleBase instantiate(TaxonomyPtr taxonomy, const NameBindings& bindings,
                     const std::vector<Template>& templates,
                     const std::vector<std::vector<ClassId>>* subject_override = nullptr) {
  if (!taxonomy || taxonomy->empty())
    throw Error(ErrorKind::Taxonomy, "built-in rules need a non-empty taxonomy");
  RuleBase base(taxonomy);
  int priority = 0;
  for (std::size_t i = 0; i < templates.size(); ++i) {
    const Template& t = templates[i];
    ++priority;
    std::optional<std::vector<ClassId>> subject;
    if (subject_override && !(*subject_override)[i].empty())
      subject = (*subject_override)[i];
    else if (!t.subject.empty())
      subject = resolve(t.subject, bindings, taxonomy->size());
    if (!subject) continue;
    Rule r;
    r.id = t.id;
    r.kind = kind_for(t.consequent);
    r.subject_status = t.status;
    r.subject_classes = *subject;
    r.antecedent.kind = t.antecedent;
    if (t.antecedent != AntecedentKind::Unconditional) {
      auto classes = resolve(t.antecedent_classes, bindings, taxonomy->size());
      if (!classes) continue;
      r.antecedent.classes = *classes;
    }
    r.consequent = {t.consequent, t.value};
    r.priority = priority;
    base.add(std::move(r));
  }
  return base;
}

}  // namespace

const char* to_string(RuleKind kind) {
  switch (kind) {
    case RuleKind::IntraCorrection: return "IntraCorrection";
    case RuleKind::ExtraShadow: return "ExtraShadow";
    case RuleKind::ExtraElevation: return "ExtraElevation";
  }
  return "?";
}

RuleKind kind_for(ConsequentKind consequent) {
  switch (consequent) {
    case ConsequentKind::AdoptSurroundClass:
    case ConsequentKind::AdoptMaxClass: return RuleKind::IntraCorrection;
    case ConsequentKind::AssertShadow: return RuleKind::ExtraShadow;
    case ConsequentKind::AssertElevation: return RuleKind::ExtraElevation;
  }
  return RuleKind::IntraCorrection;
}

bool Rule::same_meaning(const Rule& o) const {
  return id == o.id && kind == o.kind && subject_status == o.subject_status &&
         subject_classes == o.subject_classes && antecedent == o.antecedent &&
         consequent == o.consequent;
}

void RuleBase::add(Rule rule) {
  if (rule.id.empty()) throw Error(ErrorKind::RuleKind, "rule without id");
  if (find(rule.id)) throw Error(ErrorKind::DuplicateRule, "duplicate rule id '" + rule.id + "'");
  if (rule.kind != kind_for(rule.consequent.kind))
    throw Error(ErrorKind::RuleKind, "rule '" + rule.id + "': consequent does not match kind " +
                                         to_string(rule.kind));
  if (rule.kind == RuleKind::IntraCorrection && rule.subject_status != UnitStatus::MisClassified)
    throw Error(ErrorKind::RuleKind, "rule '" + rule.id + "': correction rules apply to misclassified units only");
  if (rule.consequent.kind == ConsequentKind::AssertShadow && rule.consequent.value != 1 &&
      rule.consequent.value != -1)
    throw Error(ErrorKind::RuleKind, "rule '" + rule.id + "': shadow must be +1 or -1");
  if (rule.consequent.kind == ConsequentKind::AssertElevation &&
      (rule.consequent.value < 0 || rule.consequent.value > 2))
    throw Error(ErrorKind::RuleKind, "rule '" + rule.id + "': elevation must be 0, 1 or 2");
  normalize(rule.subject_classes);
  normalize(rule.antecedent.classes);
  if (rule.subject_classes.empty())
    throw Error(ErrorKind::RuleKind, "rule '" + rule.id + "' has no subject classes");
  if ((rule.antecedent.kind == AntecedentKind::Unconditional) != rule.antecedent.classes.empty())
    throw Error(ErrorKind::RuleKind, "rule '" + rule.id + "': antecedent class set mismatch");
  if (taxonomy_) {
    const auto n = ClassId(taxonomy_->size());
    for (const auto* set : {&rule.subject_classes, &rule.antecedent.classes})
      for (ClassId c : *set)
        if (c < 0 || c >= n)
          throw Error(ErrorKind::UnknownClass, "rule '" + rule.id + "' references class id " +
                                                   std::to_string(c) + " outside the taxonomy");
  }
  auto pos = std::upper_bound(rules_.begin(), rules_.end(), rule, [](const Rule& a, const Rule& b) {
    return a.priority != b.priority ? a.priority < b.priority : a.id < b.id;
  });
  rules_.insert(pos, std::move(rule));
}

void RuleBase::append(const RuleBase& other) {
  if (!taxonomy_) taxonomy_ = other.taxonomy_;
  const int offset = rules_.empty() ? 0 : rules_.back().priority;
  for (Rule r : other.rules_) {
    r.priority += offset;
    add(std::move(r));
  }
}

RuleBase RuleBase::filtered(std::span<const RuleKind> kinds) const {
  RuleBase out(taxonomy_);
  for (const auto& r : rules_)
    if (std::find(kinds.begin(), kinds.end(), r.kind) != kinds.end()) out.rules_.push_back(r);
  return out;
}

const Rule* RuleBase::find(std::string_view id) const {
  for (const auto& r : rules_)
    if (r.id == id) return &r;
  return nullptr;
}

bool RuleBase::semantically_equal(const RuleBase& other) const {
  if (rules_.size() != other.rules_.size()) return false;
  for (std::size_t i = 0; i < rules_.size(); ++i)
    if (!rules_[i].same_meaning(other.rules_[i])) return false;
  return true;
}

NameBindings default_bindings(const Taxonomy& taxonomy) {
  NameBindings b;
  for (const char* concept_name :
       {"Vegetation", "Ground", "Pavement", "Building", "Water", "Airplane", "Car", "Ship"})
    if (auto id = taxonomy.find(concept_name)) b[concept_name] = *id;
  return b;
}

RuleBase builtin_intra_rules(TaxonomyPtr taxonomy, const NameBindings& bindings) {
  using A = AntecedentKind;
  using C = ConsequentKind;
  constexpr auto mis = UnitStatus::MisClassified;
  static const std::vector<Template> templates = {
      {"r1", mis, {"Vegetation"}, A::SurroundedBy, {"Ground", "Pavement", "Building", "Water"}, C::AdoptSurroundClass, 0},
      {"r2", mis, {"Ground"}, A::SurroundedBy, {"Pavement", "Building", "Water"}, C::AdoptSurroundClass, 0},
      {"r3", mis, {"Building"}, A::SurroundedBy, {"Ground", "Water"}, C::AdoptSurroundClass, 0},
      {"r4", mis, {"Water"}, A::SurroundedBy, {"Vegetation", "Building", "Pavement"}, C::AdoptSurroundClass, 0},
      {"r5", mis, {"Airplane"}, A::SurroundedBy, {"Vegetation", "Building", "Water"}, C::AdoptSurroundClass, 0},
      {"r6", mis, {"Car"}, A::SurroundedBy, {"Vegetation", "Water"}, C::AdoptSurroundClass, 0},
      {"r7", mis, {"Airplane"}, A::NoNeighborOf, {"Pavement"}, C::AdoptMaxClass, 0},
      {"r8", mis, {"Car"}, A::NoNeighborOf, {"Pavement"}, C::AdoptMaxClass, 0},
      {"r9", mis, {"Ship"}, A::NoNeighborOf, {"Water"}, C::AdoptMaxClass, 0},
  };
  return instantiate(std::move(taxonomy), bindings, templates);
}

RuleBase builtin_intra_rules(TaxonomyPtr taxonomy) {
  if (!taxonomy) throw Error(ErrorKind::Taxonomy, "built-in rules need a taxonomy");
  const auto b = default_bindings(*taxonomy);
  return builtin_intra_rules(std::move(taxonomy), b);
}

RuleBase builtin_extra_rules(TaxonomyPtr taxonomy, const NameBindings& bindings) {
  using A = AntecedentKind;
  using C = ConsequentKind;
  constexpr auto mis = UnitStatus::MisClassified;
  constexpr auto ok = UnitStatus::Classified;
  static const std::vector<Template> templates = {
      {"e1", mis, {"Pavement", "Ground", "Water", "Car"}, A::NeighborhoodContains, {"Building"}, C::AssertShadow, 1},
      {"e2", mis, {"Vegetation", "Car", "Ship", "Airplane"}, A::NoNeighborOf, {"Building"}, C::AssertShadow, -1},
      {"e3", ok, {"Ground"}, A::NoNeighborOf, {"Building", "Vegetation"}, C::AssertShadow, -1},
      {"e4", ok, {"Building"}, A::Unconditional, {}, C::AssertShadow, -1},
      {"e5", ok, {}, A::Unconditional, {}, C::AssertElevation, 0},
      {"e6", ok, {}, A::Unconditional, {}, C::AssertElevation, 1},
      {"e7", ok, {}, A::Unconditional, {}, C::AssertElevation, 2},
  };
  if (!taxonomy || taxonomy->empty())
    throw Error(ErrorKind::Taxonomy, "built-in rules need a non-empty taxonomy");
  std::vector<std::vector<ClassId>> subjects(templates.size());
  for (const auto& c : taxonomy->classes()) subjects[4 + std::size_t(c.band)].push_back(c.id);
  // An empty band leaves its elevation rule without subjects, which drops it.
  return instantiate(std::move(taxonomy), bindings, templates, &subjects);
}

RuleBase builtin_extra_rules(TaxonomyPtr taxonomy) {
  if (!taxonomy) throw Error(ErrorKind::Taxonomy, "built-in rules need a taxonomy");
  const auto b = default_bindings(*taxonomy);
  return builtin_extra_rules(std::move(taxonomy), b);
}

IntraResult apply_intra(const LabelMap& labels, const std::vector<InferenceUnit>& units,
                        const RegionGraph& graph, const RuleBase& rules, std::span<const int> order) {
  for (const auto& r : rules.rules())
    if (r.kind != RuleKind::IntraCorrection)
      throw Error(ErrorKind::RuleKind, "rule '" + r.id + "' is not an intra-taxonomy correction rule");
  check_units_graph(units, graph);
  if (labels.width() != graph.width() || labels.height() != graph.height())
    throw Error(ErrorKind::Dimension, "label map and region graph differ in size");

  const Snapshot before = snapshot_of(units);
  std::vector<int> visit;
  if (order.empty()) {
    visit.resize(units.size());
    std::iota(visit.begin(), visit.end(), 0);
  } else {
    visit.assign(order.begin(), order.end());
    std::vector<int> sorted = visit;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i)
      if (sorted.size() != units.size() || sorted[i] != int(i))
        throw Error(ErrorKind::Parameter, "visiting order is not a permutation of unit ids");
  }

  std::vector<std::optional<Correction>> fired(units.size());
  for (int u : visit) {
    const UnitState& s = before[std::size_t(u)];
    if (s.status != UnitStatus::MisClassified) continue;
    for (const auto& r : rules.rules()) {
      if (!subject_matches(r, s) || !antecedent_holds(r.antecedent, graph, u, before)) continue;
      const auto target = max_class(graph, u, before);
      if (!target) continue;
      if (*target != s.unit_class) fired[std::size_t(u)] = Correction{u, s.unit_class, *target, r.id};
      break;
    }
  }

  IntraResult result{labels, {}, before};
  std::vector<ClassId> out = labels.labels();
  for (std::size_t u = 0; u < units.size(); ++u) {
    if (!fired[u]) continue;
    for (auto p : units[u].pixels) out[p] = fired[u]->new_class;
    result.corrected[u] = {fired[u]->new_class, UnitStatus::Classified};
    result.log.entries.push_back(*fired[u]);
  }
  result.labels = labels.with_labels(std::move(out));
  return result;
}

ExtraChannels apply_extra(const std::vector<InferenceUnit>& units, const RegionGraph& graph,
                          const RuleBase& rules, const Snapshot& corrected) {
  for (const auto& r : rules.rules())
    if (r.kind == RuleKind::IntraCorrection)
      throw Error(ErrorKind::RuleKind, "rule '" + r.id + "' is not an extra-taxonomy rule");
  check_units_graph(units, graph);
  if (corrected.size() != units.size())
    throw Error(ErrorKind::State, "corrected snapshot does not match the unit list");

  ExtraChannels out = zero_extra_channels(graph.width(), graph.height());
  for (std::size_t u = 0; u < units.size(); ++u) {
    const UnitState& s = corrected[u];
    std::optional<int> shadow, elevation;
    for (const auto& r : rules.rules()) {
      auto& slot = r.kind == RuleKind::ExtraShadow ? shadow : elevation;
      if (slot || !subject_matches(r, s)) continue;
      if (antecedent_holds(r.antecedent, graph, int(u), corrected)) slot = r.consequent.value;
      if (shadow && elevation) break;
    }
    for (auto p : units[u].pixels) {
      out.shadow[p] = std::int8_t(shadow.value_or(0));
      out.elevation[p] = std::int8_t(elevation.value_or(0));
    }
  }
  return out;
}

}  // namespace cbf
