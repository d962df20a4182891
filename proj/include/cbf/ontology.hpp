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

#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cbf/core.hpp"
#include "cbf/spatial.hpp"
#include "cbf/superpixel.hpp"

namespace cbf {

enum class RuleKind : std::uint8_t { IntraCorrection, ExtraShadow, ExtraElevation };

enum class AntecedentKind : std::uint8_t {
  SurroundedBy,          // every Classified neighbour is in the set (and one exists)
  NoNeighborOf,          // no Classified neighbour is in the set
  NeighborhoodContains,  // some Classified neighbour is in the set
  Unconditional,
};

enum class ConsequentKind : std::uint8_t {
  AdoptSurroundClass,
  AdoptMaxClass,
  AssertShadow,     // value is -1 or +1
  AssertElevation,  // value is 0, 1 or 2
};

const char* to_string(RuleKind kind);

struct Antecedent {
  AntecedentKind kind = AntecedentKind::Unconditional;
  std::vector<ClassId> classes;  // sorted, unique; empty for Unconditional

  bool operator==(const Antecedent&) const = default;
};

struct Consequent {
  ConsequentKind kind = ConsequentKind::AdoptMaxClass;
  int value = 0;

  bool operator==(const Consequent&) const = default;
};

struct Rule {
  std::string id;
  RuleKind kind = RuleKind::IntraCorrection;
  UnitStatus subject_status = UnitStatus::MisClassified;
  std::vector<ClassId> subject_classes;  // sorted, unique
  Antecedent antecedent;
  Consequent consequent;
  int priority = 0;

  /// Equality of meaning: everything except the numeric priority.
  bool same_meaning(const Rule& other) const;
  bool operator==(const Rule&) const = default;
};

/// The kind a consequent implies.
RuleKind kind_for(ConsequentKind consequent);

/// Rules ordered by (priority, id). Ids are unique.
class RuleBase {
 public:
  RuleBase() = default;
  explicit RuleBase(TaxonomyPtr taxonomy) : taxonomy_(std::move(taxonomy)) {}

  /// Validates the rule (kind/consequent agreement, value ranges, class ids)
  /// and inserts it in priority order. Throws ErrorKind::DuplicateRule or
  /// ErrorKind::RuleKind.
  void add(Rule rule);

  /// Appends every rule of `other`, shifting priorities after this base's.
  void append(const RuleBase& other);

  /// Rules of the given kinds only, order preserved.
  RuleBase filtered(std::span<const RuleKind> kinds) const;

  const std::vector<Rule>& rules() const { return rules_; }
  std::size_t size() const { return rules_.size(); }
  bool empty() const { return rules_.empty(); }
  const TaxonomyPtr& taxonomy() const { return taxonomy_; }
  const Rule* find(std::string_view id) const;

  /// Same rules with the same meaning in the same order.
  bool semantically_equal(const RuleBase& other) const;

 private:
  TaxonomyPtr taxonomy_;
  std::vector<Rule> rules_;
};

/// Maps the concept names used by the built-in rules (Vegetation, Ground,
/// Pavement, Building, Water, Airplane, Car, Ship) onto taxonomy ids.
using NameBindings = std::map<std::string, ClassId>;

/// Binds each concept to the taxonomy class of the same name, when present.
NameBindings default_bindings(const Taxonomy& taxonomy);

/// Hole-filling rules r1..r6 (adopt the surrounding class) followed by the
/// spatial-consistency rules r7..r9 (adopt the dominant neighbour class).
/// Class references that do not resolve are removed; a rule left with an
/// empty subject or antecedent set is dropped.
RuleBase builtin_intra_rules(TaxonomyPtr taxonomy, const NameBindings& bindings);
RuleBase builtin_intra_rules(TaxonomyPtr taxonomy);

/// Shadow rules e1..e4 and elevation rules e5..e7; the elevation rules take
/// their class sets from the taxonomy's elevation bands.
RuleBase builtin_extra_rules(TaxonomyPtr taxonomy, const NameBindings& bindings);
RuleBase builtin_extra_rules(TaxonomyPtr taxonomy);

struct Correction {
  int unit = 0;
  ClassId old_class = 0;
  ClassId new_class = 0;
  std::string rule_id;

  bool operator==(const Correction&) const = default;
};

/// One entry per corrected unit, ascending unit id.
struct CorrectionLog {
  std::vector<Correction> entries;

  bool empty() const { return entries.empty(); }
  std::size_t size() const { return entries.size(); }
  bool operator==(const CorrectionLog&) const = default;
};

struct IntraResult {
  LabelMap labels;
  CorrectionLog log;
  /// Unit states after the pass: corrected units carry their new class and
  /// count as Classified, everything else is unchanged.
  Snapshot corrected;
};

/// One pass of intra-taxonomy correction. Antecedents read only the
/// pre-pass snapshot, so the result does not depend on `order` (the unit
/// visiting order; empty means ascending ids). Each MisClassified unit takes
/// the consequent of the first rule that fires for it. Pixels outside
/// corrected units keep their label from `labels`.
IntraResult apply_intra(const LabelMap& labels, const std::vector<InferenceUnit>& units,
                        const RegionGraph& graph, const RuleBase& rules,
                        std::span<const int> order = {});

/// Infers shadow and elevation per unit from the corrected snapshot; each
/// channel takes the value of the first firing rule, 0 otherwise.
ExtraChannels apply_extra(const std::vector<InferenceUnit>& units, const RegionGraph& graph,
                          const RuleBase& rules, const Snapshot& corrected);

}  // namespace cbf
