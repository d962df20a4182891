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

#include <string>
#include <string_view>

#include "cbf/ontology.hpp"

namespace cbf {

// Line-oriented rule language; '#' starts a comment.
//
//   rule   := "rule" ID ":" SUBJECT ANTECEDENT "=>" CONSEQUENT
//   SUBJECT := ("mis" | "ok") CLASSSET
//   ANTECEDENT := "surroundedBy" CLASSSET | "noNeighborOf" CLASSSET
//               | "neighborhoodContains" CLASSSET | "always"
//   CONSEQUENT := "adoptSurroundClass" | "adoptMaxClass"
//               | "shadow" ("+1" | "-1") | "elevation" ("0" | "1" | "2")
//   CLASSSET := "{" NAME ("," NAME)* "}" | NAME
//
// Rules take priorities in order of appearance.

/// Throws ErrorKind::Syntax (message carries line:column),
/// ErrorKind::UnknownClass or ErrorKind::DuplicateRule.
RuleBase parse_rules(std::string_view text, TaxonomyPtr taxonomy);

std::string serialize_rules(const RuleBase& rules);

/// Text of both built-in bases, as shipped in rules/builtin.rules.
std::string builtin_rules_text(const Taxonomy& taxonomy);

}  // namespace cbf
