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


// Helpers shared by the unit tests and the acceptance binary.

#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cbf/core.hpp"
#include "cbf/ontology.hpp"
#include "cbf/spatial.hpp"
#include "cbf/superpixel.hpp"

namespace cbf::test {

// UCM class ids, fixed by Taxonomy::ucm8().
enum Ucm : ClassId { kVeg = 0, kGround, kPavement, kBuilding, kWater, kAirplane, kCar, kShip };

inline TaxonomyPtr ucm() {
  static const TaxonomyPtr tax = std::make_shared<const Taxonomy>(Taxonomy::ucm8());
  return tax;
}

/// V G P B W A C S; lowercase marks a low-confidence pixel.
inline ClassId class_of(char c) {
  switch (c) {
    case 'V': case 'v': return kVeg;
    case 'G': case 'g': return kGround;
    case 'P': case 'p': return kPavement;
    case 'B': case 'b': return kBuilding;
    case 'W': case 'w': return kWater;
    case 'A': case 'a': return kAirplane;
    case 'C': case 'c': return kCar;
    case 'S': case 's': return kShip;
  }
  throw std::invalid_argument(std::string("bad grid char ") + c);
}

struct Grid {
  int width = 0;
  int height = 0;
  std::vector<ClassId> labels;
  std::vector<float> conf;

  LabelMap label_map() const { return LabelMap(width, height, labels, ucm()); }
};

inline Grid parse_grid(std::initializer_list<std::string_view> rows, float high = 0.9f,
                       float low = 0.45f) {
  Grid g;
  g.height = int(rows.size());
  for (auto row : rows) {
    g.width = int(row.size());
    for (char c : row) {
      g.labels.push_back(class_of(c));
      g.conf.push_back(c >= 'a' && c <= 'z' ? low : high);
    }
  }
  return g;
}

/// One superpixel per pixel, so units are exactly the same-class components.
inline SuperpixelMap pixel_superpixels(int width, int height) {
  SuperpixelMap m;
  m.width = width;
  m.height = height;
  m.k_actual = width * height;
  m.assignment.resize(std::size_t(width) * height);
  for (std::size_t i = 0; i < m.assignment.size(); ++i) m.assignment[i] = std::int32_t(i);
  return m;
}

struct Reasoned {
  std::vector<InferenceUnit> units;
  RegionGraph graph;
  IntraResult intra;
  ExtraChannels extra;
};

inline Reasoned reason_grid(const Grid& g, const RuleBase& intra, const RuleBase& extra,
                            double f_t = 0.7) {
  Reasoned r;
  const LabelMap labels = g.label_map();
  r.units = aggregate_units(pixel_superpixels(g.width, g.height), labels, g.conf, f_t);
  r.graph = build_graph(r.units, g.width, g.height);
  r.intra = apply_intra(labels, r.units, r.graph, intra);
  r.extra = apply_extra(r.units, r.graph, extra, r.intra.corrected);
  return r;
}

inline Reasoned reason_grid(const Grid& g) {
  return reason_grid(g, builtin_intra_rules(ucm()), builtin_extra_rules(ucm()));
}

// Reference evaluation of the correction table written directly against
// pixels, without the rule engine or the region graph.
struct OracleVerdict {
  int rule = 0;  // 1..9
  ClassId new_class = 0;
};

/// Every rule whose antecedent holds for `unit`, in table order. `unit_of`
/// maps pixels to unit indices; `cls` and `ok` describe units.
inline std::vector<OracleVerdict> oracle_intra_all(int unit, int width, int height,
                                                   const std::vector<std::int32_t>& unit_of,
                                                   const std::vector<ClassId>& cls,
                                                   const std::vector<bool>& ok) {
  std::set<int> nbrs;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int a = unit_of[std::size_t(y) * width + x];
      if (x + 1 < width) {
        const int b = unit_of[std::size_t(y) * width + x + 1];
        if (a == unit && b != unit) nbrs.insert(b);
        if (b == unit && a != unit) nbrs.insert(a);
      }
      if (y + 1 < height) {
        const int b = unit_of[std::size_t(y + 1) * width + x];
        if (a == unit && b != unit) nbrs.insert(b);
        if (b == unit && a != unit) nbrs.insert(a);
      }
    }
  }
  std::map<ClassId, std::uint64_t> area;
  for (int n : nbrs) {
    if (!ok[std::size_t(n)]) continue;
    std::uint64_t px = 0;
    for (auto u : unit_of) px += u == n;
    area[cls[std::size_t(n)]] += px;
  }
  if (area.empty()) return {};
  ClassId best = area.begin()->first;
  for (const auto& [c, a] : area)
    if (a > area[best]) best = c;
  auto surrounded = [&](std::initializer_list<ClassId> allowed) {
    for (const auto& [c, a] : area)
      if (std::find(allowed.begin(), allowed.end(), c) == allowed.end()) return false;
    return true;
  };
  auto lacks = [&](ClassId c) { return area.count(c) == 0; };

  std::vector<OracleVerdict> fired;
  auto fire = [&](bool cond, int rule) {
    if (cond) fired.push_back({rule, best});
  };
  switch (cls[std::size_t(unit)]) {
    case kVeg:
      fire(surrounded({kGround, kPavement, kBuilding, kWater}), 1);
      break;
    case kGround:
      fire(surrounded({kPavement, kBuilding, kWater}), 2);
      break;
    case kBuilding:
      fire(surrounded({kGround, kWater}), 3);
      break;
    case kWater:
      fire(surrounded({kVeg, kPavement, kBuilding}), 4);
      break;
    case kAirplane:
      fire(surrounded({kVeg, kBuilding, kWater}), 5);
      fire(lacks(kPavement), 7);
      break;
    case kCar:
      fire(surrounded({kVeg, kWater}), 6);
      fire(lacks(kPavement), 8);
      break;
    case kShip:
      fire(lacks(kWater), 9);
      break;
  }
  return fired;
}

/// First firing rule in table order, which is the one that applies.
inline std::optional<OracleVerdict> oracle_intra(int unit, int width, int height,
                                                 const std::vector<std::int32_t>& unit_of,
                                                 const std::vector<ClassId>& cls,
                                                 const std::vector<bool>& ok) {
  const auto all = oracle_intra_all(unit, width, height, unit_of, cls, ok);
  if (all.empty()) return std::nullopt;
  return all.front();
}

/// Independent check of a superpixel map: total coverage, dense ids and
/// 4-connectivity of every superpixel. Returns an empty string when sound.
inline std::string partition_problem(const SuperpixelMap& m) {
  const std::size_t n = std::size_t(m.width) * m.height;
  if (m.assignment.size() != n) return "assignment length";
  if (m.k_actual <= 0) return "no superpixels";
  std::vector<std::size_t> size(std::size_t(m.k_actual), 0);
  std::vector<std::uint32_t> first(std::size_t(m.k_actual), 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto id = m.assignment[i];
    if (id < 0 || id >= m.k_actual) return "id out of range";
    if (size[std::size_t(id)]++ == 0) first[std::size_t(id)] = std::uint32_t(i);
  }
  for (auto s : size)
    if (s == 0) return "ids not dense";
  std::vector<bool> seen(n, false);
  for (int id = 0; id < m.k_actual; ++id) {
    std::vector<std::uint32_t> stack{first[std::size_t(id)]};
    seen[stack.back()] = true;
    std::size_t reached = 0;
    while (!stack.empty()) {
      const auto p = stack.back();
      stack.pop_back();
      ++reached;
      const int x = int(p % std::uint32_t(m.width)), y = int(p / std::uint32_t(m.width));
      const int dx[] = {1, -1, 0, 0}, dy[] = {0, 0, 1, -1};
      for (int k = 0; k < 4; ++k) {
        const int nx = x + dx[k], ny = y + dy[k];
        if (nx < 0 || ny < 0 || nx >= m.width || ny >= m.height) continue;
        const auto q = std::uint32_t(ny * m.width + nx);
        if (seen[q] || m.assignment[q] != id) continue;
        seen[q] = true;
        stack.push_back(q);
      }
    }
    if (reached != size[std::size_t(id)]) return "superpixel " + std::to_string(id) + " not connected";
  }
  return {};
}

struct OracleMetrics {
  double oa = 0.0;
  double miou = 0.0;
  std::vector<std::optional<double>> iou;
};

/// Per-pixel counting without a confusion matrix.
inline OracleMetrics oracle_metrics(const std::vector<ClassId>& pred, const std::vector<ClassId>& truth,
                                    int classes) {
  OracleMetrics m;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == truth[i];
  m.oa = double(correct) / double(pred.size());
  double sum = 0.0;
  int present = 0;
  for (ClassId c = 0; c < classes; ++c) {
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      inter += pred[i] == c && truth[i] == c;
      uni += pred[i] == c || truth[i] == c;
    }
    if (uni == 0) {
      m.iou.emplace_back();
      continue;
    }
    m.iou.emplace_back(double(inter) / double(uni));
    sum += *m.iou.back();
    ++present;
  }
  m.miou = sum / present;
  return m;
}

/// Fresh empty directory under the system temp path.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("cbf_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace cbf::test
