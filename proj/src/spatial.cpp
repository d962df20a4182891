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

#include "cbf/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "cbf/error.hpp"

namespace cbf {
namespace {

bool contains(std::span<const ClassId> set, ClassId c) {
  return std::find(set.begin(), set.end(), c) != set.end();
}

void check_snapshot(const RegionGraph& g, const Snapshot& s) {
  if (s.size() != g.unit_count())
    throw Error(ErrorKind::State, "snapshot covers " + std::to_string(s.size()) +
                                      " units, graph has " + std::to_string(g.unit_count()));
}

}  // namespace

Snapshot snapshot_of(const std::vector<InferenceUnit>& units) {
  Snapshot s;
  s.reserve(units.size());
  for (const auto& u : units) s.push_back({u.unit_class, u.status});
  return s;
}

const char* to_string(Direction d) {
  static const char* names[] = {"E", "NE", "N", "NW", "W", "SW", "S", "SE"};
  return names[int(d)];
}

void RegionGraph::check(int unit) const {
  if (unit < 0 || std::size_t(unit) >= adjacency_.size())
    throw Error(ErrorKind::InvalidId, "unit id " + std::to_string(unit) + " out of range");
}

std::size_t RegionGraph::edge_count() const {
  std::size_t total = 0;
  for (const auto& a : adjacency_) total += a.size();
  return total / 2;
}

std::span<const RegionGraph::Edge> RegionGraph::edges(int unit) const {
  check(unit);
  return adjacency_[std::size_t(unit)];
}

std::vector<int> RegionGraph::neighbors(int unit) const {
  std::vector<int> out;
  for (const auto& e : edges(unit)) out.push_back(e.neighbor);
  return out;
}

std::uint64_t RegionGraph::boundary_length(int a, int b) const {
  for (const auto& e : edges(a))
    if (e.neighbor == b) return e.boundary;
  check(b);
  return 0;
}

std::uint64_t RegionGraph::area(int unit) const {
  check(unit);
  return area_[std::size_t(unit)];
}

double RegionGraph::centroid_x(int unit) const {
  check(unit);
  return cx_[std::size_t(unit)];
}

double RegionGraph::centroid_y(int unit) const {
  check(unit);
  return cy_[std::size_t(unit)];
}

Direction RegionGraph::direction_of(int from, int to) const {
  const double dx = centroid_x(to) - centroid_x(from);
  const double dy = centroid_y(from) - centroid_y(to);
  double angle = std::atan2(dy, dx);
  if (angle < 0) angle += 2.0 * M_PI;
  const int sector = int(std::floor(angle / (M_PI / 4.0) + 0.5)) % 8;
  return Direction(sector);
}

RegionGraph build_graph(const std::vector<InferenceUnit>& units, int width, int height) {
  if (width <= 0 || height <= 0) throw Error(ErrorKind::Dimension, "graph dimensions must be positive");
  const std::size_t n = std::size_t(width) * height;
  RegionGraph g;
  g.width_ = width;
  g.height_ = height;
  g.unit_map_.assign(n, -1);
  g.area_.assign(units.size(), 0);
  g.cx_.assign(units.size(), 0.0);
  g.cy_.assign(units.size(), 0.0);
  for (std::size_t i = 0; i < units.size(); ++i) {
    if (units[i].id != int(i))
      throw Error(ErrorKind::InvalidId, "unit at position " + std::to_string(i) + " has id " +
                                            std::to_string(units[i].id));
    double sx = 0.0, sy = 0.0;
    for (auto p : units[i].pixels) {
      if (p >= n) throw Error(ErrorKind::Partition, "unit pixel outside the image");
      if (g.unit_map_[p] >= 0)
        throw Error(ErrorKind::Partition, "pixel " + std::to_string(p) + " belongs to two units");
      g.unit_map_[p] = std::int32_t(i);
      sx += double(p % std::size_t(width));
      sy += double(p / std::size_t(width));
    }
    g.area_[i] = units[i].pixels.size();
    if (!units[i].pixels.empty()) {
      g.cx_[i] = sx / double(units[i].pixels.size());
      g.cy_[i] = sy / double(units[i].pixels.size());
    }
  }
  if (std::find(g.unit_map_.begin(), g.unit_map_.end(), -1) != g.unit_map_.end())
    throw Error(ErrorKind::Partition, "units do not cover every pixel");

  std::vector<std::map<int, std::uint64_t>> acc(units.size());
  const auto& m = g.unit_map_;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const std::size_t p = std::size_t(y) * width + x;
      if (x + 1 < width && m[p] != m[p + 1]) {
        ++acc[m[p]][m[p + 1]];
        ++acc[m[p + 1]][m[p]];
      }
      if (y + 1 < height && m[p] != m[p + width]) {
        ++acc[m[p]][m[p + width]];
        ++acc[m[p + width]][m[p]];
      }
    }
  }
  g.adjacency_.resize(units.size());
  for (std::size_t i = 0; i < units.size(); ++i)
    for (const auto& [nb, len] : acc[i]) g.adjacency_[i].push_back({nb, len});
  return g;
}

std::vector<int> neighbors(const RegionGraph& graph, int unit) { return graph.neighbors(unit); }

bool is_surrounded_by(const RegionGraph& graph, int unit, std::span<const ClassId> allowed,
                      const Snapshot& snapshot) {
  check_snapshot(graph, snapshot);
  bool witness = false;
  for (const auto& e : graph.edges(unit)) {
    const UnitState& s = snapshot[std::size_t(e.neighbor)];
    if (s.status != UnitStatus::Classified) continue;
    if (!contains(allowed, s.unit_class)) return false;
    witness = true;
  }
  return witness;
}

std::optional<ClassId> max_class(const RegionGraph& graph, int unit, const Snapshot& snapshot) {
  check_snapshot(graph, snapshot);
  std::map<ClassId, std::uint64_t> area;
  for (const auto& e : graph.edges(unit)) {
    const UnitState& s = snapshot[std::size_t(e.neighbor)];
    if (s.status == UnitStatus::Classified) area[s.unit_class] += graph.area(e.neighbor);
  }
  std::optional<ClassId> best;
  std::uint64_t best_area = 0;
  for (const auto& [cls, a] : area)  // ascending class id, strict > keeps the lowest on ties
    if (!best || a > best_area) {
      best = cls;
      best_area = a;
    }
  return best;
}

bool has_classified_neighbor_in(const RegionGraph& graph, int unit, std::span<const ClassId> classes,
                                const Snapshot& snapshot) {
  check_snapshot(graph, snapshot);
  for (const auto& e : graph.edges(unit)) {
    const UnitState& s = snapshot[std::size_t(e.neighbor)];
    if (s.status == UnitStatus::Classified && contains(classes, s.unit_class)) return true;
  }
  return false;
}

}  // namespace cbf
