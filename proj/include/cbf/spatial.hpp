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

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cbf/core.hpp"
#include "cbf/superpixel.hpp"

namespace cbf {

/// Class and status of every unit at the moment rules are evaluated.
struct UnitState {
  ClassId unit_class = 0;
  UnitStatus status = UnitStatus::Classified;

  bool operator==(const UnitState&) const = default;
};
using Snapshot = std::vector<UnitState>;

Snapshot snapshot_of(const std::vector<InferenceUnit>& units);

/// Eight 45-degree sectors, counter-clockwise from east, in image space
/// with y pointing down (so North is towards row 0).
enum class Direction : std::uint8_t { East, NorthEast, North, NorthWest, West, SouthWest, South, SouthEast };

const char* to_string(Direction d);

/// Undirected 4-adjacency between inference units, with the number of
/// adjacent pixel pairs across each shared border.
class RegionGraph {
 public:
  struct Edge {
    int neighbor;
    std::uint64_t boundary;
  };

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t unit_count() const { return adjacency_.size(); }
  std::size_t edge_count() const;

  /// Neighbours sorted by id. Throws ErrorKind::InvalidId.
  std::span<const Edge> edges(int unit) const;
  std::vector<int> neighbors(int unit) const;
  std::uint64_t boundary_length(int a, int b) const;
  std::uint64_t area(int unit) const;
  double centroid_x(int unit) const;
  double centroid_y(int unit) const;
  /// Bearing of `to`'s centroid as seen from `from`'s centroid.
  Direction direction_of(int from, int to) const;

  /// Unit index of every pixel.
  const std::vector<std::int32_t>& unit_map() const { return unit_map_; }

 private:
  friend RegionGraph build_graph(const std::vector<InferenceUnit>&, int, int);

  void check(int unit) const;

  int width_ = 0;
  int height_ = 0;
  std::vector<std::vector<Edge>> adjacency_;
  std::vector<std::uint64_t> area_;
  std::vector<double> cx_, cy_;
  std::vector<std::int32_t> unit_map_;
};

/// Throws ErrorKind::Partition unless the units cover every pixel exactly
/// once, and ErrorKind::InvalidId unless unit ids equal their positions.
RegionGraph build_graph(const std::vector<InferenceUnit>& units, int width, int height);

std::vector<int> neighbors(const RegionGraph& graph, int unit);

/// True when the unit has at least one Classified neighbour and every
/// Classified neighbour's class is in `allowed`. MisClassified neighbours
/// are ignored; the image border is not a neighbour.
bool is_surrounded_by(const RegionGraph& graph, int unit, std::span<const ClassId> allowed,
                      const Snapshot& snapshot);

/// Class with the largest total pixel area among Classified neighbours;
/// ties go to the lowest class id. Empty when no neighbour is Classified.
std::optional<ClassId> max_class(const RegionGraph& graph, int unit, const Snapshot& snapshot);

/// True when some Classified neighbour has a class in `classes`.
bool has_classified_neighbor_in(const RegionGraph& graph, int unit,
                                std::span<const ClassId> classes, const Snapshot& snapshot);

}  // namespace cbf
