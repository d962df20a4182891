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
#include <span>
#include <vector>

#include "cbf/core.hpp"

namespace cbf {

/// Total partition of an image into 4-connected superpixels with dense ids.
struct SuperpixelMap {
  int width = 0;
  int height = 0;
  std::vector<std::int32_t> assignment;
  int k_actual = 0;

  bool operator==(const SuperpixelMap&) const = default;
};

struct SlicParams {
  int k_target = 1000;
  /// Weight of spatial proximity against color similarity. Channels are
  /// compared on a 0..100 scale so the conventional value of 10 applies.
  double compactness = 10.0;
  int max_iters = 10;
  std::uint64_t seed = 0;
};

/// Simple linear iterative clustering. Seeds start on a (seed-jittered)
/// regular grid, move to the lowest-gradient pixel of their 3x3
/// neighbourhood, and alternate local assignment with centroid updates.
/// Afterwards every cluster keeps its largest component; other fragments
/// smaller than N/(4K) join their largest kept neighbour, and groups are
/// merged smallest-first while more than 1.5K remain.
SuperpixelMap slic_segment(const RasterImage& image, const SlicParams& params);

inline SuperpixelMap slic_segment(const RasterImage& image, int k_target, double compactness,
                                  int max_iters, std::uint64_t seed) {
  return slic_segment(image, SlicParams{k_target, compactness, max_iters, seed});
}

/// Validates assignment length, dense ids and total coverage.
void validate(const SuperpixelMap& map);

/// Pixels of each superpixel, ascending pixel index.
std::vector<std::vector<std::uint32_t>> superpixel_pixels(const SuperpixelMap& map);

enum class UnitStatus : std::uint8_t { Classified, MisClassified };

const char* to_string(UnitStatus status);

/// A maximal 4-connected group of same-class superpixels, the atom of
/// reasoning.
struct InferenceUnit {
  int id = 0;
  std::vector<std::uint32_t> pixels;  // ascending pixel indices
  ClassId unit_class = 0;
  double confidence = 0.0;
  UnitStatus status = UnitStatus::Classified;

  bool operator==(const InferenceUnit&) const = default;
};

/// Most frequent label among the pixels; ties resolve to the lowest id.
ClassId majority_label(std::span<const std::uint32_t> pixels, const LabelMap& labels);

/// Labels every superpixel by majority vote, merges 4-adjacent superpixels
/// of equal class into units, and marks a unit MisClassified when the mean
/// pixel confidence is below f_t. Unit ids follow raster order of each
/// unit's first pixel.
std::vector<InferenceUnit> aggregate_units(const SuperpixelMap& spmap, const LabelMap& labels,
                                           std::span<const float> confidence, double f_t);

/// Confidences arrive as float32, so a mean that equals f_t up to float
/// rounding counts as reaching it.
inline constexpr double kConfidenceTolerance = 1e-6;

inline UnitStatus status_for(double confidence, double f_t) {
  return confidence < f_t - kConfidenceTolerance ? UnitStatus::MisClassified
                                                 : UnitStatus::Classified;
}

}  // namespace cbf
