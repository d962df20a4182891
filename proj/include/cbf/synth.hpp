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

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cbf/core.hpp"

namespace cbf {

enum class ShapeKind { Rectangle, Ellipse, Road };

const char* to_string(ShapeKind kind);

/// A family of shapes drawn in inventory order. Roads span the whole frame;
/// `size` is the road width, the side length of a rectangle or the diameter
/// of an ellipse (drawn per axis).
struct ShapeSpec {
  ShapeKind kind = ShapeKind::Rectangle;
  ClassId cls = 0;
  int count_min = 1;
  int count_max = 1;
  int size_min = 1;
  int size_max = 1;
  /// When set, every covered pixel must currently carry this class.
  std::optional<ClassId> on;
  bool casts_shadow = false;
  /// Render as a mix of this class's color and `look`'s color with weight
  /// `blend` on `look`; the label stays `cls`.
  std::optional<ClassId> look;
  float blend = 0.0f;
};

/// Shadows are the shape translated by k*(dx, dy), k = 1..width, minus the
/// shape itself. Shadowed pixels keep their label and are darkened.
struct ShadowSpec {
  int dx = 1;
  int dy = 1;
  int width = 3;
  float factor = 0.45f;
};

struct SceneSpec {
  int width = 96;
  int height = 96;
  TaxonomyPtr taxonomy;
  ClassId background = 0;
  std::vector<ShapeSpec> shapes;
  /// Mean RGB per class id.
  std::vector<std::array<float, 3>> colors;
  float noise_sigma = 0.05f;
  ShadowSpec shadow;
  int max_retries = 200;
  std::uint64_t seed = 0;

  /// Throws ErrorKind::Parameter, including when two class means are closer
  /// than three noise sigmas.
  void validate() const;
};

struct Scene {
  RasterImage image;
  LabelMap truth;
  /// 1 where a shadow was rendered.
  std::vector<std::uint8_t> shadow_mask;
};

/// Throws ErrorKind::Parameter when a shape cannot be placed within
/// `max_retries` attempts.
Scene generate_scene(const SceneSpec& spec);

std::string serialize_scene_spec(const SceneSpec& spec);
SceneSpec parse_scene_spec(std::string_view text, TaxonomyPtr taxonomy);

/// Vegetation background with ground lots, roads carrying cars, ponds with
/// ships and shadow-casting buildings, on the UCM taxonomy.
SceneSpec default_scene_spec(std::uint64_t seed, int size = 96);

struct CorruptionPair {
  ClassId truth = 0;
  ClassId wrong = 0;
};

struct CorruptionModel {
  /// Fraction of eligible regions that receive a hole.
  double hole_rate = 0.6;
  std::vector<CorruptionPair> pairs;
  float corrupted_confidence = 0.45f;
  float clean_confidence = 0.9f;
  /// Square hole sides are drawn from [patch_min, patch_max]; holes keep
  /// `margin` pixels of the host region on every side.
  int patch_min = 3;
  int patch_max = 6;
  int margin = 2;
  int max_holes = 12;
  /// Mislabel entire enclosed regions (not touching the frame) instead of
  /// interior patches.
  bool whole_regions = false;
  std::uint64_t seed = 0;

  void validate(double f_t = 0.7) const;

  /// One pair per correction rule, each hole fixable by exactly that rule.
  static CorruptionModel defaults(const Taxonomy& taxonomy, std::uint64_t seed = 0);
};

struct Hole {
  ClassId truth = 0;
  ClassId wrong = 0;
  std::vector<std::uint32_t> pixels;
};

struct Corruption {
  ProbMap probs;
  std::vector<Hole> holes;
  /// 1 on every corrupted pixel.
  std::vector<std::uint8_t> mask;
};

Corruption corrupt(const LabelMap& truth, const CorruptionModel& model);

inline ProbMap corrupt_probmap(const LabelMap& truth, const CorruptionModel& model) {
  return corrupt(truth, model).probs;
}

enum class Split { Train, Val, Test };

const char* to_string(Split split);
Split parse_split(std::string_view text);

struct BenchmarkScene {
  std::string name;
  Split split = Split::Train;
  std::uint64_t seed = 0;
  Scene scene;
};

/// n scenes with a seeded 60/20/20 train/val/test split.
std::vector<BenchmarkScene> default_benchmark(int n, std::uint64_t seed, int size = 96);

}  // namespace cbf
