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

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cbf {

using ClassId = std::int32_t;

enum class ElevationBand : std::int8_t { Low = 0, Medium = 1, High = 2 };

const char* to_string(ElevationBand band);
ElevationBand parse_elevation_band(std::string_view text);

struct ClassInfo {
  ClassId id = 0;
  std::string name;
  ElevationBand band = ElevationBand::Low;

  bool operator==(const ClassInfo&) const = default;
};

/// Ordered set of land-cover classes. Ids are dense and 0-based; lookups by
/// name are case-insensitive.
class Taxonomy {
 public:
  Taxonomy() = default;
  explicit Taxonomy(std::vector<ClassInfo> classes);

  /// The eight merged UCM classes: Vegetation, Ground, Pavement, Building,
  /// Water, Airplane, Car, Ship.
  static Taxonomy ucm8();

  std::size_t size() const { return classes_.size(); }
  bool empty() const { return classes_.empty(); }
  const ClassInfo& operator[](ClassId id) const;
  const std::vector<ClassInfo>& classes() const { return classes_; }

  std::optional<ClassId> find(std::string_view name) const;
  /// Throws ErrorKind::UnknownClass when the name is absent.
  ClassId id_of(std::string_view name) const;

  bool operator==(const Taxonomy&) const = default;

 private:
  std::vector<ClassInfo> classes_;
};

using TaxonomyPtr = std::shared_ptr<const Taxonomy>;

/// Interleaved (row-major, channel-fastest) image with every sample in [0,1].
class RasterImage {
 public:
  RasterImage() = default;
  RasterImage(int width, int height, int channels, std::vector<float> data);
  RasterImage(int width, int height, int channels);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  std::size_t pixel_count() const { return std::size_t(width_) * std::size_t(height_); }

  float at(int x, int y, int c) const {
    return data_[(std::size_t(y) * width_ + x) * channels_ + c];
  }
  float& at(int x, int y, int c) {
    return data_[(std::size_t(y) * width_ + x) * channels_ + c];
  }
  const std::vector<float>& data() const { return data_; }

  /// Channel c as a contiguous plane of width*height samples.
  std::vector<float> plane(int c) const;

  bool operator==(const RasterImage&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

class LabelMap {
 public:
  LabelMap() = default;
  LabelMap(int width, int height, std::vector<ClassId> labels, TaxonomyPtr taxonomy);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const { return labels_.size(); }
  std::size_t class_count() const { return taxonomy_ ? taxonomy_->size() : 0; }
  const TaxonomyPtr& taxonomy() const { return taxonomy_; }

  ClassId operator[](std::size_t i) const { return labels_[i]; }
  ClassId at(int x, int y) const { return labels_[std::size_t(y) * width_ + x]; }
  const std::vector<ClassId>& labels() const { return labels_; }

  /// Same geometry and taxonomy, different labels. Validates the labels.
  LabelMap with_labels(std::vector<ClassId> labels) const;

  bool operator==(const LabelMap& o) const {
    return width_ == o.width_ && height_ == o.height_ && labels_ == o.labels_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<ClassId> labels_;
  TaxonomyPtr taxonomy_;
};

/// Per-pixel class probability vectors, interleaved. Each row sums to 1.
class ProbMap {
 public:
  static constexpr double kSumTolerance = 1e-5;

  ProbMap() = default;
  /// Validates range and normalization; throws ErrorKind::Format otherwise.
  ProbMap(int width, int height, int classes, std::vector<float> probs);

  int width() const { return width_; }
  int height() const { return height_; }
  int classes() const { return classes_; }
  std::size_t pixel_count() const { return std::size_t(width_) * std::size_t(height_); }

  const float* row(std::size_t pixel) const { return probs_.data() + pixel * classes_; }
  const std::vector<float>& probs() const { return probs_; }

 private:
  int width_ = 0;
  int height_ = 0;
  int classes_ = 0;
  std::vector<float> probs_;
};

/// Shadow in {-1, 0, +1} (not shadow, uncertain, shadow) and relative
/// elevation in {0, 1, 2} (low, medium, high).
struct ExtraChannels {
  int width = 0;
  int height = 0;
  std::vector<std::int8_t> shadow;
  std::vector<std::int8_t> elevation;

  std::size_t pixel_count() const { return shadow.size(); }
  /// Throws ErrorKind::Format when a value leaves its domain.
  void validate() const;

  bool operator==(const ExtraChannels&) const = default;
};

ExtraChannels zero_extra_channels(int width, int height);

struct Prediction {
  LabelMap labels;
  std::vector<float> confidence;
};

/// Per-pixel argmax; ties resolve to the lowest class id.
Prediction argmax_labels(const ProbMap& probs, TaxonomyPtr taxonomy);

ProbMap one_hot(const LabelMap& labels);

}  // namespace cbf
