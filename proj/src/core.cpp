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

#include "cbf/core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "cbf/error.hpp"

namespace cbf {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Dimension: return "dimension error";
    case ErrorKind::Parameter: return "parameter error";
    case ErrorKind::EmptyUnit: return "empty-unit error";
    case ErrorKind::Partition: return "partition error";
    case ErrorKind::InvalidId: return "id error";
    case ErrorKind::Taxonomy: return "taxonomy error";
    case ErrorKind::Syntax: return "syntax error";
    case ErrorKind::UnknownClass: return "unknown-class error";
    case ErrorKind::DuplicateRule: return "duplicate-rule error";
    case ErrorKind::RuleKind: return "rule error";
    case ErrorKind::State: return "state error";
    case ErrorKind::Divergence: return "divergence error";
    case ErrorKind::Format: return "format error";
    case ErrorKind::Empty: return "empty error";
    case ErrorKind::Io: return "io error";
  }
  return "error";
}

const char* to_string(ElevationBand band) {
  switch (band) {
    case ElevationBand::Low: return "low";
    case ElevationBand::Medium: return "medium";
    case ElevationBand::High: return "high";
  }
  return "low";
}

namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

void check_dims(int width, int height) {
  if (width <= 0 || height <= 0)
    throw Error(ErrorKind::Dimension, "image dimensions must be positive, got " +
                                          std::to_string(width) + "x" + std::to_string(height));
}

}  // namespace

ElevationBand parse_elevation_band(std::string_view text) {
  if (iequals(text, "low") || text == "0") return ElevationBand::Low;
  if (iequals(text, "medium") || text == "1") return ElevationBand::Medium;
  if (iequals(text, "high") || text == "2") return ElevationBand::High;
  throw Error(ErrorKind::Taxonomy, "unknown elevation band '" + std::string(text) + "'");
}

Taxonomy::Taxonomy(std::vector<ClassInfo> classes) : classes_(std::move(classes)) {
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    if (classes_[i].id != ClassId(i))
      throw Error(ErrorKind::Taxonomy, "class ids must be dense and 0-based; '" +
                                           classes_[i].name + "' has id " +
                                           std::to_string(classes_[i].id));
    if (classes_[i].name.empty())
      throw Error(ErrorKind::Taxonomy, "class " + std::to_string(i) + " has no name");
    for (std::size_t j = 0; j < i; ++j)
      if (iequals(classes_[i].name, classes_[j].name))
        throw Error(ErrorKind::Taxonomy, "duplicate class name '" + classes_[i].name + "'");
  }
}

Taxonomy Taxonomy::ucm8() {
  using B = ElevationBand;
  return Taxonomy({{0, "Vegetation", B::Low},
                   {1, "Ground", B::Low},
                   {2, "Pavement", B::Low},
                   {3, "Building", B::High},
                   {4, "Water", B::Low},
                   {5, "Airplane", B::Medium},
                   {6, "Car", B::Medium},
                   {7, "Ship", B::Medium}});
}

const ClassInfo& Taxonomy::operator[](ClassId id) const {
  if (id < 0 || std::size_t(id) >= classes_.size())
    throw Error(ErrorKind::InvalidId, "class id " + std::to_string(id) + " out of range");
  return classes_[std::size_t(id)];
}

std::optional<ClassId> Taxonomy::find(std::string_view name) const {
  for (const auto& c : classes_)
    if (iequals(c.name, name)) return c.id;
  return std::nullopt;
}

ClassId Taxonomy::id_of(std::string_view name) const {
  if (auto id = find(name)) return *id;
  throw Error(ErrorKind::UnknownClass, "unknown class '" + std::string(name) + "'");
}

RasterImage::RasterImage(int width, int height, int channels, std::vector<float> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  check_dims(width, height);
  if (channels < 1) throw Error(ErrorKind::Dimension, "image needs at least one channel");
  if (data_.size() != pixel_count() * std::size_t(channels))
    throw Error(ErrorKind::Dimension, "image data length does not match width*height*channels");
  for (float v : data_)
    if (!(v >= 0.0f && v <= 1.0f))
      throw Error(ErrorKind::Format, "image sample outside [0,1]");
}

RasterImage::RasterImage(int width, int height, int channels)
    : RasterImage(width, height, channels,
                  std::vector<float>(std::size_t(std::max(width, 0)) * std::size_t(std::max(height, 0)) *
                                     std::size_t(std::max(channels, 0)), 0.0f)) {}

std::vector<float> RasterImage::plane(int c) const {
  std::vector<float> out(pixel_count());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = data_[i * channels_ + c];
  return out;
}

LabelMap::LabelMap(int width, int height, std::vector<ClassId> labels, TaxonomyPtr taxonomy)
    : width_(width), height_(height), labels_(std::move(labels)), taxonomy_(std::move(taxonomy)) {
  check_dims(width, height);
  if (!taxonomy_ || taxonomy_->empty())
    throw Error(ErrorKind::Taxonomy, "label map needs a non-empty taxonomy");
  if (labels_.size() != std::size_t(width) * std::size_t(height))
    throw Error(ErrorKind::Dimension, "label count does not match width*height");
  const auto n = ClassId(taxonomy_->size());
  for (ClassId l : labels_)
    if (l < 0 || l >= n)
      throw Error(ErrorKind::InvalidId, "label " + std::to_string(l) + " outside taxonomy");
}

LabelMap LabelMap::with_labels(std::vector<ClassId> labels) const {
  return LabelMap(width_, height_, std::move(labels), taxonomy_);
}

ProbMap::ProbMap(int width, int height, int classes, std::vector<float> probs)
    : width_(width), height_(height), classes_(classes), probs_(std::move(probs)) {
  check_dims(width, height);
  if (classes < 1) throw Error(ErrorKind::Dimension, "probability map needs at least one class");
  if (probs_.size() != pixel_count() * std::size_t(classes))
    throw Error(ErrorKind::Dimension, "probability data length does not match dimensions");
  for (std::size_t p = 0; p < pixel_count(); ++p) {
    double sum = 0.0;
    for (int c = 0; c < classes; ++c) {
      float v = probs_[p * classes + c];
      if (!(v >= 0.0f && v <= 1.0f))
        throw Error(ErrorKind::Format, "probability outside [0,1] at pixel " + std::to_string(p));
      sum += v;
    }
    if (std::fabs(sum - 1.0) > kSumTolerance)
      throw Error(ErrorKind::Format, "probabilities at pixel " + std::to_string(p) +
                                         " sum to " + std::to_string(sum));
  }
}

void ExtraChannels::validate() const {
  check_dims(width, height);
  const std::size_t n = std::size_t(width) * std::size_t(height);
  if (shadow.size() != n || elevation.size() != n)
    throw Error(ErrorKind::Dimension, "extra channel length does not match width*height");
  for (auto s : shadow)
    if (s < -1 || s > 1) throw Error(ErrorKind::Format, "shadow value outside {-1,0,1}");
  for (auto e : elevation)
    if (e < 0 || e > 2) throw Error(ErrorKind::Format, "elevation value outside {0,1,2}");
}

ExtraChannels zero_extra_channels(int width, int height) {
  check_dims(width, height);
  const std::size_t n = std::size_t(width) * std::size_t(height);
  return ExtraChannels{width, height, std::vector<std::int8_t>(n, 0), std::vector<std::int8_t>(n, 0)};
}

Prediction argmax_labels(const ProbMap& probs, TaxonomyPtr taxonomy) {
  if (!taxonomy || int(taxonomy->size()) != probs.classes())
    throw Error(ErrorKind::Taxonomy, "taxonomy size does not match probability map classes");
  const std::size_t n = probs.pixel_count();
  std::vector<ClassId> labels(n);
  std::vector<float> conf(n);
  for (std::size_t p = 0; p < n; ++p) {
    const float* r = probs.row(p);
    int best = 0;
    for (int c = 1; c < probs.classes(); ++c)
      if (r[c] > r[best]) best = c;
    labels[p] = best;
    conf[p] = r[best];
  }
  return {LabelMap(probs.width(), probs.height(), std::move(labels), std::move(taxonomy)),
          std::move(conf)};
}

ProbMap one_hot(const LabelMap& labels) {
  const int n = int(labels.class_count());
  std::vector<float> probs(labels.pixel_count() * std::size_t(n), 0.0f);
  for (std::size_t p = 0; p < labels.pixel_count(); ++p) probs[p * n + labels[p]] = 1.0f;
  return ProbMap(labels.width(), labels.height(), n, std::move(probs));
}

}  // namespace cbf
