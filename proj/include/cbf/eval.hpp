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
#include <string>
#include <vector>

#include "cbf/core.hpp"

namespace cbf {

/// counts[t * n + p] = pixels with truth t predicted as p.
struct ConfusionMatrix {
  std::size_t n = 0;
  std::vector<std::uint64_t> counts;

  explicit ConfusionMatrix(std::size_t classes = 0) : n(classes), counts(classes * classes, 0) {}

  std::uint64_t at(std::size_t truth, std::size_t pred) const { return counts[truth * n + pred]; }
  std::uint64_t total() const;
  std::uint64_t trace() const;
  /// Element-wise sum; matrices must share n.
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
};

ConfusionMatrix confusion(const LabelMap& pred, const LabelMap& truth);

double overall_accuracy(const ConfusionMatrix& cm);

struct IouResult {
  double miou = 0.0;
  /// Empty for classes absent from both truth and prediction.
  std::vector<std::optional<double>> per_class;
};

/// Jaccard index per class, TP / (TP + FP + FN); the mean skips classes
/// with a zero denominator.
IouResult mean_iou(const ConfusionMatrix& cm);

struct Metrics {
  double oa = 0.0;
  double miou = 0.0;
  std::vector<std::optional<double>> per_class_iou;
};

Metrics metrics_of(const ConfusionMatrix& cm);

/// Header "iteration,stage,oa,miou,iou_<class>..." for the taxonomy.
std::string metrics_csv_header(const Taxonomy& taxonomy);
/// One CSV row; undefined IoUs are written as empty fields.
std::string metrics_csv_row(int iteration, const std::string& stage, const Metrics& m);

}  // namespace cbf
