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

#include "cbf/eval.hpp"

#include <cstdio>
#include <string>

#include "cbf/error.hpp"

namespace cbf {

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t t = 0;
  for (std::size_t i = 0; i < n; ++i) t += counts[i * n + i];
  return t;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.n != n) throw Error(ErrorKind::Dimension, "confusion matrices differ in class count");
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
  return *this;
}

ConfusionMatrix confusion(const LabelMap& pred, const LabelMap& truth) {
  if (pred.width() != truth.width() || pred.height() != truth.height())
    throw Error(ErrorKind::Dimension, "prediction and truth differ in size");
  if (pred.class_count() != truth.class_count() ||
      (pred.taxonomy() && truth.taxonomy() && *pred.taxonomy() != *truth.taxonomy()))
    throw Error(ErrorKind::Taxonomy, "prediction and truth use different taxonomies");
  ConfusionMatrix cm(truth.class_count());
  for (std::size_t p = 0; p < truth.pixel_count(); ++p)
    ++cm.counts[std::size_t(truth[p]) * cm.n + std::size_t(pred[p])];
  return cm;
}

double overall_accuracy(const ConfusionMatrix& cm) {
  const auto total = cm.total();
  if (total == 0) throw Error(ErrorKind::Empty, "overall accuracy of an empty confusion matrix");
  return double(cm.trace()) / double(total);
}

IouResult mean_iou(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw Error(ErrorKind::Empty, "mIoU of an empty confusion matrix");
  IouResult out;
  out.per_class.resize(cm.n);
  double sum = 0.0;
  std::size_t defined = 0;
  for (std::size_t c = 0; c < cm.n; ++c) {
    std::uint64_t row = 0, col = 0;
    for (std::size_t k = 0; k < cm.n; ++k) {
      row += cm.at(c, k);
      col += cm.at(k, c);
    }
    const std::uint64_t tp = cm.at(c, c);
    const std::uint64_t denom = row + col - tp;
    if (denom == 0) continue;
    const double iou = double(tp) / double(denom);
    out.per_class[c] = iou;
    sum += iou;
    ++defined;
  }
  out.miou = defined ? sum / double(defined) : 0.0;
  return out;
}

Metrics metrics_of(const ConfusionMatrix& cm) {
  auto iou = mean_iou(cm);
  return {overall_accuracy(cm), iou.miou, std::move(iou.per_class)};
}

std::string metrics_csv_header(const Taxonomy& taxonomy) {
  std::string s = "iteration,stage,oa,miou";
  for (const auto& c : taxonomy.classes()) s += ",iou_" + c.name;
  return s;
}

std::string metrics_csv_row(int iteration, const std::string& stage, const Metrics& m) {
  char buf[64];
  std::string s = std::to_string(iteration) + "," + stage;
  std::snprintf(buf, sizeof buf, ",%.6f,%.6f", m.oa, m.miou);
  s += buf;
  for (const auto& v : m.per_class_iou) {
    if (v) {
      std::snprintf(buf, sizeof buf, ",%.6f", *v);
      s += buf;
    } else {
      s += ",";
    }
  }
  return s;
}

}  // namespace cbf
