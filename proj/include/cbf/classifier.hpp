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
#include <string>
#include <vector>

#include "cbf/core.hpp"

namespace cbf {

/// Row-major per-pixel feature vectors.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::vector<double> data;

  const double* row(std::size_t r) const { return data.data() + r * dim; }
};

/// Feature layout for an image with C channels:
///   [0, C)        raw channels
///   C             shadow rescaled to [0,1] as (s+1)/2
///   C+1           elevation rescaled to [0,1] as e/2
///   [C+2, 2C+2)   window mean per channel
///   [2C+2, 3C+2)  window standard deviation per channel
/// over the (2r+1)^2 window with edge clamping.
inline std::size_t feature_dim(int channels) { return std::size_t(channels) * 3 + 2; }

FeatureMatrix extract_features(const RasterImage& image, const ExtraChannels& extra, int radius);

/// Softmax classifier over pixel features, optionally with one tanh hidden
/// layer. All parameters live in one flat vector:
///   linear:  W (dim x n), b (n)
///   hidden:  W1 (dim x h), b1 (h), W2 (h x n), b2 (n)
class ClassifierParams {
 public:
  ClassifierParams() = default;
  ClassifierParams(std::size_t feature_dim, std::size_t n_classes, std::size_t hidden = 0);

  /// Small random weights (scaled by fan-in), zero biases.
  static ClassifierParams random(std::size_t feature_dim, std::size_t n_classes, std::size_t hidden,
                                 std::uint64_t seed);

  std::size_t feature_dim() const { return feature_dim_; }
  std::size_t n_classes() const { return n_classes_; }
  std::size_t hidden() const { return hidden_; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  std::span<const double> w1() const;
  std::span<const double> b1() const;
  std::span<const double> w2() const;  // empty without a hidden layer
  std::span<const double> b2() const;

  bool all_finite() const;
  bool operator==(const ClassifierParams&) const = default;

 private:
  std::size_t feature_dim_ = 0;
  std::size_t n_classes_ = 0;
  std::size_t hidden_ = 0;
  std::vector<double> values_;
};

struct TrainingConfig {
  double learning_rate = 1e-4;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int epochs = 10;
  std::size_t batch = 256;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainingSet {
  FeatureMatrix features;
  std::vector<ClassId> labels;
};

/// Stacks per-image features and label maps into one training set.
void append_samples(TrainingSet& set, const FeatureMatrix& features, const LabelMap& labels);

/// Cross-entropy J = -sum_pixels log p_label and its gradient with respect
/// to every parameter (same layout as ClassifierParams::values()).
double loss_and_gradient(const ClassifierParams& params, const FeatureMatrix& features,
                         std::span<const ClassId> labels, std::vector<double>* gradient);

/// Class probabilities for each feature row, row-major rows x n_classes.
std::vector<double> forward(const ClassifierParams& params, const FeatureMatrix& features);

struct TrainResult {
  ClassifierParams params;
  /// Mean per-pixel cross-entropy over the whole set after each epoch.
  std::vector<double> loss_history;
};

/// Minibatch Adam over shuffled pixels. Throws ErrorKind::Divergence when
/// the loss or a parameter stops being finite.
TrainResult train(ClassifierParams params, const TrainingSet& set, const TrainingConfig& cfg);

ProbMap predict(const ClassifierParams& params, const RasterImage& image, const ExtraChannels& extra,
                int radius);

}  // namespace cbf
