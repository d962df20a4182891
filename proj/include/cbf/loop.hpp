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
#include <functional>
#include <string>
#include <vector>

#include "cbf/classifier.hpp"
#include "cbf/core.hpp"
#include "cbf/ontology.hpp"
#include "cbf/superpixel.hpp"

namespace cbf {

struct PipelineConfig {
  int k_target = 1000;
  double compactness = 10.0;
  int slic_iterations = 10;
  double f_t = 0.7;
  int max_iterations = 5;
  /// Stop once validation stage-2 OA gains less than this over the best
  /// earlier iteration.
  double convergence_epsilon = 0.002;
  int window_radius = 0;
  std::size_t hidden = 0;
  TrainingConfig training;
  std::uint64_t seed = 0;
  /// Worker threads for per-image stages; results do not depend on it.
  int jobs = 1;

  void validate() const;
};

struct LabeledImage {
  std::string name;
  RasterImage image;
  LabelMap truth;
};

struct IterationRecord {
  int iteration = 0;
  double stage1_oa = 0.0;
  double stage1_miou = 0.0;
  double stage2_oa = 0.0;
  double stage2_miou = 0.0;
  std::size_t corrections = 0;
  double train_loss = 0.0;
  double wall_seconds = 0.0;
};

/// Output of one predict, segment, correct and infer pass over an image.
struct ReasonResult {
  Prediction stage1;
  std::vector<InferenceUnit> units;
  IntraResult intra;
  ExtraChannels extra;
};

/// Runs argmax, SLIC on `segment_on`, unit aggregation, the region graph,
/// intra correction and extra inference.
ReasonResult reason(const ProbMap& probs, const RasterImage& segment_on, TaxonomyPtr taxonomy,
                    const PipelineConfig& cfg, const RuleBase& intra, const RuleBase& extra);

struct Pipeline {
  TaxonomyPtr taxonomy;
  RuleBase intra;
  RuleBase extra;
  PipelineConfig config;
  /// Classifier of every iteration up to and including the best one. The
  /// extra channels fed to iteration i+1 come from iteration i.
  std::vector<ClassifierParams> chain;

  bool trained() const { return !chain.empty(); }
  int best_iteration() const { return int(chain.size()); }
};

struct ImageOutcome {
  std::string name;
  ReasonResult result;
};

/// Passed to the observer after every iteration.
struct IterationReport {
  const IterationRecord& record;
  const ClassifierParams& params;
  /// Validation images in input order.
  const std::vector<ImageOutcome>& validation;
};

using IterationObserver = std::function<void(const IterationReport&)>;

struct TrainOutput {
  Pipeline pipeline;
  std::vector<IterationRecord> history;
};

/// The closed loop: train on (image, extra channels), predict, correct and
/// infer new extra channels for every image, repeat. Keeps the iteration
/// with the best validation stage-2 OA (earliest on ties).
TrainOutput cbf_train(const std::vector<LabeledImage>& train_set,
                      const std::vector<LabeledImage>& val_set, const PipelineConfig& cfg,
                      const RuleBase& intra, const RuleBase& extra,
                      const IterationObserver& observer = {});

struct InferResult {
  LabelMap stage1;
  LabelMap stage2;
  CorrectionLog log;
};

/// Replays the chain from zero extra channels: each earlier classifier
/// predicts and reasons to produce the channels for the next one, and the
/// final classifier gives stage 1, corrected into stage 2.
InferResult cbf_infer(const Pipeline& pipeline, const RasterImage& image);

/// Calls fn(i) for i in [0, n) on up to `jobs` threads. The exception of
/// the lowest failing index is rethrown.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace cbf
