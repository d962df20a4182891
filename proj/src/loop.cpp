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

#include "cbf/loop.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <thread>

#include "cbf/error.hpp"
#include "cbf/eval.hpp"
#include "cbf/spatial.hpp"

namespace cbf {

void PipelineConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorKind::Parameter, m); };
  if (k_target < 1) fail("k_target must be at least 1");
  if (!(compactness > 0.0)) fail("compactness must be positive");
  if (slic_iterations < 1) fail("slic_iterations must be at least 1");
  if (!(f_t > 0.0 && f_t < 1.0)) fail("f_t must lie in (0,1)");
  if (max_iterations < 1) fail("max_iterations must be at least 1");
  if (window_radius < 0) fail("window_radius must be non-negative");
  if (jobs < 1) fail("jobs must be at least 1");
  training.validate();
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(std::size_t(std::max(jobs, 1)), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t failed_at = n;
  std::exception_ptr failure;
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

ReasonResult reason(const ProbMap& probs, const RasterImage& segment_on, TaxonomyPtr taxonomy,
                    const PipelineConfig& cfg, const RuleBase& intra, const RuleBase& extra) {
  ReasonResult r;
  r.stage1 = argmax_labels(probs, std::move(taxonomy));
  const auto sp = slic_segment(segment_on, SlicParams{cfg.k_target, cfg.compactness,
                                                      cfg.slic_iterations, cfg.seed});
  r.units = aggregate_units(sp, r.stage1.labels, r.stage1.confidence, cfg.f_t);
  const auto graph = build_graph(r.units, probs.width(), probs.height());
  r.intra = apply_intra(r.stage1.labels, r.units, graph, intra);
  r.extra = apply_extra(r.units, graph, extra, r.intra.corrected);
  return r;
}

namespace {

void check_dataset(const std::vector<LabeledImage>& set, const char* what, const Taxonomy& taxonomy,
                   int channels) {
  if (set.empty()) throw Error(ErrorKind::Empty, std::string(what) + " set is empty");
  for (const auto& s : set) {
    if (!s.truth.taxonomy() || *s.truth.taxonomy() != taxonomy)
      throw Error(ErrorKind::Taxonomy, "image '" + s.name + "' uses a different taxonomy");
    if (s.image.width() != s.truth.width() || s.image.height() != s.truth.height())
      throw Error(ErrorKind::Dimension, "image '" + s.name + "' and its labels differ in size");
    if (s.image.channels() != channels)
      throw Error(ErrorKind::Dimension, "image '" + s.name + "' has a different channel count");
  }
}

}  // namespace

TrainOutput cbf_train(const std::vector<LabeledImage>& train_set,
                      const std::vector<LabeledImage>& val_set, const PipelineConfig& cfg,
                      const RuleBase& intra, const RuleBase& extra,
                      const IterationObserver& observer) {
  cfg.validate();
  if (train_set.empty()) throw Error(ErrorKind::Empty, "training set is empty");
  const TaxonomyPtr taxonomy = train_set.front().truth.taxonomy();
  if (!taxonomy) throw Error(ErrorKind::Taxonomy, "training labels carry no taxonomy");
  const int channels = train_set.front().image.channels();
  check_dataset(train_set, "training", *taxonomy, channels);
  check_dataset(val_set, "validation", *taxonomy, channels);

  const std::size_t n_train = train_set.size(), n_val = val_set.size();
  auto zeros = [](const std::vector<LabeledImage>& set) {
    std::vector<ExtraChannels> e;
    for (const auto& s : set) e.push_back(zero_extra_channels(s.image.width(), s.image.height()));
    return e;
  };
  std::vector<ExtraChannels> e_train = zeros(train_set), e_val = zeros(val_set);

  TrainOutput out;
  out.pipeline.taxonomy = taxonomy;
  out.pipeline.intra = intra;
  out.pipeline.extra = extra;
  out.pipeline.config = cfg;
  std::vector<ClassifierParams> chain;
  int best = 0;
  double best_oa = -1.0;

  for (int it = 1; it <= cfg.max_iterations; ++it) {
    const auto t0 = std::chrono::steady_clock::now();

    std::vector<FeatureMatrix> feats(n_train);
    parallel_for(n_train, cfg.jobs, [&](std::size_t i) {
      feats[i] = extract_features(train_set[i].image, e_train[i], cfg.window_radius);
    });
    TrainingSet set;
    for (std::size_t i = 0; i < n_train; ++i) append_samples(set, feats[i], train_set[i].truth);
    feats.clear();

    auto init = ClassifierParams::random(feature_dim(channels), taxonomy->size(), cfg.hidden,
                                         cfg.training.seed);
    auto trained = train(std::move(init), set, cfg.training);
    const ClassifierParams& params = trained.params;

    std::vector<ImageOutcome> val_out(n_val);
    parallel_for(n_val, cfg.jobs, [&](std::size_t i) {
      const auto& s = val_set[i];
      const auto probs = predict(params, s.image, e_val[i], cfg.window_radius);
      val_out[i] = {s.name, reason(probs, s.image, taxonomy, cfg, intra, extra)};
    });

    const bool last = it == cfg.max_iterations;
    std::vector<ExtraChannels> next_train(last ? 0 : n_train);
    if (!last) {
      parallel_for(n_train, cfg.jobs, [&](std::size_t i) {
        const auto& s = train_set[i];
        const auto probs = predict(params, s.image, e_train[i], cfg.window_radius);
        next_train[i] = reason(probs, s.image, taxonomy, cfg, intra, extra).extra;
      });
    }

    ConfusionMatrix cm1(taxonomy->size()), cm2(taxonomy->size());
    IterationRecord rec;
    rec.iteration = it;
    for (std::size_t i = 0; i < n_val; ++i) {
      cm1 += confusion(val_out[i].result.stage1.labels, val_set[i].truth);
      cm2 += confusion(val_out[i].result.intra.labels, val_set[i].truth);
      rec.corrections += val_out[i].result.intra.log.size();
    }
    const auto m1 = metrics_of(cm1), m2 = metrics_of(cm2);
    rec.stage1_oa = m1.oa;
    rec.stage1_miou = m1.miou;
    rec.stage2_oa = m2.oa;
    rec.stage2_miou = m2.miou;
    rec.train_loss = trained.loss_history.empty() ? 0.0 : trained.loss_history.back();
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.history.push_back(rec);
    chain.push_back(params);

    if (observer) observer(IterationReport{out.history.back(), chain.back(), val_out});

    const double prev_best = best_oa;
    if (rec.stage2_oa > best_oa) {
      best_oa = rec.stage2_oa;
      best = it;
    }
    if (last) break;
    if (it > 1 && rec.stage2_oa - prev_best < cfg.convergence_epsilon) break;

    e_train = std::move(next_train);
    for (std::size_t i = 0; i < n_val; ++i) e_val[i] = std::move(val_out[i].result.extra);
  }

  chain.resize(std::size_t(best));
  out.pipeline.chain = std::move(chain);
  return out;
}

InferResult cbf_infer(const Pipeline& pipeline, const RasterImage& image) {
  if (!pipeline.trained()) throw Error(ErrorKind::State, "pipeline has not been trained");
  const auto& cfg = pipeline.config;
  ExtraChannels e = zero_extra_channels(image.width(), image.height());
  for (std::size_t i = 0;; ++i) {
    const auto probs = predict(pipeline.chain[i], image, e, cfg.window_radius);
    auto r = reason(probs, image, pipeline.taxonomy, cfg, pipeline.intra, pipeline.extra);
    if (i + 1 == pipeline.chain.size())
      return {std::move(r.stage1.labels), std::move(r.intra.labels), std::move(r.intra.log)};
    e = std::move(r.extra);
  }
}

}  // namespace cbf
