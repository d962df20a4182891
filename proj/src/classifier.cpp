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

#include "cbf/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cbf/error.hpp"
#include "cbf/rng.hpp"
#include "cbf/simd/kernels.hpp"

namespace cbf {
namespace {

// Rows processed per forward chunk.
constexpr std::size_t kChunk = 1024;

void check_extra(const RasterImage& image, const ExtraChannels& extra) {
  if (extra.width != image.width() || extra.height != image.height() ||
      extra.shadow.size() != image.pixel_count() || extra.elevation.size() != image.pixel_count())
    throw Error(ErrorKind::Dimension, "extra channels do not match the image size");
}

// Stable softmax of one logit row in place; returns log p[label] when
// label >= 0.
double softmax_row(double* z, std::size_t n, ClassId label) {
  const double m = *std::max_element(z, z + n);
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) sum += std::exp(z[k] - m);
  const double log_sum = std::log(sum);
  const double log_p = label >= 0 ? z[std::size_t(label)] - m - log_sum : 0.0;
  for (std::size_t k = 0; k < n; ++k) z[k] = std::exp(z[k] - m - log_sum);
  return log_p;
}

struct Layout {
  std::size_t w1, b1, w2, b2, total, first_out;
};

Layout layout(std::size_t d, std::size_t n, std::size_t h) {
  Layout l{};
  l.first_out = h ? h : n;
  l.w1 = 0;
  l.b1 = d * l.first_out;
  l.w2 = l.b1 + l.first_out;
  l.b2 = l.w2 + (h ? h * n : 0);
  l.total = l.b2 + (h ? n : 0);
  return l;
}

// Logits (and hidden activations when present) for rows [r0, r0+rows).
void forward_chunk(const ClassifierParams& p, const FeatureMatrix& f, std::size_t r0, std::size_t rows,
                   std::vector<double>& hidden, std::vector<double>& logits) {
  const auto& kern = simd::kernels();
  const std::size_t d = p.feature_dim(), n = p.n_classes(), h = p.hidden();
  const double* x = f.data.data() + r0 * d;
  auto b1 = p.b1();
  auto w1 = p.w1();
  if (h == 0) {
    logits.resize(rows * n);
    for (std::size_t r = 0; r < rows; ++r) std::copy(b1.begin(), b1.end(), logits.begin() + r * n);
    kern.gemm_accumulate(x, rows, d, w1.data(), n, logits.data());
    return;
  }
  hidden.resize(rows * h);
  for (std::size_t r = 0; r < rows; ++r) std::copy(b1.begin(), b1.end(), hidden.begin() + r * h);
  kern.gemm_accumulate(x, rows, d, w1.data(), h, hidden.data());
  for (auto& v : hidden) v = std::tanh(v);
  auto b2 = p.b2();
  logits.resize(rows * n);
  for (std::size_t r = 0; r < rows; ++r) std::copy(b2.begin(), b2.end(), logits.begin() + r * n);
  kern.gemm_accumulate(hidden.data(), rows, h, p.w2().data(), n, logits.data());
}

void check_params_features(const ClassifierParams& p, const FeatureMatrix& f) {
  if (p.feature_dim() != f.dim)
    throw Error(ErrorKind::Dimension, "classifier expects " + std::to_string(p.feature_dim()) +
                                          " features, got " + std::to_string(f.dim));
}

}  // namespace

FeatureMatrix extract_features(const RasterImage& image, const ExtraChannels& extra, int radius) {
  check_extra(image, extra);
  if (radius < 0) throw Error(ErrorKind::Parameter, "window radius must be non-negative");
  const int w = image.width(), h = image.height(), nch = image.channels();
  const std::size_t n = image.pixel_count();
  const std::size_t dim = feature_dim(nch);
  FeatureMatrix out{n, dim, std::vector<double>(n * dim)};

  for (std::size_t p = 0; p < n; ++p) {
    double* row = out.data.data() + p * dim;
    for (int c = 0; c < nch; ++c) row[c] = image.data()[p * nch + c];
    row[nch] = (double(extra.shadow[p]) + 1.0) / 2.0;
    row[nch + 1] = double(extra.elevation[p]) / 2.0;
  }

  const auto& kern = simd::kernels();
  const std::size_t padded_w = std::size_t(w) + 2 * std::size_t(radius);
  const double count = double(2 * radius + 1) * double(2 * radius + 1);
  std::vector<float> padded(padded_w * std::size_t(h));
  const std::size_t wn = static_cast<std::size_t>(w);
  std::vector<double> sum(wn), mean(wn), sq(wn);
  for (int c = 0; c < nch; ++c) {
    // Each row extended by `radius` clamped samples on both sides.
    for (int y = 0; y < h; ++y)
      for (std::size_t i = 0; i < padded_w; ++i) {
        const int x = std::clamp(int(i) - radius, 0, w - 1);
        padded[std::size_t(y) * padded_w + i] = image.at(x, y, c);
      }
    for (int y = 0; y < h; ++y) {
      std::fill(sum.begin(), sum.end(), 0.0);
      for (int dy = -radius; dy <= radius; ++dy) {
        const float* src = padded.data() + std::size_t(std::clamp(y + dy, 0, h - 1)) * padded_w;
        for (int dx = -radius; dx <= radius; ++dx) kern.add_rows(sum.data(), src + radius + dx, std::size_t(w));
      }
      for (int x = 0; x < w; ++x) mean[x] = sum[x] / count;
      std::fill(sq.begin(), sq.end(), 0.0);
      for (int dy = -radius; dy <= radius; ++dy) {
        const float* src = padded.data() + std::size_t(std::clamp(y + dy, 0, h - 1)) * padded_w;
        for (int dx = -radius; dx <= radius; ++dx)
          kern.add_sq_dev(sq.data(), src + radius + dx, mean.data(), std::size_t(w));
      }
      for (int x = 0; x < w; ++x) {
        double* row = out.data.data() + (std::size_t(y) * w + x) * dim;
        row[nch + 2 + c] = mean[x];
        row[2 * nch + 2 + c] = std::sqrt(sq[x] / count);
      }
    }
  }
  return out;
}

ClassifierParams::ClassifierParams(std::size_t feature_dim, std::size_t n_classes, std::size_t hidden)
    : feature_dim_(feature_dim), n_classes_(n_classes), hidden_(hidden) {
  if (feature_dim == 0 || n_classes == 0)
    throw Error(ErrorKind::Parameter, "classifier needs positive feature and class counts");
  values_.assign(layout(feature_dim, n_classes, hidden).total, 0.0);
}

ClassifierParams ClassifierParams::random(std::size_t feature_dim, std::size_t n_classes,
                                          std::size_t hidden, std::uint64_t seed) {
  ClassifierParams p(feature_dim, n_classes, hidden);
  const Layout l = layout(feature_dim, n_classes, hidden);
  Rng rng(seed);
  const double s1 = 1.0 / std::sqrt(double(feature_dim));
  for (std::size_t i = l.w1; i < l.b1; ++i) p.values_[i] = rng.normal() * s1;
  if (hidden) {
    const double s2 = 1.0 / std::sqrt(double(hidden));
    for (std::size_t i = l.w2; i < l.b2; ++i) p.values_[i] = rng.normal() * s2;
  }
  return p;
}

std::span<const double> ClassifierParams::w1() const {
  const Layout l = layout(feature_dim_, n_classes_, hidden_);
  return std::span<const double>(values_).subspan(l.w1, l.b1 - l.w1);
}
std::span<const double> ClassifierParams::b1() const {
  const Layout l = layout(feature_dim_, n_classes_, hidden_);
  return std::span<const double>(values_).subspan(l.b1, l.w2 - l.b1);
}
std::span<const double> ClassifierParams::w2() const {
  const Layout l = layout(feature_dim_, n_classes_, hidden_);
  return std::span<const double>(values_).subspan(l.w2, l.b2 - l.w2);
}
std::span<const double> ClassifierParams::b2() const {
  const Layout l = layout(feature_dim_, n_classes_, hidden_);
  if (!hidden_) return std::span<const double>(values_).subspan(l.b1, n_classes_);
  return std::span<const double>(values_).subspan(l.b2, l.total - l.b2);
}

bool ClassifierParams::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void TrainingConfig::validate() const {
  if (!(learning_rate > 0.0)) throw Error(ErrorKind::Parameter, "learning_rate must be positive");
  if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0) || !(adam_beta2 > 0.0 && adam_beta2 < 1.0))
    throw Error(ErrorKind::Parameter, "Adam betas must lie in (0,1)");
  if (!(adam_eps > 0.0)) throw Error(ErrorKind::Parameter, "adam_eps must be positive");
  if (epochs < 0) throw Error(ErrorKind::Parameter, "epochs must be non-negative");
  if (batch == 0) throw Error(ErrorKind::Parameter, "batch must be positive");
}

void append_samples(TrainingSet& set, const FeatureMatrix& features, const LabelMap& labels) {
  if (features.rows != labels.pixel_count())
    throw Error(ErrorKind::Dimension, "feature rows do not match label count");
  if (set.features.rows == 0)
    set.features.dim = features.dim;
  else if (set.features.dim != features.dim)
    throw Error(ErrorKind::Dimension, "feature dimension differs between samples");
  set.features.data.insert(set.features.data.end(), features.data.begin(), features.data.end());
  set.features.rows += features.rows;
  set.labels.insert(set.labels.end(), labels.labels().begin(), labels.labels().end());
}

std::vector<double> forward(const ClassifierParams& params, const FeatureMatrix& features) {
  check_params_features(params, features);
  const std::size_t n = params.n_classes();
  std::vector<double> probs(features.rows * n);
  std::vector<double> hidden, logits;
  for (std::size_t r0 = 0; r0 < features.rows; r0 += kChunk) {
    const std::size_t rows = std::min(kChunk, features.rows - r0);
    forward_chunk(params, features, r0, rows, hidden, logits);
    for (std::size_t r = 0; r < rows; ++r) softmax_row(logits.data() + r * n, n, -1);
    std::copy(logits.begin(), logits.end(), probs.begin() + r0 * n);
  }
  return probs;
}

double loss_and_gradient(const ClassifierParams& params, const FeatureMatrix& features,
                         std::span<const ClassId> labels, std::vector<double>* gradient) {
  check_params_features(params, features);
  if (labels.size() != features.rows)
    throw Error(ErrorKind::Dimension, "label count does not match feature rows");
  const std::size_t d = params.feature_dim(), n = params.n_classes(), h = params.hidden();
  const Layout l = layout(d, n, h);
  if (gradient) gradient->assign(l.total, 0.0);
  for (ClassId y : labels)
    if (y < 0 || std::size_t(y) >= n) throw Error(ErrorKind::InvalidId, "label outside classifier classes");

  double loss = 0.0;
  std::vector<double> hidden, logits, dh;
  auto w2 = params.w2();
  for (std::size_t r0 = 0; r0 < features.rows; r0 += kChunk) {
    const std::size_t rows = std::min(kChunk, features.rows - r0);
    forward_chunk(params, features, r0, rows, hidden, logits);
    for (std::size_t r = 0; r < rows; ++r) {
      double* z = logits.data() + r * n;
      const ClassId y = labels[r0 + r];
      loss -= softmax_row(z, n, y);
      if (!gradient) continue;
      z[std::size_t(y)] -= 1.0;  // z now holds dJ/dlogits
      double* g = gradient->data();
      const double* x = features.row(r0 + r);
      if (h == 0) {
        for (std::size_t i = 0; i < d; ++i)
          for (std::size_t k = 0; k < n; ++k) g[l.w1 + i * n + k] += x[i] * z[k];
        for (std::size_t k = 0; k < n; ++k) g[l.b1 + k] += z[k];
        continue;
      }
      const double* a = hidden.data() + r * h;
      dh.assign(h, 0.0);
      for (std::size_t j = 0; j < h; ++j) {
        for (std::size_t k = 0; k < n; ++k) {
          g[l.w2 + j * n + k] += a[j] * z[k];
          dh[j] += z[k] * w2[j * n + k];
        }
        dh[j] *= 1.0 - a[j] * a[j];
      }
      for (std::size_t k = 0; k < n; ++k) g[l.b2 + k] += z[k];
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < h; ++j) g[l.w1 + i * h + j] += x[i] * dh[j];
      for (std::size_t j = 0; j < h; ++j) g[l.b1 + j] += dh[j];
    }
  }
  return loss;
}

TrainResult train(ClassifierParams params, const TrainingSet& set, const TrainingConfig& cfg) {
  cfg.validate();
  if (set.features.rows == 0) throw Error(ErrorKind::Empty, "training set is empty");
  check_params_features(params, set.features);
  if (set.labels.size() != set.features.rows)
    throw Error(ErrorKind::Dimension, "label count does not match feature rows");

  TrainResult result{std::move(params), {}};
  ClassifierParams& p = result.params;
  const std::size_t total = p.values().size();
  const std::size_t dim = set.features.dim;
  std::vector<double> m(total, 0.0), v(total, 0.0), grad;
  std::vector<std::uint32_t> order(set.features.rows);
  std::iota(order.begin(), order.end(), 0u);
  Rng rng(cfg.seed);

  FeatureMatrix batch{0, dim, {}};
  std::vector<ClassId> batch_labels;
  std::uint64_t step = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[std::size_t(rng.uniform_int(0, std::int64_t(i) - 1))]);

    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      const std::size_t rows = std::min(cfg.batch, order.size() - start);
      batch.rows = rows;
      batch.data.resize(rows * dim);
      batch_labels.resize(rows);
      for (std::size_t r = 0; r < rows; ++r) {
        const std::uint32_t src = order[start + r];
        std::copy_n(set.features.row(src), dim, batch.data.begin() + r * dim);
        batch_labels[r] = set.labels[src];
      }
      loss_and_gradient(p, batch, batch_labels, &grad);

      ++step;
      const double inv = 1.0 / double(rows);
      const double c1 = 1.0 - std::pow(cfg.adam_beta1, double(step));
      const double c2 = 1.0 - std::pow(cfg.adam_beta2, double(step));
      auto values = p.values();
      for (std::size_t k = 0; k < total; ++k) {
        const double g = grad[k] * inv;
        m[k] = cfg.adam_beta1 * m[k] + (1.0 - cfg.adam_beta1) * g;
        v[k] = cfg.adam_beta2 * v[k] + (1.0 - cfg.adam_beta2) * g * g;
        values[k] -= cfg.learning_rate * (m[k] / c1) / (std::sqrt(v[k] / c2) + cfg.adam_eps);
      }
    }

    const double loss = loss_and_gradient(p, set.features, set.labels, nullptr) / double(set.features.rows);
    if (!std::isfinite(loss) || !p.all_finite())
      throw Error(ErrorKind::Divergence, "training diverged at epoch " + std::to_string(epoch));
    result.loss_history.push_back(loss);
  }
  return result;
}

ProbMap predict(const ClassifierParams& params, const RasterImage& image, const ExtraChannels& extra,
                int radius) {
  const FeatureMatrix f = extract_features(image, extra, radius);
  const std::vector<double> probs = forward(params, f);
  std::vector<float> out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) out[i] = float(probs[i]);
  return ProbMap(image.width(), image.height(), int(params.n_classes()), std::move(out));
}

}  // namespace cbf
