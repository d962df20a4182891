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


#include <cstring>
#include <vector>

#include "cbf/classifier.hpp"
#include "cbf/rng.hpp"
#include "cbf/simd/kernels.hpp"
#include "cbf/superpixel.hpp"
#include "doctest.h"

using namespace cbf;
using namespace cbf::simd;

namespace {

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

// Restores the automatic choice when a test leaves.
struct BackendGuard {
  Backend saved = kernels().backend;
  ~BackendGuard() { set_backend(saved); }
};

RasterImage random_image(int w, int h, int c, std::uint64_t seed) {
  Rng rng(seed);
  RasterImage img(w, h, c);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int k = 0; k < c; ++k) img.at(x, y, k) = float(rng.uniform());
  return img;
}

}  // namespace

TEST_SUITE("simd") {

TEST_CASE("scalar backend is always available") {
  CHECK(backend_available(Backend::Scalar));
  CHECK(kernels_for(Backend::Scalar).backend == Backend::Scalar);
}

TEST_CASE("vector kernels match the scalar reference bit for bit") {
  if (!backend_available(Backend::Avx2)) {
    MESSAGE("AVX2 not available; skipping");
    return;
  }
  const auto& s = kernels_for(Backend::Scalar);
  const auto& v = kernels_for(Backend::Avx2);
  Rng rng(4);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t rows = std::size_t(rng.uniform_int(1, 9)), inner = std::size_t(rng.uniform_int(1, 23)),
                      cols = std::size_t(rng.uniform_int(1, 19));
    std::vector<double> x(rows * inner), w(inner * cols), o1(rows * cols), o2;
    for (auto& e : x) e = rng.uniform(-2, 2);
    for (auto& e : w) e = rng.uniform(-2, 2);
    for (auto& e : o1) e = rng.uniform(-1, 1);
    o2 = o1;
    s.gemm_accumulate(x.data(), rows, inner, w.data(), cols, o1.data());
    v.gemm_accumulate(x.data(), rows, inner, w.data(), cols, o2.data());
    CHECK(bitwise_equal(o1, o2));

    const std::size_t n = std::size_t(rng.uniform_int(1, 37));
    std::vector<float> src(n);
    for (auto& e : src) e = float(rng.uniform());
    std::vector<double> mean(n), a1(n), a2;
    for (auto& e : mean) e = rng.uniform();
    for (auto& e : a1) e = rng.uniform();
    a2 = a1;
    s.add_rows(a1.data(), src.data(), n);
    v.add_rows(a2.data(), src.data(), n);
    CHECK(bitwise_equal(a1, a2));
    s.add_sq_dev(a1.data(), src.data(), mean.data(), n);
    v.add_sq_dev(a2.data(), src.data(), mean.data(), n);
    CHECK(bitwise_equal(a1, a2));
  }
}

TEST_CASE("slic row relaxation matches") {
  if (!backend_available(Backend::Avx2)) return;
  Rng rng(6);
  const int w = 37, h = 5, ch = 3;
  std::vector<std::vector<float>> planes(ch, std::vector<float>(std::size_t(w) * h));
  for (auto& p : planes)
    for (auto& e : p) e = float(rng.uniform());
  std::vector<const float*> ptrs;
  for (auto& p : planes) ptrs.push_back(p.data());
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<float> d1(std::size_t(w) * h), d2;
    for (auto& e : d1) e = float(rng.uniform(0, 3));
    d2 = d1;
    std::vector<std::int32_t> l1(d1.size(), -1), l2 = l1;
    const float center[3] = {float(rng.uniform()), float(rng.uniform()), float(rng.uniform())};
    const int x0 = int(rng.uniform_int(0, w - 1));
    SlicRowArgs args{ptrs.data(), ch, w, int(rng.uniform_int(0, h - 1)), x0, int(rng.uniform_int(1, w - x0)),
                     center, float(rng.uniform(0, w)), float(rng.uniform(0, h)), 1.0f, 0.05f, trial,
                     d1.data(), l1.data()};
    kernels_for(Backend::Scalar).slic_relax_row(args);
    args.dist = d2.data();
    args.labels = l2.data();
    kernels_for(Backend::Avx2).slic_relax_row(args);
    CHECK(std::memcmp(d1.data(), d2.data(), d1.size() * sizeof(float)) == 0);
    CHECK(l1 == l2);
  }
}

TEST_CASE("whole operations agree across backends") {
  if (!backend_available(Backend::Avx2)) return;
  BackendGuard guard;
  const auto img = random_image(45, 33, 3, 8);
  auto extra = zero_extra_channels(45, 33);
  const auto params = ClassifierParams::random(feature_dim(3), 8, 6, 2);

  set_backend(Backend::Scalar);
  const auto seg_s = slic_segment(img, 80, 10.0, 10, 1);
  const auto feat_s = extract_features(img, extra, 2);
  const auto prob_s = predict(params, img, extra, 2);
  set_backend(Backend::Avx2);
  const auto seg_v = slic_segment(img, 80, 10.0, 10, 1);
  const auto feat_v = extract_features(img, extra, 2);
  const auto prob_v = predict(params, img, extra, 2);

  CHECK(seg_s == seg_v);
  CHECK(bitwise_equal(feat_s.data, feat_v.data));
  CHECK(prob_s.probs() == prob_v.probs());
}

}
