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

#include <immintrin.h>

#include "cbf/simd/kernels.hpp"

namespace cbf::simd {
namespace {

void slic_relax_row(const SlicRowArgs& a) {
  const float dy = float(a.y) - a.center_y;
  const float dy2 = dy * dy;
  const std::size_t base = std::size_t(a.y) * std::size_t(a.width);

  const __m256 v_dy2 = _mm256_set1_ps(dy2);
  const __m256 v_cx = _mm256_set1_ps(a.center_x);
  const __m256 v_cw = _mm256_set1_ps(a.color_weight);
  const __m256 v_sw = _mm256_set1_ps(a.spatial_weight);
  const __m256 lane = _mm256_setr_ps(0, 1, 2, 3, 4, 5, 6, 7);
  const __m256i v_label = _mm256_set1_epi32(a.label);

  int i = 0;
  for (; i + 8 <= a.count; i += 8) {
    const int x = a.x0 + i;
    const std::size_t p = base + std::size_t(x);
    __m256 color = _mm256_setzero_ps();
    for (int c = 0; c < a.channels; ++c) {
      const __m256 d = _mm256_sub_ps(_mm256_loadu_ps(a.planes[c] + p),
                                     _mm256_set1_ps(a.center_color[c]));
      color = _mm256_add_ps(color, _mm256_mul_ps(d, d));
    }
    const __m256 dx = _mm256_sub_ps(_mm256_add_ps(_mm256_set1_ps(float(x)), lane), v_cx);
    const __m256 spatial = _mm256_add_ps(_mm256_mul_ps(dx, dx), v_dy2);
    const __m256 d = _mm256_add_ps(_mm256_mul_ps(v_cw, color), _mm256_mul_ps(v_sw, spatial));

    const __m256 old = _mm256_loadu_ps(a.dist + p);
    const __m256 closer = _mm256_cmp_ps(d, old, _CMP_LT_OQ);
    _mm256_storeu_ps(a.dist + p, _mm256_blendv_ps(old, d, closer));

    __m256i* lp = reinterpret_cast<__m256i*>(a.labels + p);
    const __m256i old_labels = _mm256_loadu_si256(lp);
    _mm256_storeu_si256(lp, _mm256_blendv_epi8(old_labels, v_label, _mm256_castps_si256(closer)));
  }

  for (; i < a.count; ++i) {
    const int x = a.x0 + i;
    const std::size_t p = base + std::size_t(x);
    float color = 0.0f;
    for (int c = 0; c < a.channels; ++c) {
      const float d = a.planes[c][p] - a.center_color[c];
      color = color + d * d;
    }
    const float dx = float(x) - a.center_x;
    const float d = a.color_weight * color + a.spatial_weight * (dx * dx + dy2);
    if (d < a.dist[p]) {
      a.dist[p] = d;
      a.labels[p] = a.label;
    }
  }
}

void gemm_accumulate(const double* x, std::size_t rows, std::size_t inner, const double* w,
                     std::size_t cols, double* out) {
  const std::size_t wide = cols & ~std::size_t(3);
  for (std::size_t r = 0; r < rows; ++r) {
    double* o = out + r * cols;
    const double* xr = x + r * inner;
    for (std::size_t i = 0; i < inner; ++i) {
      const double xv = xr[i];
      const __m256d v = _mm256_set1_pd(xv);
      const double* wr = w + i * cols;
      std::size_t k = 0;
      for (; k < wide; k += 4) {
        const __m256d acc = _mm256_loadu_pd(o + k);
        _mm256_storeu_pd(o + k, _mm256_add_pd(acc, _mm256_mul_pd(v, _mm256_loadu_pd(wr + k))));
      }
      for (; k < cols; ++k) o[k] = o[k] + xv * wr[k];
    }
  }
}

void add_rows(double* acc, const float* src, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d s = _mm256_cvtps_pd(_mm_loadu_ps(src + i));
    _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), s));
  }
  for (; i < n; ++i) acc[i] = acc[i] + double(src[i]);
}

void add_sq_dev(double* acc, const float* src, const double* mean, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_cvtps_pd(_mm_loadu_ps(src + i)), _mm256_loadu_pd(mean + i));
    _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), _mm256_mul_pd(d, d)));
  }
  for (; i < n; ++i) {
    const double d = double(src[i]) - mean[i];
    acc[i] = acc[i] + d * d;
  }
}

}  // namespace

const KernelTable& avx2_kernels() {
  static const KernelTable table{Backend::Avx2, slic_relax_row, gemm_accumulate, add_rows,
                                 add_sq_dev};
  return table;
}

}  // namespace cbf::simd
