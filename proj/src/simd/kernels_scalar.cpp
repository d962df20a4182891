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

#include "cbf/simd/kernels.hpp"

namespace cbf::simd {
namespace {

void slic_relax_row(const SlicRowArgs& a) {
  const float dy = float(a.y) - a.center_y;
  const float dy2 = dy * dy;
  const std::size_t base = std::size_t(a.y) * std::size_t(a.width);
  for (int i = 0; i < a.count; ++i) {
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
  for (std::size_t r = 0; r < rows; ++r) {
    double* o = out + r * cols;
    const double* xr = x + r * inner;
    for (std::size_t i = 0; i < inner; ++i) {
      const double xv = xr[i];
      const double* wr = w + i * cols;
      for (std::size_t k = 0; k < cols; ++k) o[k] = o[k] + xv * wr[k];
    }
  }
}

void add_rows(double* acc, const float* src, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] = acc[i] + double(src[i]);
}

void add_sq_dev(double* acc, const float* src, const double* mean, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double d = double(src[i]) - mean[i];
    acc[i] = acc[i] + d * d;
  }
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{Backend::Scalar, slic_relax_row, gemm_accumulate, add_rows,
                                 add_sq_dev};
  return table;
}

}  // namespace cbf::simd
