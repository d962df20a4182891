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

// Data-parallel inner loops used by superpixel segmentation, feature
// extraction and the classifier forward pass. Every kernel has a scalar
// reference and, where the target supports it, a vectorized variant chosen
// at runtime. Variants perform the same IEEE operations in the same order
// (no fused multiply-add), so their outputs are bitwise identical.

#include <cstddef>
#include <cstdint>

namespace cbf::simd {

enum class Backend { Scalar, Avx2 };

const char* to_string(Backend backend);

struct SlicRowArgs {
  const float* const* planes;  // channel planes, each width*height
  int channels;
  int width;
  int y;
  int x0;
  int count;
  const float* center_color;   // one value per channel
  float center_x;
  float center_y;
  float color_weight;          // multiplies the squared color distance
  float spatial_weight;        // multiplies the squared pixel distance
  std::int32_t label;
  float* dist;                 // whole-image distance buffer
  std::int32_t* labels;        // whole-image assignment buffer
};

struct KernelTable {
  Backend backend;

  /// For pixels (x0..x0+count, y): D = cw*|p-c|^2 + sw*((x-cx)^2+(y-cy)^2);
  /// where D < dist, store D and the label.
  void (*slic_relax_row)(const SlicRowArgs& args);

  /// out[r*cols + k] += sum over i (ascending) of x[r*inner + i] * w[i*cols + k].
  void (*gemm_accumulate)(const double* x, std::size_t rows, std::size_t inner,
                          const double* w, std::size_t cols, double* out);

  /// acc[i] += src[i]
  void (*add_rows)(double* acc, const float* src, std::size_t n);

  /// acc[i] += (src[i] - mean[i])^2
  void (*add_sq_dev)(double* acc, const float* src, const double* mean, std::size_t n);
};

const KernelTable& scalar_kernels();
#if defined(CBF_HAVE_AVX2)
const KernelTable& avx2_kernels();
#endif

bool backend_available(Backend backend);

/// Kernels for a specific backend; throws if it is not available here.
const KernelTable& kernels_for(Backend backend);

/// The active table. Chosen on first use from CPU features; the CBF_SIMD
/// environment variable ("scalar" or "avx2") overrides the choice.
const KernelTable& kernels();

/// Replace the active table (tests and benchmarks).
void set_backend(Backend backend);

}  // namespace cbf::simd
