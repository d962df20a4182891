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

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string_view>

#include "cbf/error.hpp"
#include "cbf/simd/kernels.hpp"

namespace cbf::simd {

const char* to_string(Backend backend) {
  return backend == Backend::Avx2 ? "avx2" : "scalar";
}

bool backend_available(Backend backend) {
  switch (backend) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
#if defined(CBF_HAVE_AVX2)
      __builtin_cpu_init();
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& kernels_for(Backend backend) {
  if (!backend_available(backend))
    throw Error(ErrorKind::Parameter, std::string("SIMD backend '") + to_string(backend) +
                                          "' is not available on this machine");
#if defined(CBF_HAVE_AVX2)
  if (backend == Backend::Avx2) return avx2_kernels();
#endif
  return scalar_kernels();
}

namespace {

const KernelTable* select_default() {
  if (const char* env = std::getenv("CBF_SIMD")) {
    std::string_view v(env);
    if (v == "scalar") return &scalar_kernels();
    if (v == "avx2" && backend_available(Backend::Avx2)) return &kernels_for(Backend::Avx2);
  }
  if (backend_available(Backend::Avx2)) return &kernels_for(Backend::Avx2);
  return &scalar_kernels();
}

std::atomic<const KernelTable*> g_active{nullptr};

}  // namespace

const KernelTable& kernels() {
  const KernelTable* t = g_active.load(std::memory_order_acquire);
  if (!t) {
    const KernelTable* chosen = select_default();
    g_active.compare_exchange_strong(t, chosen, std::memory_order_acq_rel);
    t = g_active.load(std::memory_order_acquire);
  }
  return *t;
}

void set_backend(Backend backend) {
  g_active.store(&kernels_for(backend), std::memory_order_release);
}

}  // namespace cbf::simd
