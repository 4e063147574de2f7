// Copyright 2026 The reidkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Data-parallel inner loops used across the library. Each kernel has a scalar
// reference implementation and, where the target supports it, a vectorized
// variant (AVX2+FMA on x86-64, NEON on aarch64). The active table is chosen
// once at first use from the CPU's capabilities; REID_SIMD=scalar|avx2|neon
// forces a specific table (falling back to scalar when unavailable).
//
// Vector variants reassociate floating-point sums, so results agree with the
// scalar reference to rounding, not bit-for-bit. argmax is exact.

#include <cassert>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace reid::simd {

enum class Isa { kScalar, kAvx2, kNeon };

struct Kernels {
  Isa isa;
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // sum_i (a[i] - b[i])^2
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // smallest index holding the maximum value; n must be > 0
  std::size_t (*argmax)(const double* x, std::size_t n);
};

const Kernels& scalar_kernels();
// nullptr when the ISA was not compiled in or the CPU lacks it.
const Kernels* kernels_for(Isa isa);
const Kernels& active();
std::vector<Isa> available_isas();
std::string_view isa_name(Isa isa);

inline double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return active().dot(a.data(), b.data(), a.size());
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return active().squared_distance(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline std::size_t argmax(std::span<const double> x) {
  assert(!x.empty());
  return active().argmax(x.data(), x.size());
}

}  // namespace reid::simd
