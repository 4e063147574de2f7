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

#include <cstdlib>
#include <string>

#include "kernel_tables.hpp"

namespace reid::simd {
namespace {

bool cpu_has(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(REID_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::kNeon:
#if defined(REID_HAVE_NEON)
      return true;  // mandatory on aarch64
#else
      return false;
#endif
  }
  return false;
}

const Kernels& select_kernels() {
  if (const char* forced = std::getenv("REID_SIMD")) {
    const std::string want(forced);
    for (Isa isa : {Isa::kScalar, Isa::kAvx2, Isa::kNeon}) {
      if (want == isa_name(isa)) {
        const Kernels* k = kernels_for(isa);
        return k != nullptr ? *k : scalar_kernels();
      }
    }
  }
  for (Isa isa : {Isa::kAvx2, Isa::kNeon}) {
    if (const Kernels* k = kernels_for(isa)) return *k;
  }
  return scalar_kernels();
}

}  // namespace

const Kernels& scalar_kernels() { return detail::kScalar; }

const Kernels* kernels_for(Isa isa) {
  if (!cpu_has(isa)) return nullptr;
  switch (isa) {
    case Isa::kScalar:
      return &detail::kScalar;
    case Isa::kAvx2:
#if defined(REID_HAVE_AVX2)
      return &detail::kAvx2;
#else
      return nullptr;
#endif
    case Isa::kNeon:
#if defined(REID_HAVE_NEON)
      return &detail::kNeon;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

const Kernels& active() {
  static const Kernels& k = select_kernels();
  return k;
}

std::vector<Isa> available_isas() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::kScalar, Isa::kAvx2, Isa::kNeon}) {
    if (kernels_for(isa) != nullptr) out.push_back(isa);
  }
  return out;
}

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
    case Isa::kNeon: return "neon";
  }
  return "unknown";
}

}  // namespace reid::simd
