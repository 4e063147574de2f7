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

#include "reid/simd.hpp"

namespace reid::simd::detail {

extern const Kernels kScalar;
#if defined(REID_HAVE_AVX2)
extern const Kernels kAvx2;
#endif
#if defined(REID_HAVE_NEON)
extern const Kernels kNeon;
#endif

}  // namespace reid::simd::detail
