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

#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace reid {

// Portable seeded generator. std::mt19937_64's output sequence is fixed by the
// standard; the distributions in <random> are not, so range reduction,
// uniform reals and normals are done here with documented algorithms:
//   uniform_below: rejection sampling on the top of the 64-bit range
//   uniform01:     53 high bits scaled by 2^-53
//   normal:        Box-Muller, cosine branch only (no cached second value)
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  std::uint64_t uniform_below(std::uint64_t bound);
  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  double normal();

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// Draws `count` child seeds from a master seed, in order.
std::vector<std::uint64_t> derive_seeds(std::uint64_t master, std::size_t count);

}  // namespace reid
