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

// Vehicle orientation: the 8-way likelihood vector, the orientation groups
// (a center orientation plus its two circular neighbours) and the fixed
// group -> seven key-point table used for adaptive key-point selection.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace reid {

inline constexpr std::size_t kNumOrientations = 8;

// Canonical order; walking +1 goes clockwise when viewed from above.
enum class Orientation : std::uint8_t {
  kFront = 0,
  kRightFront = 1,
  kRight = 2,
  kRightRear = 3,
  kRear = 4,
  kLeftRear = 5,
  kLeft = 6,
  kLeftFront = 7,
};

constexpr std::size_t index_of(Orientation o) { return static_cast<std::size_t>(o); }
Orientation orientation_from_index(int index);  // throws InvalidArgument
std::string_view orientation_name(Orientation o);  // "front", "right_front", ...
Orientation parse_orientation(std::string_view name);  // throws InvalidArgument

class OrientationLikelihood {
 public:
  // Non-negative finite weights; no normalization is imposed, so scaled
  // likelihoods are representable.
  static OrientationLikelihood from_weights(const std::array<double, kNumOrientations>& w);
  // As from_weights, plus |sum - 1| <= 1e-6.
  static OrientationLikelihood from_probabilities(const std::array<double, kNumOrientations>& p);
  // Max-shifted softmax of raw network outputs.
  static OrientationLikelihood from_logits(const std::array<double, kNumOrientations>& logits);

  double operator[](Orientation o) const { return p_[index_of(o)]; }
  const std::array<double, kNumOrientations>& values() const { return p_; }
  Orientation most_likely() const;

 private:
  explicit OrientationLikelihood(const std::array<double, kNumOrientations>& p) : p_(p) {}
  std::array<double, kNumOrientations> p_{};
};

struct OrientationGroup {
  Orientation center;
  std::array<Orientation, 3> members;  // {center - 1, center, center + 1} mod 8
  std::array<int, kNumOrientations - 1> keypoints;  // 1-based ids, table order
};

// Groups are identified by their center orientation.
const OrientationGroup& orientation_group(Orientation center);
std::span<const OrientationGroup, kNumOrientations> all_orientation_groups();

// score[g] = sum of the likelihoods of group g's three members.
std::array<double, kNumOrientations> group_scores(const OrientationLikelihood& lik);

// Highest group score; ties go to the larger center likelihood, then to the
// smaller canonical index.
const OrientationGroup& select_group(const OrientationLikelihood& lik);

std::array<int, 7> keypoints_for_group(Orientation group);
std::array<int, 7> keypoints_for_group(std::string_view group_name);  // throws InvalidArgument

struct ConfusionMatrix {
  // counts[truth][predicted]
  std::array<std::array<std::uint64_t, kNumOrientations>, kNumOrientations> counts{};
  std::uint64_t total = 0;
  double accuracy = 0.0;  // trace / total; 0 for an empty tally
};

// Ids are canonical orientation indices; out-of-range ids and length mismatch
// throw.
ConfusionMatrix confusion_matrix(std::span<const int> predictions,
                                 std::span<const int> ground_truth);

}  // namespace reid
