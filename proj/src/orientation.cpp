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

#include "reid/orientation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "reid/error.hpp"

namespace reid {
namespace {

constexpr std::array<std::string_view, kNumOrientations> kNames = {
    "front", "right_front", "right", "right_rear", "rear", "left_rear", "left", "left_front"};

constexpr Orientation at(std::size_t i) { return static_cast<Orientation>(i % kNumOrientations); }

constexpr OrientationGroup make_group(std::size_t center, std::array<int, 7> keypoints) {
  return OrientationGroup{at(center), {at(center + kNumOrientations - 1), at(center), at(center + 1)},
                          keypoints};
}

// Seven key-points visible in each orientation group, in table order.
constexpr std::array<OrientationGroup, kNumOrientations> kGroups = {
    make_group(0, {11, 12, 7, 8, 9, 13, 14}),    // front
    make_group(1, {9, 13, 5, 7, 12, 3, 16}),     // right front
    make_group(2, {7, 3, 12, 13, 16, 4, 18}),    // right
    make_group(3, {3, 4, 12, 16, 18, 19, 13}),   // right rear
    make_group(4, {18, 16, 15, 19, 17, 11, 12}), // rear
    make_group(5, {2, 17, 15, 11, 14, 19, 1}),   // left rear
    make_group(6, {8, 1, 11, 14, 15, 2, 17}),    // left
    make_group(7, {9, 14, 6, 8, 11, 1, 15}),     // left front
};

void check_weights(const std::array<double, kNumOrientations>& w) {
  for (double v : w) {
    if (!std::isfinite(v)) throw NonFiniteError("orientation likelihood: non-finite entry");
    if (v < 0.0) throw InvalidArgument("orientation likelihood: negative entry");
  }
}

}  // namespace

Orientation orientation_from_index(int index) {
  if (index < 0 || index >= static_cast<int>(kNumOrientations)) {
    throw InvalidArgument("orientation id " + std::to_string(index) + " outside 0..7");
  }
  return static_cast<Orientation>(index);
}

std::string_view orientation_name(Orientation o) { return kNames[index_of(o)]; }

Orientation parse_orientation(std::string_view name) {
  for (std::size_t i = 0; i < kNumOrientations; ++i) {
    if (kNames[i] == name) return at(i);
  }
  throw InvalidArgument("unknown orientation '" + std::string(name) + "'");
}

OrientationLikelihood OrientationLikelihood::from_weights(
    const std::array<double, kNumOrientations>& w) {
  check_weights(w);
  return OrientationLikelihood(w);
}

OrientationLikelihood OrientationLikelihood::from_probabilities(
    const std::array<double, kNumOrientations>& p) {
  check_weights(p);
  double sum = 0.0;
  for (double v : p) sum += v;
  if (std::abs(sum - 1.0) > 1e-6) {
    throw InvalidArgument("orientation likelihood: probabilities sum to " + std::to_string(sum));
  }
  return OrientationLikelihood(p);
}

OrientationLikelihood OrientationLikelihood::from_logits(
    const std::array<double, kNumOrientations>& logits) {
  for (double v : logits) {
    if (!std::isfinite(v)) throw NonFiniteError("orientation logits: non-finite entry");
  }
  const double shift = *std::ranges::max_element(logits);
  std::array<double, kNumOrientations> p{};
  double sum = 0.0;
  for (std::size_t i = 0; i < kNumOrientations; ++i) {
    p[i] = std::exp(logits[i] - shift);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return OrientationLikelihood(p);
}

Orientation OrientationLikelihood::most_likely() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < kNumOrientations; ++i) {
    if (p_[i] > p_[best]) best = i;
  }
  return at(best);
}

const OrientationGroup& orientation_group(Orientation center) { return kGroups[index_of(center)]; }

std::span<const OrientationGroup, kNumOrientations> all_orientation_groups() { return kGroups; }

std::array<double, kNumOrientations> group_scores(const OrientationLikelihood& lik) {
  std::array<double, kNumOrientations> scores{};
  for (std::size_t g = 0; g < kNumOrientations; ++g) {
    // Summed in ascending order so groups holding the same three values tie
    // exactly instead of by rounding accident.
    std::array<double, 3> v{};
    for (std::size_t k = 0; k < 3; ++k) v[k] = lik[kGroups[g].members[k]];
    std::ranges::sort(v);
    scores[g] = (v[0] + v[1]) + v[2];
  }
  return scores;
}

const OrientationGroup& select_group(const OrientationLikelihood& lik) {
  const auto scores = group_scores(lik);
  std::size_t best = 0;
  for (std::size_t g = 1; g < kNumOrientations; ++g) {
    if (scores[g] > scores[best] ||
        (scores[g] == scores[best] && lik.values()[g] > lik.values()[best])) {
      best = g;
    }
  }
  return kGroups[best];
}

std::array<int, 7> keypoints_for_group(Orientation group) {
  return kGroups[index_of(group)].keypoints;
}

std::array<int, 7> keypoints_for_group(std::string_view group_name) {
  return keypoints_for_group(parse_orientation(group_name));
}

ConfusionMatrix confusion_matrix(std::span<const int> predictions,
                                 std::span<const int> ground_truth) {
  if (predictions.size() != ground_truth.size()) {
    throw DimensionError("confusion_matrix: " + std::to_string(predictions.size()) +
                         " predictions vs " + std::to_string(ground_truth.size()) + " labels");
  }
  ConfusionMatrix cm;
  std::uint64_t correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const std::size_t t = index_of(orientation_from_index(ground_truth[i]));
    const std::size_t p = index_of(orientation_from_index(predictions[i]));
    ++cm.counts[t][p];
    if (t == p) ++correct;
  }
  cm.total = predictions.size();
  cm.accuracy = cm.total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(cm.total);
  return cm;
}

}  // namespace reid
