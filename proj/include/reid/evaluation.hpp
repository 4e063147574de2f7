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

// Retrieval evaluation protocols and metrics.
//
// VeRi-style: every query ranks the test set minus the images sharing both
// its identity and its camera (and minus itself); relevant = same identity.
// VehicleID-style: per trial, one seeded-random image per identity forms the
// gallery and all other images are queries with exactly one true match.
//
// Queries without any relevant gallery entry are excluded from every mean.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reid/retrieval.hpp"

namespace reid {

enum class Protocol { kVeri, kVehicleId };
std::string_view protocol_name(Protocol p);

inline constexpr std::size_t kDefaultCmcDepth = 10;

struct EvalReport {
  Protocol protocol = Protocol::kVeri;
  double mean_ap = 0.0;
  std::vector<double> cmc;          // cmc[k - 1] = CMC@k
  std::vector<double> query_ap;     // per evaluated query (last trial for VehicleID)
  std::size_t num_queries = 0;      // evaluated queries (per trial for VehicleID)
  std::size_t excluded_queries = 0; // queries with no relevant gallery entry
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  std::optional<RerankParams> rerank;
  std::vector<double> trial_map;    // per trial (VehicleID)
  std::vector<std::array<double, 2>> trial_cmc;  // per trial {CMC@1, CMC@5}

  double cmc_at(std::size_t k) const;  // k >= 1; saturates past the curve end
};

// keep[i] is false iff gallery[i] shares identity and camera with the query
// or is the query image itself.
std::vector<bool> veri_gallery_mask(const EmbeddingRecord& query,
                                    std::span<const EmbeddingRecord> gallery);

// (1/R) * sum over relevant ranks r of precision@r; nullopt when R = 0.
std::optional<double> average_precision(const std::vector<bool>& ranked_relevance);

// Fraction of queries with a relevant item in the top k; queries with no
// relevant item at all are left out of the denominator.
double cmc_at(std::span<const std::vector<bool>> ranked_relevance, std::size_t k);

struct VeriOptions {
  bool use_rerank = false;
  RerankParams rerank;
  std::size_t cmc_depth = kDefaultCmcDepth;
};

EvalReport evaluate_veri(std::span<const EmbeddingRecord> queries,
                         std::span<const EmbeddingRecord> test, const VeriOptions& options = {});

struct VehicleIdSplit {
  std::vector<std::size_t> gallery;  // one per identity, ascending identity
  std::vector<std::size_t> queries;  // remaining images, input order
};

// Throws DimensionError on an empty test set.
VehicleIdSplit vehicleid_split(std::span<const EmbeddingRecord> test, std::uint64_t trial_seed);

struct VehicleIdOptions {
  std::size_t trials = 10;
  std::uint64_t seed = 0;
  std::size_t cmc_depth = kDefaultCmcDepth;
};

EvalReport evaluate_vehicleid(std::span<const EmbeddingRecord> test,
                              const VehicleIdOptions& options = {});

// Key-point localization.

struct Keypoint {
  double x = 0.0;
  double y = 0.0;
};

struct KeypointSample {
  std::vector<Keypoint> predicted;
  std::vector<Keypoint> truth;
  std::vector<bool> visible;
};

enum class KeypointErrorMode {
  kMeanDistance,         // mean Euclidean distance in pixels (default)
  kMeanSquaredDistance,  // mean squared distance in pixels^2
};

inline constexpr double kNativeMapSize = 56.0;
inline constexpr double kThresholdMapSize = 48.0;

// Mean over every visible key-point of every sample. Throws DegenerateInput
// when nothing is visible.
double keypoint_mse(std::span<const KeypointSample> samples,
                    KeypointErrorMode mode = KeypointErrorMode::kMeanDistance);

// Per-sample mean distance over visible key-points, rescaled by
// threshold_grid / native_grid; the sample is correct iff that is below r0.
double keypoint_precision(std::span<const KeypointSample> samples, double r0,
                          double native_grid = kNativeMapSize,
                          double threshold_grid = kThresholdMapSize);

// Rescaled per-sample mean distance used by keypoint_precision.
double keypoint_scaled_error(const KeypointSample& sample, double native_grid = kNativeMapSize,
                             double threshold_grid = kThresholdMapSize);

// Report text: key=value lines, then a "[json]" line and one JSON object.
std::string format_eval_report(const EvalReport& report);

}  // namespace reid
