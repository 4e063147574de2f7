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

// Cosine scoring, gallery ranking and k-reciprocal re-ranking.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reid/matrix.hpp"
#include "reid/orientation.hpp"

namespace reid {

struct EmbeddingRecord {
  std::string image_id;
  int identity = 0;
  int camera = 0;
  std::vector<double> feature;
  std::optional<OrientationLikelihood> orientation;
};

enum class DistanceMetric : std::uint8_t { kCosine, kReranked };

struct DistanceMatrix {
  Matrix values;  // rows = queries, cols = gallery
  DistanceMetric metric = DistanceMetric::kCosine;

  std::size_t rows() const { return values.rows(); }
  std::size_t cols() const { return values.cols(); }
};

// <a, b> / (||a|| ||b||). Throws DegenerateInput if either norm < 1e-12.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

// 1 - cosine similarity for every (row, col) pair; parallel over rows.
DistanceMatrix cosine_distance_matrix(std::span<const std::vector<double>> rows,
                                      std::span<const std::vector<double>> cols);
DistanceMatrix cosine_distance_matrix(std::span<const EmbeddingRecord> queries,
                                      std::span<const EmbeddingRecord> gallery);

struct RankedList {
  std::vector<std::size_t> indices;  // into the gallery
  std::vector<double> scores;        // similarity (or distance when ranked by distance)
};

// Eligible entries (keep[i] == true) by descending cosine similarity to the
// query, ties by ascending image id. Throws InvalidArgument when nothing is
// eligible.
RankedList rank_gallery(const EmbeddingRecord& query, std::span<const EmbeddingRecord> gallery,
                        const std::vector<bool>& keep);

// Same ordering contract for a precomputed row of distances (ascending).
RankedList rank_by_distance(std::span<const double> distances,
                            std::span<const EmbeddingRecord> gallery,
                            const std::vector<bool>& keep);

struct RerankParams {
  std::size_t k1 = 20;
  std::size_t k2 = 6;
  double lambda = 0.3;

  // Throws InvalidArgument unless k1 > k2 >= 1, lambda in [0, 1] and
  // k1 < sample_count.
  void validate(std::size_t sample_count) const;
};

// k-reciprocal re-ranking over a square all-pairs distance matrix (queries
// first, then gallery). Returns the blended distance for every ordered pair:
//   lambda * original + (1 - lambda) * jaccard
Matrix rerank_all_pairs(const Matrix& all_pairs, const RerankParams& params);

// Query-to-gallery block of the re-ranked matrix: rows [0, num_query),
// columns [num_query, N).
DistanceMatrix rerank(const Matrix& all_pairs, std::size_t num_query, const RerankParams& params);

// Jaccard distances alone (same layout as rerank_all_pairs).
Matrix jaccard_distances(const Matrix& all_pairs, const RerankParams& params);

}  // namespace reid
