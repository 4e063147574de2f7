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

#include "reid/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "reid/error.hpp"
#include "reid/parallel.hpp"
#include "reid/simd.hpp"

namespace reid {
namespace {

double checked_norm(std::span<const double> v, const char* what) {
  const double n = std::sqrt(simd::dot(v, v));
  if (!(n >= 1e-12)) throw DegenerateInput(std::string(what) + ": vector norm below 1e-12");
  return n;
}

std::vector<double> norms_of(std::span<const std::vector<double>> vs) {
  std::vector<double> out(vs.size());
  for (std::size_t i = 0; i < vs.size(); ++i) out[i] = checked_norm(vs[i], "cosine distance");
  return out;
}

// Ranks eligible gallery entries; `better(a, b)` is the strict score order.
template <typename Better>
RankedList rank_impl(std::span<const double> scores, std::span<const EmbeddingRecord> gallery,
                     const std::vector<bool>& keep, Better better) {
  if (keep.size() != gallery.size() || scores.size() != gallery.size()) {
    throw DimensionError("rank: mask / score length does not match gallery");
  }
  RankedList out;
  for (std::size_t i = 0; i < gallery.size(); ++i) {
    if (keep[i]) out.indices.push_back(i);
  }
  if (out.indices.empty()) throw InvalidArgument("rank: no eligible gallery entries");
  std::ranges::sort(out.indices, [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return better(scores[a], scores[b]);
    if (gallery[a].image_id != gallery[b].image_id) {
      return gallery[a].image_id < gallery[b].image_id;
    }
    return a < b;
  });
  out.scores.reserve(out.indices.size());
  for (std::size_t i : out.indices) out.scores.push_back(scores[i]);
  return out;
}

}  // namespace

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("cosine_similarity: length mismatch");
  const double na = checked_norm(a, "cosine_similarity");
  const double nb = checked_norm(b, "cosine_similarity");
  return std::clamp(simd::dot(a, b) / (na * nb), -1.0, 1.0);
}

DistanceMatrix cosine_distance_matrix(std::span<const std::vector<double>> rows,
                                      std::span<const std::vector<double>> cols) {
  const std::size_t dim = rows.empty() ? (cols.empty() ? 0 : cols[0].size()) : rows[0].size();
  for (const auto& v : rows) {
    if (v.size() != dim) throw DimensionError("cosine distance: inconsistent feature dims");
  }
  for (const auto& v : cols) {
    if (v.size() != dim) throw DimensionError("cosine distance: inconsistent feature dims");
  }
  const auto row_norms = norms_of(rows);
  const auto col_norms = norms_of(cols);
  DistanceMatrix out{Matrix(rows.size(), cols.size()), DistanceMetric::kCosine};
  parallel_for(rows.size(), [&](std::size_t r) {
    auto dst = out.values.row(r);
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const double sim = simd::dot(rows[r], cols[c]) / (row_norms[r] * col_norms[c]);
      dst[c] = 1.0 - std::clamp(sim, -1.0, 1.0);
    }
  });
  return out;
}

DistanceMatrix cosine_distance_matrix(std::span<const EmbeddingRecord> queries,
                                      std::span<const EmbeddingRecord> gallery) {
  std::vector<std::vector<double>> q, g;
  q.reserve(queries.size());
  g.reserve(gallery.size());
  for (const auto& r : queries) q.push_back(r.feature);
  for (const auto& r : gallery) g.push_back(r.feature);
  return cosine_distance_matrix(q, g);
}

RankedList rank_gallery(const EmbeddingRecord& query, std::span<const EmbeddingRecord> gallery,
                        const std::vector<bool>& keep) {
  std::vector<double> scores(gallery.size(), 0.0);
  for (std::size_t i = 0; i < gallery.size(); ++i) {
    if (i < keep.size() && keep[i]) scores[i] = cosine_similarity(query.feature, gallery[i].feature);
  }
  return rank_impl(scores, gallery, keep, std::greater<>{});
}

RankedList rank_by_distance(std::span<const double> distances,
                            std::span<const EmbeddingRecord> gallery,
                            const std::vector<bool>& keep) {
  return rank_impl(distances, gallery, keep, std::less<>{});
}

}  // namespace reid
