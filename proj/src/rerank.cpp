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

// k-reciprocal re-ranking with Jaccard distance and local query expansion.
//
// For each sample i:
//   R(i, k)   = { j in N(i, k) : i in N(j, k) }, N(i, k) = first k+1 of i's ranking
//   R*(i)     = R(i, k1) united with every R(c, round(k1/2)), c in R(i, k1),
//               that shares more than 2/3 of its members with R(i, k1)
//   V[i, j]   = exp(-d(i, j)) / sum_{m in R*(i)} exp(-d(i, m))   for j in R*(i)
//   V[i]     <- mean of V[m] over the first k2 entries of i's ranking (k2 > 1)
//   J(i, j)   = 1 - S / (2 - S),  S = sum_k min(V[i, k], V[j, k])
// Rankings order by distance, ties by index. round() is half-to-even.

#include <algorithm>
#include <cmath>
#include <string>

#include "reid/error.hpp"
#include "reid/parallel.hpp"
#include "reid/retrieval.hpp"

namespace reid {
namespace {

using SparseRow = std::vector<std::pair<std::size_t, double>>;  // sorted by column

std::vector<std::vector<std::size_t>> nearest(const Matrix& d, std::size_t count) {
  const std::size_t n = d.rows();
  std::vector<std::vector<std::size_t>> out(n);
  parallel_for(n, [&](std::size_t i) {
    std::vector<std::size_t> order(n);
    for (std::size_t j = 0; j < n; ++j) order[j] = j;
    const auto row = d.row(i);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count),
                      order.end(), [&row](std::size_t a, std::size_t b) {
                        return row[a] != row[b] ? row[a] < row[b] : a < b;
                      });
    order.resize(count);
    out[i] = std::move(order);
  });
  return out;
}

std::vector<std::size_t> k_reciprocal(const std::vector<std::vector<std::size_t>>& ranks,
                                      std::size_t i, std::size_t k) {
  std::vector<std::size_t> out;
  for (std::size_t f = 0; f <= k; ++f) {
    const std::size_t cand = ranks[i][f];
    const auto& back = ranks[cand];
    if (std::find(back.begin(), back.begin() + static_cast<std::ptrdiff_t>(k + 1), i) !=
        back.begin() + static_cast<std::ptrdiff_t>(k + 1)) {
      out.push_back(cand);
    }
  }
  return out;
}

std::vector<SparseRow> encode(const Matrix& d, const RerankParams& params) {
  const std::size_t n = d.rows();
  const auto ranks = nearest(d, params.k1 + 1);
  const auto half = static_cast<std::size_t>(std::nearbyint(static_cast<double>(params.k1) / 2.0));

  std::vector<SparseRow> v(n);
  parallel_for(n, [&](std::size_t i) {
    auto base = k_reciprocal(ranks, i, params.k1);
    std::vector<std::size_t> expanded = base;
    std::vector<std::size_t> base_sorted = base;
    std::ranges::sort(base_sorted);
    for (std::size_t cand : base) {
      auto cand_set = k_reciprocal(ranks, cand, half);
      std::vector<std::size_t> cand_sorted = cand_set;
      std::ranges::sort(cand_sorted);
      std::vector<std::size_t> common;
      std::ranges::set_intersection(cand_sorted, base_sorted, std::back_inserter(common));
      if (3 * common.size() > 2 * cand_set.size()) {
        expanded.insert(expanded.end(), cand_set.begin(), cand_set.end());
      }
    }
    std::ranges::sort(expanded);
    expanded.erase(std::unique(expanded.begin(), expanded.end()), expanded.end());

    SparseRow row;
    row.reserve(expanded.size());
    double total = 0.0;
    for (std::size_t j : expanded) {
      const double w = std::exp(-d(i, j));
      row.emplace_back(j, w);
      total += w;
    }
    for (auto& e : row) e.second /= total;
    v[i] = std::move(row);
  });

  if (params.k2 == 1) return v;

  std::vector<SparseRow> expanded(n);
  parallel_for(n, [&](std::size_t i) {
    std::vector<double> dense(n, 0.0);
    for (std::size_t m = 0; m < params.k2; ++m) {
      for (const auto& [col, w] : v[ranks[i][m]]) dense[col] += w;
    }
    const double inv = 1.0 / static_cast<double>(params.k2);
    SparseRow row;
    for (std::size_t col = 0; col < n; ++col) {
      if (dense[col] != 0.0) row.emplace_back(col, dense[col] * inv);
    }
    expanded[i] = std::move(row);
  });
  return expanded;
}

void check_square(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw DimensionError("rerank: all-pairs distance matrix must be square, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  for (double x : m.data()) {
    if (!std::isfinite(x)) throw NonFiniteError("rerank: non-finite input distance");
  }
}

// Jaccard rows [0, num_rows) against every column.
Matrix jaccard_rows(const Matrix& d, std::size_t num_rows, const RerankParams& params) {
  const std::size_t n = d.rows();
  const auto v = encode(d, params);

  std::vector<std::vector<std::pair<std::size_t, double>>> inverted(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (const auto& [col, w] : v[j]) inverted[col].emplace_back(j, w);
  }

  Matrix out(num_rows, n);
  parallel_for(num_rows, [&](std::size_t i) {
    std::vector<double> shared(n, 0.0);
    for (const auto& [col, wi] : v[i]) {
      for (const auto& [j, wj] : inverted[col]) shared[j] += std::min(wi, wj);
    }
    auto dst = out.row(i);
    for (std::size_t j = 0; j < n; ++j) dst[j] = 1.0 - shared[j] / (2.0 - shared[j]);
  });
  return out;
}

Matrix blend(const Matrix& original, const Matrix& jaccard, double lambda) {
  Matrix out(jaccard.rows(), jaccard.cols());
  for (std::size_t i = 0; i < out.rows(); ++i) {
    for (std::size_t j = 0; j < out.cols(); ++j) {
      out(i, j) = jaccard(i, j) * (1.0 - lambda) + original(i, j) * lambda;
    }
  }
  return out;
}

}  // namespace

void RerankParams::validate(std::size_t sample_count) const {
  if (k2 < 1 || k1 <= k2) throw InvalidArgument("rerank: require k1 > k2 >= 1");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidArgument("rerank: lambda must be in [0, 1]");
  if (k1 >= sample_count) {
    throw InvalidArgument("rerank: k1=" + std::to_string(k1) + " must be below the sample count " +
                          std::to_string(sample_count));
  }
}

Matrix jaccard_distances(const Matrix& all_pairs, const RerankParams& params) {
  check_square(all_pairs);
  params.validate(all_pairs.rows());
  return jaccard_rows(all_pairs, all_pairs.rows(), params);
}

Matrix rerank_all_pairs(const Matrix& all_pairs, const RerankParams& params) {
  check_square(all_pairs);
  params.validate(all_pairs.rows());
  if (params.lambda == 1.0) return all_pairs;
  return blend(all_pairs, jaccard_rows(all_pairs, all_pairs.rows(), params), params.lambda);
}

DistanceMatrix rerank(const Matrix& all_pairs, std::size_t num_query, const RerankParams& params) {
  check_square(all_pairs);
  params.validate(all_pairs.rows());
  const std::size_t n = all_pairs.rows();
  if (num_query > n) throw DimensionError("rerank: num_query exceeds sample count");
  const Matrix jac = params.lambda == 1.0 ? Matrix(num_query, n) : jaccard_rows(all_pairs, num_query, params);
  DistanceMatrix out{Matrix(num_query, n - num_query), DistanceMetric::kReranked};
  for (std::size_t i = 0; i < num_query; ++i) {
    for (std::size_t j = num_query; j < n; ++j) {
      out.values(i, j - num_query) =
          jac(i, j) * (1.0 - params.lambda) + all_pairs(i, j) * params.lambda;
    }
  }
  return out;
}

}  // namespace reid
