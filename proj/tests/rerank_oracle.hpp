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
// Dense transcription of the k-reciprocal re-ranking reference code, kept
// deliberately naive: full N x N weight matrix, dense query expansion, direct
// min-sum Jaccard. The input distances are used as given (no squaring or
// column normalization) so that lambda = 1 reproduces the input.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "reid/matrix.hpp"
#include "reid/random.hpp"

namespace reid_test {

inline reid::Matrix random_distance_matrix(reid::Rng& rng, std::size_t n, std::size_t dim = 6) {
  std::vector<std::vector<double>> x(n, std::vector<double>(dim));
  for (auto& v : x) {
    double norm = 0;
    for (double& e : v) {
      e = rng.normal();
      norm += e * e;
    }
    for (double& e : v) e /= std::sqrt(norm);
  }
  reid::Matrix d(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double dot = 0;
      for (std::size_t k = 0; k < dim; ++k) dot += x[i][k] * x[j][k];
      d(i, j) = i == j ? 0.0 : 1.0 - dot;
    }
  }
  return d;
}

inline std::vector<std::size_t> argsort_row(const reid::Matrix& d, std::size_t i) {
  std::vector<std::size_t> idx(d.cols());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return d(i, a) < d(i, b); });
  return idx;
}

inline bool contains(const std::vector<std::size_t>& v, std::size_t x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

// initial_rank[i][:k+1] entries whose own first k+1 neighbors contain i.
inline std::vector<std::size_t> reciprocal(const std::vector<std::vector<std::size_t>>& rank,
                                           std::size_t i, std::size_t k) {
  std::vector<std::size_t> out;
  for (std::size_t f = 0; f <= k; ++f) {
    const std::size_t cand = rank[i][f];
    const std::vector<std::size_t> back(rank[cand].begin(), rank[cand].begin() + k + 1);
    if (contains(back, i)) out.push_back(cand);
  }
  return out;
}

inline reid::Matrix literal_rerank(const reid::Matrix& dist, std::size_t k1, std::size_t k2,
                                   double lambda) {
  const std::size_t n = dist.rows();
  std::vector<std::vector<std::size_t>> rank(n);
  for (std::size_t i = 0; i < n; ++i) rank[i] = argsort_row(dist, i);

  reid::Matrix v(n, n);
  const auto half = static_cast<std::size_t>(std::nearbyint(k1 / 2.0));
  for (std::size_t i = 0; i < n; ++i) {
    const auto krec = reciprocal(rank, i, k1);
    std::vector<std::size_t> expansion = krec;
    for (std::size_t cand : krec) {
      const auto crec = reciprocal(rank, cand, half);
      std::size_t overlap = 0;
      for (std::size_t c : crec) overlap += contains(krec, c) ? 1 : 0;
      if (static_cast<double>(overlap) > 2.0 / 3.0 * static_cast<double>(crec.size())) {
        expansion.insert(expansion.end(), crec.begin(), crec.end());
      }
    }
    std::sort(expansion.begin(), expansion.end());
    expansion.erase(std::unique(expansion.begin(), expansion.end()), expansion.end());
    double total = 0;
    for (std::size_t j : expansion) total += std::exp(-dist(i, j));
    for (std::size_t j : expansion) v(i, j) = std::exp(-dist(i, j)) / total;
  }

  if (k2 != 1) {
    reid::Matrix qe(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t col = 0; col < n; ++col) {
        double s = 0;
        for (std::size_t m = 0; m < k2; ++m) s += v(rank[i][m], col);
        qe(i, col) = s / static_cast<double>(k2);
      }
    }
    v = qe;
  }

  reid::Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double shared = 0;
      for (std::size_t col = 0; col < n; ++col) shared += std::min(v(i, col), v(j, col));
      const double jac = 1.0 - shared / (2.0 - shared);
      out(i, j) = jac * (1.0 - lambda) + dist(i, j) * lambda;
    }
  }
  return out;
}

}  // namespace reid_test
