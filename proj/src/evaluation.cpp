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

#include "reid/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "reid/error.hpp"
#include "reid/parallel.hpp"
#include "reid/random.hpp"

namespace reid {
namespace {

struct QueryOutcome {
  std::optional<double> ap;
  std::size_t first_match = 0;  // 1-based; 0 when nothing relevant
};

QueryOutcome score_ranking(const RankedList& ranked, std::span<const EmbeddingRecord> gallery,
                           int identity) {
  std::vector<bool> relevance(ranked.indices.size());
  for (std::size_t r = 0; r < ranked.indices.size(); ++r) {
    relevance[r] = gallery[ranked.indices[r]].identity == identity;
  }
  QueryOutcome out;
  out.ap = average_precision(relevance);
  const auto it = std::ranges::find(relevance, true);
  if (it != relevance.end()) out.first_match = static_cast<std::size_t>(it - relevance.begin()) + 1;
  return out;
}

// Fills mean_ap, cmc, query_ap, num_queries, excluded_queries.
void summarize(std::span<const QueryOutcome> outcomes, std::size_t depth, EvalReport& report) {
  depth = std::max<std::size_t>(depth, 5);
  std::vector<std::size_t> hits(depth, 0);
  report.query_ap.clear();
  report.excluded_queries = 0;
  double ap_sum = 0.0;
  for (const auto& o : outcomes) {
    if (!o.ap) {
      ++report.excluded_queries;
      continue;
    }
    report.query_ap.push_back(*o.ap);
    ap_sum += *o.ap;
    for (std::size_t k = o.first_match; k <= depth; ++k) ++hits[k - 1];
  }
  report.num_queries = report.query_ap.size();
  report.cmc.assign(depth, 0.0);
  if (report.num_queries == 0) {
    report.mean_ap = 0.0;
    return;
  }
  const double n = static_cast<double>(report.num_queries);
  report.mean_ap = ap_sum / n;
  for (std::size_t k = 0; k < depth; ++k) report.cmc[k] = static_cast<double>(hits[k]) / n;
}

}  // namespace

std::string_view protocol_name(Protocol p) {
  return p == Protocol::kVeri ? "veri" : "vehicleid";
}

double EvalReport::cmc_at(std::size_t k) const {
  if (k == 0) throw InvalidArgument("cmc_at: k must be >= 1");
  if (cmc.empty()) return 0.0;
  return cmc[std::min(k, cmc.size()) - 1];
}

std::vector<bool> veri_gallery_mask(const EmbeddingRecord& query,
                                    std::span<const EmbeddingRecord> gallery) {
  std::vector<bool> keep(gallery.size());
  for (std::size_t i = 0; i < gallery.size(); ++i) {
    const auto& g = gallery[i];
    const bool same_track = g.identity == query.identity && g.camera == query.camera;
    keep[i] = !same_track && g.image_id != query.image_id;
  }
  return keep;
}

std::optional<double> average_precision(const std::vector<bool>& ranked_relevance) {
  std::size_t found = 0;
  double sum = 0.0;
  for (std::size_t r = 0; r < ranked_relevance.size(); ++r) {
    if (!ranked_relevance[r]) continue;
    ++found;
    sum += static_cast<double>(found) / static_cast<double>(r + 1);
  }
  if (found == 0) return std::nullopt;
  return sum / static_cast<double>(found);
}

double cmc_at(std::span<const std::vector<bool>> ranked_relevance, std::size_t k) {
  if (k == 0) throw InvalidArgument("cmc_at: k must be >= 1");
  std::size_t counted = 0;
  std::size_t hits = 0;
  for (const auto& ranking : ranked_relevance) {
    const auto it = std::ranges::find(ranking, true);
    if (it == ranking.end()) continue;
    ++counted;
    if (static_cast<std::size_t>(it - ranking.begin()) < k) ++hits;
  }
  return counted == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(counted);
}

EvalReport evaluate_veri(std::span<const EmbeddingRecord> queries,
                         std::span<const EmbeddingRecord> test, const VeriOptions& options) {
  if (queries.empty()) throw DimensionError("evaluate_veri: empty query set");
  if (test.empty()) throw DimensionError("evaluate_veri: empty test set");

  DistanceMatrix reranked;
  if (options.use_rerank) {
    std::vector<EmbeddingRecord> all(queries.begin(), queries.end());
    all.insert(all.end(), test.begin(), test.end());
    const auto pairwise = cosine_distance_matrix(all, all);
    reranked = rerank(pairwise.values, queries.size(), options.rerank);
  }

  std::vector<QueryOutcome> outcomes(queries.size());
  parallel_for(queries.size(), [&](std::size_t q) {
    const auto keep = veri_gallery_mask(queries[q], test);
    if (std::ranges::none_of(keep, [](bool b) { return b; })) return;  // excluded
    const RankedList ranked = options.use_rerank
                                  ? rank_by_distance(reranked.values.row(q), test, keep)
                                  : rank_gallery(queries[q], test, keep);
    outcomes[q] = score_ranking(ranked, test, queries[q].identity);
  });

  EvalReport report;
  report.protocol = Protocol::kVeri;
  if (options.use_rerank) report.rerank = options.rerank;
  summarize(outcomes, options.cmc_depth, report);
  report.trial_map = {report.mean_ap};
  report.trial_cmc = {{report.cmc_at(1), report.cmc_at(5)}};
  return report;
}

VehicleIdSplit vehicleid_split(std::span<const EmbeddingRecord> test, std::uint64_t trial_seed) {
  if (test.empty()) throw DimensionError("vehicleid: empty test set");
  std::map<int, std::vector<std::size_t>> by_identity;
  for (std::size_t i = 0; i < test.size(); ++i) by_identity[test[i].identity].push_back(i);

  Rng rng(trial_seed);
  VehicleIdSplit split;
  std::vector<bool> in_gallery(test.size(), false);
  for (auto& [identity, members] : by_identity) {
    std::ranges::sort(members, [&test](std::size_t a, std::size_t b) {
      return test[a].image_id < test[b].image_id;
    });
    const std::size_t pick = members[rng.uniform_below(members.size())];
    split.gallery.push_back(pick);
    in_gallery[pick] = true;
  }
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (!in_gallery[i]) split.queries.push_back(i);
  }
  return split;
}

EvalReport evaluate_vehicleid(std::span<const EmbeddingRecord> test,
                              const VehicleIdOptions& options) {
  if (test.empty()) throw DimensionError("evaluate_vehicleid: empty test set");
  if (options.trials == 0) throw InvalidArgument("evaluate_vehicleid: trials must be >= 1");

  EvalReport report;
  report.protocol = Protocol::kVehicleId;
  report.trials = options.trials;
  report.seed = options.seed;

  const auto trial_seeds = derive_seeds(options.seed, options.trials);
  std::vector<double> cmc_sum;
  double map_sum = 0.0;
  for (std::size_t t = 0; t < options.trials; ++t) {
    const auto split = vehicleid_split(test, trial_seeds[t]);
    std::vector<EmbeddingRecord> gallery;
    gallery.reserve(split.gallery.size());
    for (std::size_t g : split.gallery) gallery.push_back(test[g]);
    const std::vector<bool> keep(gallery.size(), true);

    std::vector<QueryOutcome> outcomes(split.queries.size());
    parallel_for(split.queries.size(), [&](std::size_t q) {
      const auto& query = test[split.queries[q]];
      outcomes[q] = score_ranking(rank_gallery(query, gallery, keep), gallery, query.identity);
    });

    EvalReport trial;
    summarize(outcomes, options.cmc_depth, trial);
    report.trial_map.push_back(trial.mean_ap);
    report.trial_cmc.push_back({trial.cmc_at(1), trial.cmc_at(5)});
    if (cmc_sum.empty()) cmc_sum.assign(trial.cmc.size(), 0.0);
    for (std::size_t k = 0; k < trial.cmc.size(); ++k) cmc_sum[k] += trial.cmc[k];
    map_sum += trial.mean_ap;
    report.query_ap = std::move(trial.query_ap);
    report.num_queries = trial.num_queries;
    report.excluded_queries = trial.excluded_queries;
  }
  const double n = static_cast<double>(options.trials);
  report.mean_ap = map_sum / n;
  report.cmc.resize(cmc_sum.size());
  for (std::size_t k = 0; k < cmc_sum.size(); ++k) report.cmc[k] = cmc_sum[k] / n;
  return report;
}

double keypoint_mse(std::span<const KeypointSample> samples, KeypointErrorMode mode) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& s : samples) {
    if (s.predicted.size() != s.truth.size() || s.visible.size() != s.truth.size()) {
      throw DimensionError("keypoint_mse: predicted / truth / visibility lengths differ");
    }
    for (std::size_t k = 0; k < s.truth.size(); ++k) {
      if (!s.visible[k]) continue;
      const double dx = s.predicted[k].x - s.truth[k].x;
      const double dy = s.predicted[k].y - s.truth[k].y;
      const double sq = dx * dx + dy * dy;
      sum += mode == KeypointErrorMode::kMeanDistance ? std::sqrt(sq) : sq;
      ++count;
    }
  }
  if (count == 0) throw DegenerateInput("keypoint_mse: no visible key-points");
  return sum / static_cast<double>(count);
}

double keypoint_scaled_error(const KeypointSample& s, double native_grid, double threshold_grid) {
  if (s.predicted.size() != s.truth.size() || s.visible.size() != s.truth.size()) {
    throw DimensionError("keypoint_precision: predicted / truth / visibility lengths differ");
  }
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < s.truth.size(); ++k) {
    if (!s.visible[k]) continue;
    sum += std::hypot(s.predicted[k].x - s.truth[k].x, s.predicted[k].y - s.truth[k].y);
    ++count;
  }
  if (count == 0) throw DegenerateInput("keypoint_precision: sample without visible key-points");
  return sum / static_cast<double>(count) * threshold_grid / native_grid;
}

double keypoint_precision(std::span<const KeypointSample> samples, double r0, double native_grid,
                          double threshold_grid) {
  if (samples.empty()) throw DimensionError("keypoint_precision: no samples");
  if (!(native_grid > 0.0) || !(threshold_grid > 0.0)) {
    throw InvalidArgument("keypoint_precision: grid sizes must be positive");
  }
  std::size_t correct = 0;
  for (const auto& s : samples) {
    if (keypoint_scaled_error(s, native_grid, threshold_grid) < r0) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

}  // namespace reid
