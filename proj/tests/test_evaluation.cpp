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

#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "eval_oracle.hpp"
#include "reid/error.hpp"
#include "reid/evaluation.hpp"
#include "reid/random.hpp"

using reid::EmbeddingRecord;

namespace {

EmbeddingRecord rec(std::string id, int identity, int camera, std::vector<double> f) {
  return {std::move(id), identity, camera, std::move(f), std::nullopt};
}

}  // namespace

TEST_CASE("average precision on hand-worked rankings") {
  CHECK(*reid::average_precision({true, false, true}) == doctest::Approx((1.0 + 2.0 / 3.0) / 2));
  CHECK(*reid::average_precision({false, false, true}) == doctest::Approx(1.0 / 3.0));
  CHECK(*reid::average_precision({true}) == 1.0);
  CHECK_FALSE(reid::average_precision({false, false}).has_value());
  CHECK_FALSE(reid::average_precision({}).has_value());
}

TEST_CASE("cmc skips queries without relevant items") {
  const std::vector<std::vector<bool>> r = {{true, false}, {false, true}, {false, false}};
  CHECK(reid::cmc_at(r, 1) == 0.5);
  CHECK(reid::cmc_at(r, 2) == 1.0);
  CHECK_THROWS_AS(reid::cmc_at(r, 0), reid::InvalidArgument);
}

TEST_CASE("veri mask drops same identity-and-camera and the query itself") {
  const auto q = rec("q", 1, 2, {1});
  const std::vector<EmbeddingRecord> g = {rec("a", 1, 2, {1}), rec("b", 1, 3, {1}),
                                          rec("c", 2, 2, {1}), rec("q", 9, 9, {1})};
  CHECK(reid::veri_gallery_mask(q, g) == std::vector<bool>{false, true, true, false});
}

TEST_CASE("evaluate_veri on a hand-worked example") {
  // Query identity 1 camera 0; gallery ranks: b (id 2), c (id 1), d (id 1, cam 0 -> masked).
  const std::vector<EmbeddingRecord> queries = {rec("q", 1, 0, {1, 0})};
  const std::vector<EmbeddingRecord> test = {rec("b", 2, 1, {1, 0.1}), rec("c", 1, 1, {1, 0.5}),
                                             rec("d", 1, 0, {1, 0})};
  const auto r = reid::evaluate_veri(queries, test);
  CHECK(r.mean_ap == doctest::Approx(0.5));
  CHECK(r.cmc_at(1) == 0.0);
  CHECK(r.cmc_at(2) == 1.0);
  CHECK(r.cmc_at(5) == 1.0);
  CHECK(r.num_queries == 1);
}

TEST_CASE("evaluate_veri equals the brute-force reference") {
  reid::Rng rng(99);
  for (int t = 0; t < 50; ++t) {
    const auto s = reid_test::synthetic_set(rng);
    const auto ref = reid_test::brute_force_metrics(s.queries, s.test, reid_test::veri_eligible);
    const auto r = reid::evaluate_veri(s.queries, s.test);
    CHECK(r.num_queries == ref.evaluated);
    CHECK(r.excluded_queries == s.queries.size() - ref.evaluated);
    CHECK(r.mean_ap == ref.mean_ap);
    CHECK(r.cmc_at(1) == ref.cmc1);
    CHECK(r.cmc_at(5) == ref.cmc5);
    CHECK(r.query_ap == ref.ap);
    for (std::size_t k = 1; k < r.cmc.size(); ++k) CHECK(r.cmc[k] >= r.cmc[k - 1]);
  }
}

TEST_CASE("reranked veri evaluation runs and keeps parameters") {
  reid::Rng rng(4);
  auto s = reid_test::synthetic_set(rng, 80);
  while (reid::evaluate_veri(s.queries, s.test).num_queries == 0) {
    s = reid_test::synthetic_set(rng, 80);
  }
  reid::VeriOptions opt;
  opt.use_rerank = true;
  opt.rerank = {5, 2, 0.3};
  const auto r = reid::evaluate_veri(s.queries, s.test, opt);
  REQUIRE(r.rerank.has_value());
  CHECK(r.rerank->k1 == 5);
  CHECK(r.mean_ap > 0.0);
  opt.rerank.lambda = 1.0;
  const auto identity = reid::evaluate_veri(s.queries, s.test, opt);
  const auto plain = reid::evaluate_veri(s.queries, s.test);
  // Same distances up to rounding; the curves must agree.
  CHECK(identity.mean_ap == doctest::Approx(plain.mean_ap).epsilon(1e-9));
}

TEST_CASE("vehicleid split picks one gallery image per identity") {
  reid::Rng rng(21);
  const auto s = reid_test::synthetic_set(rng);
  std::set<int> ids;
  for (const auto& r : s.test) ids.insert(r.identity);
  const auto split = reid::vehicleid_split(s.test, 1234);
  CHECK(split.gallery.size() == ids.size());
  CHECK(split.gallery.size() + split.queries.size() == s.test.size());
  std::set<int> gallery_ids;
  for (std::size_t g : split.gallery) gallery_ids.insert(s.test[g].identity);
  CHECK(gallery_ids == ids);
  const auto again = reid::vehicleid_split(s.test, 1234);
  CHECK(again.gallery == split.gallery);
  CHECK_THROWS_AS(reid::vehicleid_split({}, 1), reid::DimensionError);
}

TEST_CASE("vehicleid split is independent of input order") {
  reid::Rng rng(22);
  auto s = reid_test::synthetic_set(rng);
  const auto split = reid::vehicleid_split(s.test, 77);
  std::set<std::string> chosen;
  for (std::size_t g : split.gallery) chosen.insert(s.test[g].image_id);
  std::reverse(s.test.begin(), s.test.end());
  const auto split2 = reid::vehicleid_split(s.test, 77);
  std::set<std::string> chosen2;
  for (std::size_t g : split2.gallery) chosen2.insert(s.test[g].image_id);
  CHECK(chosen == chosen2);
}

TEST_CASE("vehicleid evaluation averages trials and single-match AP is 1/rank") {
  reid::Rng rng(23);
  const auto s = reid_test::synthetic_set(rng);
  reid::VehicleIdOptions opt;
  opt.seed = 5;
  const auto r = reid::evaluate_vehicleid(s.test, opt);
  CHECK(r.trials == 10);
  REQUIRE(r.trial_map.size() == 10);
  double m = 0, c1 = 0;
  for (std::size_t t = 0; t < 10; ++t) {
    m += r.trial_map[t];
    c1 += r.trial_cmc[t][0];
  }
  CHECK(r.mean_ap == doctest::Approx(m / 10).epsilon(1e-15));
  CHECK(r.cmc_at(1) == doctest::Approx(c1 / 10).epsilon(1e-15));

  // Last trial, recomputed by brute force: AP == 1 / rank of the single match.
  const auto seeds = reid::derive_seeds(5, 10);
  const auto split = reid::vehicleid_split(s.test, seeds[9]);
  std::vector<EmbeddingRecord> gallery, queries;
  for (std::size_t g : split.gallery) gallery.push_back(s.test[g]);
  for (std::size_t q : split.queries) queries.push_back(s.test[q]);
  REQUIRE(r.query_ap.size() == queries.size());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    std::size_t rank = 1;
    const EmbeddingRecord* match = nullptr;
    for (const auto& g : gallery) if (g.identity == queries[q].identity) match = &g;
    REQUIRE(match != nullptr);
    const double s_match = reid_test::naive_cosine(queries[q].feature, match->feature);
    for (const auto& g : gallery) {
      if (&g == match) continue;
      const double sg = reid_test::naive_cosine(queries[q].feature, g.feature);
      if (sg > s_match || (sg == s_match && g.image_id < match->image_id)) ++rank;
    }
    CHECK(r.query_ap[q] == doctest::Approx(1.0 / static_cast<double>(rank)).epsilon(1e-15));
  }

  const auto again = reid::evaluate_vehicleid(s.test, opt);
  CHECK(reid::format_eval_report(again) == reid::format_eval_report(r));
  CHECK_THROWS_AS(reid::evaluate_vehicleid(s.test, {0, 1, 10}), reid::InvalidArgument);
}

TEST_CASE("report text carries the required fields") {
  reid::EvalReport r;
  r.protocol = reid::Protocol::kVehicleId;
  r.mean_ap = 0.5;
  r.cmc = {0.25, 0.5, 0.5, 0.5, 0.75};
  r.trials = 10;
  r.seed = 3;
  const auto text = reid::format_eval_report(r);
  for (const char* key : {"protocol=vehicleid", "map=0.500000", "cmc1=0.250000", "cmc5=0.750000",
                          "trials=10", "seed=3", "rerank=off", "[json]"}) {
    CAPTURE(key);
    CHECK(text.find(key) != std::string::npos);
  }
}

TEST_CASE("key-point metrics") {
  reid::KeypointSample exact{{{1, 2}, {3, 4}}, {{1, 2}, {3, 4}}, {true, true}};
  const std::vector<reid::KeypointSample> zero = {exact};
  CHECK(reid::keypoint_mse(zero) == 0.0);
  CHECK(reid::keypoint_precision(zero, 1.0) == 1.0);

  reid::KeypointSample off{{{3, 4}}, {{0, 0}}, {true}};
  CHECK(reid::keypoint_mse(std::vector{off}) == 5.0);
  CHECK(reid::keypoint_mse(std::vector{off}, reid::KeypointErrorMode::kMeanSquaredDistance) == 25.0);
  CHECK(reid::keypoint_scaled_error(off) == doctest::Approx(5.0 * 48.0 / 56.0).epsilon(1e-12));
  CHECK(reid::keypoint_precision(std::vector{off}, 3.0) == 0.0);
  CHECK(reid::keypoint_precision(std::vector{off}, 5.0) == 1.0);

  // Invisible key-points are ignored.
  reid::KeypointSample partial{{{3, 4}, {100, 100}}, {{0, 0}, {0, 0}}, {true, false}};
  CHECK(reid::keypoint_mse(std::vector{partial}) == 5.0);
  reid::KeypointSample none{{{3, 4}}, {{0, 0}}, {false}};
  CHECK_THROWS_AS(reid::keypoint_mse(std::vector{none}), reid::DegenerateInput);
  CHECK_THROWS_AS(reid::keypoint_precision({}, 3.0), reid::DimensionError);
}
