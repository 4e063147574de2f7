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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Tolerances are fixed here, not taken from the library.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "eval_oracle.hpp"
#include "rerank_oracle.hpp"
#include "reid/evaluation.hpp"
#include "reid/fusion.hpp"
#include "reid/gradcheck.hpp"
#include "reid/heatmaps.hpp"
#include "reid/losses.hpp"
#include "reid/orientation.hpp"
#include "reid/random.hpp"
#include "reid/retrieval.hpp"

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

Outcome gradient_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto suite = reid::run_gradcheck_suite(100, 1e-5, 1e-4, 20260101);
  const double elapsed = seconds_since(t0);
  Outcome o;
  double worst = 0;
  std::size_t instances = 0;
  for (const auto& c : suite.cases) {
    worst = std::max(worst, c.max_rel_error);
    instances += c.trials;
    o.pass = o.pass && c.failures == 0 && c.trials == 100 && c.max_rel_error < 1e-4;
  }
  o.pass = o.pass && suite.cases.size() == 6 && elapsed < 60.0;
  o.detail = std::to_string(suite.cases.size()) + " objectives x 100 instances, max rel err " +
             fmt("%.3e", worst) + " (< 1e-4), " + fmt("%.2f", elapsed) + " s (< 60 s)";
  return o;
}

Outcome closed_form_losses() {
  const double ce21 = reid::softmax_cross_entropy(std::vector<double>(21, 0.0), 0);
  reid::HeatmapStack logits(21, 4, 4, 0.75);
  reid::PixelTarget target{4, 4, std::vector<int>(16, 20)};
  const double pixel = reid::pixel_ce_loss(logits, target).loss;
  const double ce8 = reid::orientation_ce_loss(std::vector<double>(8, 0.0), 3).loss;
  reid::L2SoftmaxParams p;
  p.weights = reid::Matrix(2, 1, {1.0, 0.0});
  p.bias = {0.0, 0.0};
  p.alpha = 4.0;
  const double l2 = reid::l2softmax_loss(std::vector<double>{2.5}, 0, p);

  const double e1 = std::max(std::abs(ce21 - std::log(21.0)), std::abs(pixel - std::log(21.0)));
  const double e2 = std::abs(ce8 - std::log(8.0));
  const double e3 = std::abs(l2 - std::log1p(std::exp(-4.0)));
  Outcome o;
  o.pass = e1 <= 1e-9 && e2 <= 1e-9 && e3 <= 1e-9;
  o.detail = "|ln21 err| " + fmt("%.1e", e1) + ", |ln8 err| " + fmt("%.1e", e2) +
             ", |ln(1+e^-4) err| " + fmt("%.1e", e3) + " (each <= 1e-9)";
  return o;
}

Outcome table_fidelity() {
  const std::map<std::string, std::array<int, 7>> table = {
      {"front", {11, 12, 7, 8, 9, 13, 14}},      {"right_front", {9, 13, 5, 7, 12, 3, 16}},
      {"right", {7, 3, 12, 13, 16, 4, 18}},      {"right_rear", {3, 4, 12, 16, 18, 19, 13}},
      {"rear", {18, 16, 15, 19, 17, 11, 12}},    {"left_rear", {2, 17, 15, 11, 14, 19, 1}},
      {"left", {8, 1, 11, 14, 15, 2, 17}},       {"left_front", {9, 14, 6, 8, 11, 1, 15}},
  };
  std::size_t matched = 0, asserted = 0;
  for (const auto& [name, expected] : table) {
    const auto got = reid::keypoints_for_group(name);
    for (std::size_t k = 0; k < 7; ++k) {
      ++asserted;
      matched += got[k] == expected[k];
    }
  }
  Outcome o;
  o.pass = asserted == 56 && matched == 56;
  o.detail = std::to_string(matched) + "/" + std::to_string(asserted) + " index assertions match";
  return o;
}

Outcome selection_invariance() {
  reid::Rng rng(404);
  std::size_t checks = 0, agree = 0;
  for (int t = 0; t < 1000; ++t) {
    std::array<double, 8> p{};
    for (double& x : p) x = rng.uniform01();
    const auto base = reid::select_group(reid::OrientationLikelihood::from_weights(p)).center;
    for (double c : {0.1, 1.0, 10.0}) {
      std::array<double, 8> q = p;
      for (double& x : q) x *= c;
      ++checks;
      agree += reid::select_group(reid::OrientationLikelihood::from_weights(q)).center == base;
    }
  }
  Outcome o;
  o.pass = checks == 3000 && agree == checks;
  o.detail = std::to_string(agree) + "/" + std::to_string(checks) +
             " scaled selections agree (1000 vectors x c in {0.1, 1, 10})";
  return o;
}

Outcome metric_oracles() {
  reid::Rng rng(505);
  std::size_t sets_ok = 0, vid_queries = 0, vid_ok = 0;
  for (int t = 0; t < 50; ++t) {
    const auto s = reid_test::synthetic_set(rng, 100);
    const auto ref = reid_test::brute_force_metrics(s.queries, s.test, reid_test::veri_eligible);
    const auto r = reid::evaluate_veri(s.queries, s.test);
    sets_ok += r.mean_ap == ref.mean_ap && r.cmc_at(1) == ref.cmc1 && r.cmc_at(5) == ref.cmc5 &&
               r.num_queries == ref.evaluated;

    // Single-relevant protocol: AP must be exactly 1 / rank of the match.
    const auto seed = rng.next();
    const auto vr = reid::evaluate_vehicleid(s.test, {1, seed, reid::kDefaultCmcDepth});
    const auto split = reid::vehicleid_split(s.test, reid::derive_seeds(seed, 1)[0]);
    std::vector<reid::EmbeddingRecord> gallery;
    for (std::size_t g : split.gallery) gallery.push_back(s.test[g]);
    for (std::size_t qi = 0; qi < split.queries.size(); ++qi) {
      const auto& q = s.test[split.queries[qi]];
      const auto ranking = reid_test::brute_force_metrics({q}, gallery, [](const auto&, const auto&) {
        return true;
      });
      std::size_t rank = 1;
      for (const auto& g : gallery) {
        if (g.identity == q.identity) continue;
        const double sg = reid_test::naive_cosine(q.feature, g.feature);
        for (const auto& m : gallery) {
          if (m.identity != q.identity) continue;
          const double sm = reid_test::naive_cosine(q.feature, m.feature);
          rank += sg > sm || (sg == sm && g.image_id < m.image_id);
        }
      }
      ++vid_queries;
      vid_ok += qi < vr.query_ap.size() && ranking.ap.size() == 1 &&
                vr.query_ap[qi] == 1.0 / static_cast<double>(rank) && ranking.ap[0] == vr.query_ap[qi];
    }
  }
  Outcome o;
  o.pass = sets_ok == 50 && vid_ok == vid_queries && vid_queries > 0;
  o.detail = std::to_string(sets_ok) + "/50 sets exact (mAP, CMC@1, CMC@5); " +
             std::to_string(vid_ok) + "/" + std::to_string(vid_queries) +
             " single-match queries with AP == 1/rank";
  return o;
}

Outcome protocol_fidelity() {
  reid::Rng rng(606);
  bool sizes = true, single = true, averaging = true, repeat = true;
  for (int t = 0; t < 10; ++t) {
    const auto s = reid_test::synthetic_set(rng, 100);
    std::set<int> identities;
    for (const auto& r : s.test) identities.insert(r.identity);
    const reid::VehicleIdOptions opt{10, 1000 + static_cast<std::uint64_t>(t), reid::kDefaultCmcDepth};
    for (const auto seed : reid::derive_seeds(opt.seed, opt.trials)) {
      const auto split = reid::vehicleid_split(s.test, seed);
      sizes = sizes && split.gallery.size() == identities.size();
      for (std::size_t q : split.queries) {
        std::size_t relevant = 0;
        for (std::size_t g : split.gallery) relevant += s.test[g].identity == s.test[q].identity;
        single = single && relevant == 1;
      }
    }
    const auto a = reid::evaluate_vehicleid(s.test, opt);
    const auto b = reid::evaluate_vehicleid(s.test, opt);
    double map = 0, c1 = 0, c5 = 0;
    for (std::size_t k = 0; k < a.trial_map.size(); ++k) {
      map += a.trial_map[k];
      c1 += a.trial_cmc[k][0];
      c5 += a.trial_cmc[k][1];
    }
    averaging = averaging && a.trial_map.size() == 10 && a.mean_ap == map / 10 &&
                a.cmc_at(1) == c1 / 10 && a.cmc_at(5) == c5 / 10;
    repeat = repeat && reid::format_eval_report(a) == reid::format_eval_report(b) &&
             a.query_ap == b.query_ap;
  }
  Outcome o;
  o.pass = sizes && single && averaging && repeat;
  o.detail = std::string("gallery=#identities ") + (sizes ? "yes" : "NO") + ", one match/query " +
             (single ? "yes" : "NO") + ", 10-trial mean " + (averaging ? "yes" : "NO") +
             ", bit-identical rerun " + (repeat ? "yes" : "NO");
  return o;
}

Outcome reranking() {
  reid::Rng rng(707);
  const auto d = reid_test::random_distance_matrix(rng, 20);
  const bool identity = reid::rerank_all_pairs(d, {20 - 1, 6, 1.0}) == d &&
                        reid::rerank_all_pairs(d, {5, 2, 1.0}) == d;
  double worst = 0;
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 5 + rng.uniform_below(16);
    const auto m = reid_test::random_distance_matrix(rng, n);
    reid::RerankParams p;
    p.k1 = 2 + rng.uniform_below(std::min<std::size_t>(n - 2, 19));
    p.k2 = 1 + rng.uniform_below(std::min<std::size_t>(p.k1 - 1, 6));
    p.lambda = t % 5 == 0 ? 0.0 : 0.3;
    const auto got = reid::rerank_all_pairs(m, p);
    const auto ref = reid_test::literal_rerank(m, p.k1, p.k2, p.lambda);
    for (std::size_t i = 0; i < got.size(); ++i) {
      worst = std::max(worst, std::abs(got.data()[i] - ref.data()[i]));
    }
  }
  Outcome o;
  o.pass = identity && worst <= 1e-6;
  o.detail = std::string("lambda=1 identity ") + (identity ? "exact" : "BROKEN") +
             ", 20 sets max |diff| vs literal " + fmt("%.2e", worst) + " (<= 1e-6)";
  return o;
}

Outcome heatmap_ops() {
  reid::Rng rng(808);
  std::size_t kept = 0;
  for (int t = 0; t < 1000; ++t) {
    reid::Heatmap m(56, 56);
    for (double& v : m.values()) v = rng.uniform01();
    kept += reid::find_peak(reid::dilate_at_peak(m)).same_location(reid::find_peak(m));
  }
  const auto g = reid::render_gaussian({28, 28, 0.0}, 2.0, 56, 56);
  const double e_center = std::abs(g.at(28, 28) - 1.0);
  const double e_two = std::max(std::abs(g.at(28, 30) - std::exp(-0.5)),
                                std::abs(g.at(26, 28) - std::exp(-0.5)));
  Outcome o;
  o.pass = kept == 1000 && e_center <= 1e-9 && e_two <= 1e-9;
  o.detail = std::to_string(kept) + "/1000 argmax preserved; center err " + fmt("%.1e", e_center) +
             ", distance-2 err " + fmt("%.1e", e_two) + " (<= 1e-9)";
  return o;
}

std::vector<reid::FusionSample> separable_task(std::uint64_t seed) {
  // Two classes on either side of a random hyperplane through the origin,
  // margin >= 0.5 along its normal; 16-d inputs split 8 global + 8 local.
  reid::Rng rng(seed);
  std::vector<double> normal(16);
  double norm = 0;
  for (double& v : normal) {
    v = rng.normal();
    norm += v * v;
  }
  for (double& v : normal) v /= std::sqrt(norm);
  std::vector<reid::FusionSample> out;
  for (std::size_t label = 0; label < 2; ++label) {
    for (int i = 0; i < 200; ++i) {
      std::vector<double> x(16);
      double along = 0;
      for (std::size_t d = 0; d < 16; ++d) {
        x[d] = rng.normal();
        along += x[d] * normal[d];
      }
      const double target = (label == 0 ? 1.0 : -1.0) * (0.5 + std::abs(rng.normal()));
      for (std::size_t d = 0; d < 16; ++d) x[d] += (target - along) * normal[d];
      reid::FusionSample s;
      s.global.assign(x.begin(), x.begin() + 8);
      s.local.assign(x.begin() + 8, x.end());
      s.label = label;
      out.push_back(std::move(s));
    }
  }
  return out;
}

Outcome fusion_training() {
  const auto data = separable_task(2026);
  reid::FusionConfig c;  // default widths, learning rate, batch size and alpha
  c.global_dim = 8;
  c.local_dim = 8;
  c.num_classes = 2;
  c.epochs = 50;
  c.seed = 0;
  auto t0 = std::chrono::steady_clock::now();
  const auto a = reid::train(c, data);
  const double first_run = seconds_since(t0);
  t0 = std::chrono::steady_clock::now();
  const auto b = reid::train(c, data);
  const double second_run = seconds_since(t0);

  int reached = 0;
  for (std::size_t e = 0; e < a.history.epochs.size() && reached == 0; ++e) {
    if (a.history.epochs[e].accuracy >= 0.95) reached = static_cast<int>(e) + 1;
  }
  bool same = a.history.checksum == b.history.checksum &&
              a.history.initial_loss == b.history.initial_loss &&
              a.history.epochs.size() == b.history.epochs.size();
  for (std::size_t e = 0; same && e < a.history.epochs.size(); ++e) {
    same = a.history.epochs[e].loss == b.history.epochs[e].loss &&
           a.history.epochs[e].accuracy == b.history.epochs[e].accuracy;
  }
  const double epoch1 = a.history.epochs.front().loss;
  Outcome o;
  o.pass = reached > 0 && epoch1 < std::log(2.0) && same && first_run < 120.0 && second_run < 120.0;
  o.detail = "95% train accuracy at epoch " + std::to_string(reached) + " (<= 50), epoch-1 loss " +
             fmt("%.4f", epoch1) + " (< ln 2), rerun identical " + (same ? "yes" : "NO") + ", " +
             fmt("%.1f", first_run) + " s per run (< 120 s)";
  return o;
}

Outcome keypoint_metrics() {
  std::vector<reid::KeypointSample> exact(3);
  for (auto& s : exact) {
    for (int k = 0; k < 20; ++k) {
      s.truth.push_back({k * 2.0, 55.0 - k});
      s.visible.push_back(k % 4 != 0);
    }
    s.predicted = s.truth;
  }
  const double mse0 = reid::keypoint_mse(exact);
  const double prec0 = reid::keypoint_precision(exact, 1.0);
  const reid::KeypointSample off{{{13, 14}}, {{10, 10}}, {true}};
  const std::vector<reid::KeypointSample> single = {off};
  const double native = reid::keypoint_mse(single);
  const double scaled = reid::keypoint_scaled_error(off);
  const double p3 = reid::keypoint_precision(single, 3.0);
  const double p5 = reid::keypoint_precision(single, 5.0);
  Outcome o;
  o.pass = mse0 == 0.0 && prec0 == 1.0 && std::abs(native - 5.0) <= 1e-12 &&
           std::abs(scaled - 4.2857) <= 5e-5 && p3 == 0.0 && p5 == 1.0;
  o.detail = "zero-error mse " + fmt("%g", mse0) + " precision " + fmt("%g", prec0) +
             "; (3,4) offset " + fmt("%.4f", native) + " px native, " + fmt("%.4f", scaled) +
             " at 48/56, correct@3=" + fmt("%g", p3) + " correct@5=" + fmt("%g", p5);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"gradient correctness", gradient_correctness},
      {"closed-form loss values", closed_form_losses},
      {"orientation group key-point table", table_fidelity},
      {"selection scale invariance", selection_invariance},
      {"metric oracles", metric_oracles},
      {"vehicleid protocol fidelity", protocol_fidelity},
      {"re-ranking", reranking},
      {"heatmap ops", heatmap_ops},
      {"fusion training", fusion_training},
      {"key-point metrics", keypoint_metrics},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("[%s] %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
