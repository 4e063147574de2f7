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

#include "reid/cli.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "reid/blob_io.hpp"
#include "reid/error.hpp"
#include "reid/evaluation.hpp"
#include "reid/fusion.hpp"
#include "reid/gradcheck.hpp"
#include "reid/heatmaps.hpp"
#include "reid/manifest.hpp"
#include "reid/orientation.hpp"
#include "reid/retrieval.hpp"

namespace reid {
namespace {

// Check failures that are not data errors (gradcheck, etc.).
struct CheckFailed {};

std::string fmt(double v, const char* pattern = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

std::string join_ints(std::span<const int> v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    out << text;
  } else {
    write_text(out_path, text);
  }
}

std::array<double, kNumOrientations> to_array8(const std::vector<double>& v, const char* what) {
  if (v.size() != kNumOrientations) {
    throw InvalidArgument(std::string(what) + " needs exactly 8 comma-separated values");
  }
  std::array<double, kNumOrientations> a{};
  std::copy(v.begin(), v.end(), a.begin());
  return a;
}

std::string describe_selection(const OrientationLikelihood& lik) {
  const auto& group = select_group(lik);
  const auto scores = group_scores(lik);
  std::string line = "group=" + std::string(orientation_name(group.center)) +
                     " keypoints=" + join_ints(group.keypoints) + " scores=";
  for (std::size_t g = 0; g < scores.size(); ++g) line += (g ? "," : "") + fmt(scores[g]);
  return line;
}

// ---------------------------------------------------------------- select-keypoints

struct SelectOptions {
  std::vector<double> probs;
  std::vector<double> logits;
  std::string heatmap;
  std::string out;
  std::string manifest;
  std::string out_dir;
  double sigma = kDefaultDilationSigma;
};

void run_select(const SelectOptions& o, std::ostream& out) {
  if (!o.manifest.empty()) {
    const auto m = load_manifest(o.manifest);
    const auto records = load_embeddings(m);
    if (!o.out_dir.empty()) std::filesystem::create_directories(o.out_dir);
    for (std::size_t i = 0; i < m.records.size(); ++i) {
      if (!records[i].orientation) {
        throw FormatError("record " + m.records[i].image_id + " has no orientation likelihood");
      }
      out << "image=" << m.records[i].image_id << " " << describe_selection(*records[i].orientation);
      if (!o.out_dir.empty() && m.records[i].heatmap) {
        const auto& group = select_group(*records[i].orientation);
        const auto stack = stack_selected(load_heatmap(m, m.records[i]), group.keypoints, o.sigma);
        const std::string name = std::to_string(i) + ".hmap";
        write_file(std::filesystem::path(o.out_dir) / name, encode_heatmap(stack));
        out << " stack=" << name;
      }
      out << "\n";
    }
    return;
  }

  if (o.probs.empty() == o.logits.empty()) {
    throw InvalidArgument("select-keypoints: give exactly one of --probs, --logits or --manifest");
  }
  const auto lik = o.probs.empty()
                       ? OrientationLikelihood::from_logits(to_array8(o.logits, "--logits"))
                       : OrientationLikelihood::from_weights(to_array8(o.probs, "--probs"));
  out << describe_selection(lik) << "\n";
  if (!o.heatmap.empty()) {
    if (o.out.empty()) throw InvalidArgument("select-keypoints: --heatmap requires --out");
    const auto stack = decode_heatmap(read_file(o.heatmap));
    write_file(o.out, encode_heatmap(stack_selected(stack, select_group(lik).keypoints, o.sigma)));
  }
}

// ---------------------------------------------------------------- evaluate

struct EvaluateOptions {
  std::string protocol = "veri";
  std::string query;
  std::string test;
  std::string model;
  bool rerank = false;
  RerankParams rerank_params;
  std::size_t trials = 10;
  std::uint64_t seed = 0;
  std::size_t cmc_depth = kDefaultCmcDepth;
  std::string out;
};

std::vector<EmbeddingRecord> records_for(const std::string& path, const FusionHead* head) {
  const auto m = load_manifest(path);
  auto records = load_embeddings(m);
  if (head == nullptr) return records;
  const auto samples = load_fusion_samples(m);
  for (std::size_t i = 0; i < records.size(); ++i) {
    records[i].feature = embed(*head, samples[i].global, samples[i].local);
  }
  return records;
}

void run_evaluate(const EvaluateOptions& o, std::ostream& out) {
  std::optional<FusionHead> head;
  if (!o.model.empty()) head = decode_fusion_checkpoint(read_file(o.model));
  const FusionHead* h = head ? &*head : nullptr;

  EvalReport report;
  if (o.protocol == "veri") {
    if (o.query.empty()) throw InvalidArgument("evaluate: veri protocol needs --query");
    const auto queries = records_for(o.query, h);
    const auto test = records_for(o.test, h);
    VeriOptions vo;
    vo.use_rerank = o.rerank;
    vo.rerank = o.rerank_params;
    vo.cmc_depth = o.cmc_depth;
    report = evaluate_veri(queries, test, vo);
  } else {
    VehicleIdOptions vo;
    vo.trials = o.trials;
    vo.seed = o.seed;
    vo.cmc_depth = o.cmc_depth;
    report = evaluate_vehicleid(records_for(o.test, h), vo);
  }
  emit(format_eval_report(report), o.out, out);
}

// ---------------------------------------------------------------- rerank

struct RerankOptions {
  std::string in;
  std::string out;
  RerankParams params;
  std::optional<std::size_t> num_query;
};

void run_rerank(const RerankOptions& o, std::ostream& out) {
  const Matrix all = decode_distance(read_file(o.in));
  const Matrix result = o.num_query ? rerank(all, *o.num_query, o.params).values
                                    : rerank_all_pairs(all, o.params);
  write_file(o.out, encode_distance(result));
  out << "rows=" << result.rows() << "\ncols=" << result.cols() << "\nk1=" << o.params.k1
      << "\nk2=" << o.params.k2 << "\nlambda=" << fmt(o.params.lambda) << "\n";
}

// ---------------------------------------------------------------- gradcheck

struct GradcheckOptions {
  std::size_t trials = 100;
  double step = 1e-5;
  double tolerance = 1e-4;
  std::uint64_t seed = 0;
};

void run_gradcheck(const GradcheckOptions& o, std::ostream& out) {
  const auto result = run_gradcheck_suite(o.trials, o.step, o.tolerance, o.seed);
  out << format_grad_suite(result);
  if (!result.passed()) throw CheckFailed{};
}

// ---------------------------------------------------------------- train-fusion

struct TrainOptions {
  std::string manifest;
  std::string out;
  std::string history;
  std::vector<std::size_t> hidden = {1024, 512};
  double learning_rate = 1e-4;
  std::size_t batch_size = 150;
  std::size_t epochs = 20;
  std::uint64_t seed = 0;
  double alpha = kDefaultAlpha;
};

void run_train(const TrainOptions& o, std::ostream& out) {
  const auto m = load_manifest(o.manifest);
  std::size_t classes = 0;
  const auto samples = load_fusion_samples(m, &classes);
  FusionConfig c;
  c.global_dim = m.feature_dim;
  c.local_dim = m.local_dim;
  c.hidden = o.hidden;
  c.num_classes = classes;
  c.learning_rate = o.learning_rate;
  c.batch_size = o.batch_size;
  c.epochs = o.epochs;
  c.seed = o.seed;
  c.alpha_init = o.alpha;
  const auto result = train(c, samples);

  std::ostringstream hist;
  hist << "initial_loss=" << fmt(result.history.initial_loss, "%.9g") << "\n";
  for (std::size_t e = 0; e < result.history.epochs.size(); ++e) {
    hist << "epoch=" << (e + 1) << " loss=" << fmt(result.history.epochs[e].loss, "%.9g")
         << " accuracy=" << fmt(result.history.epochs[e].accuracy) << "\n";
  }
  char checksum[32];
  std::snprintf(checksum, sizeof(checksum), "%016llx",
                static_cast<unsigned long long>(result.history.checksum));
  hist << "checksum=" << checksum << "\n";
  write_file(o.out, encode_fusion_checkpoint(result.head));
  emit(hist.str(), o.history, out);
}

// ---------------------------------------------------------------- kp-metrics

struct KpOptions {
  std::string manifest;
  std::vector<double> r0 = {1, 2, 3, 4, 5, 6, 7, 8};
};

void run_kp_metrics(const KpOptions& o, std::ostream& out) {
  const auto m = load_manifest(o.manifest);
  std::vector<KeypointSample> samples;
  for (const auto& r : m.records) {
    if (!r.heatmap || !r.keypoints) continue;
    const auto stack = foreground(load_heatmap(m, r));
    const auto truth = load_keypoints(m.resolve(*r.keypoints));
    KeypointSample s;
    s.truth = truth.points;
    s.visible = truth.visible;
    for (std::size_t k = 0; k < kNumKeypoints; ++k) {
      const auto peak = find_peak(stack.channel(k), stack.height(), stack.width());
      s.predicted.push_back(Keypoint{static_cast<double>(peak.x), static_cast<double>(peak.y)});
    }
    samples.push_back(std::move(s));
  }
  if (samples.empty()) throw FormatError("kp-metrics: no record has both heatmap and keypoints");
  const double native = static_cast<double>(m.heatmap->width);
  out << "images=" << samples.size() << "\n";
  out << "mse_px=" << fmt(keypoint_mse(samples, KeypointErrorMode::kMeanDistance)) << "\n";
  out << "mse_px2=" << fmt(keypoint_mse(samples, KeypointErrorMode::kMeanSquaredDistance)) << "\n";
  for (double r0 : o.r0) {
    out << "precision@" << fmt(r0, "%g") << "="
        << fmt(keypoint_precision(samples, r0, native, kThresholdMapSize)) << "\n";
  }
}

// ---------------------------------------------------------------- confusion

struct ConfusionOptions {
  std::string manifest;
  std::string pairs;
};

void run_confusion(const ConfusionOptions& o, std::ostream& out) {
  std::vector<int> truth, predicted;
  if (!o.manifest.empty()) {
    const auto m = load_manifest(o.manifest);
    const auto records = load_embeddings(m);
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (!m.records[i].orientation || !records[i].orientation) continue;
      truth.push_back(static_cast<int>(index_of(*m.records[i].orientation)));
      predicted.push_back(static_cast<int>(index_of(records[i].orientation->most_likely())));
    }
  } else if (!o.pairs.empty()) {
    const auto raw = read_file(o.pairs);
    std::istringstream in(std::string(raw.begin(), raw.end()));
    std::string t, p;
    while (in >> t >> p) {
      try {
        truth.push_back(static_cast<int>(index_of(parse_orientation(t))));
        predicted.push_back(static_cast<int>(index_of(parse_orientation(p))));
      } catch (const InvalidArgument& e) {
        throw FormatError(std::string("confusion pairs: ") + e.what());
      }
    }
  } else {
    throw InvalidArgument("confusion: give --manifest or --pairs");
  }
  const auto cm = confusion_matrix(predicted, truth);
  out << "# rows = ground truth, columns = predicted\n";
  out << "#";
  for (std::size_t j = 0; j < kNumOrientations; ++j) out << " " << orientation_name(orientation_from_index(static_cast<int>(j)));
  out << "\n";
  for (std::size_t i = 0; i < kNumOrientations; ++i) {
    out << orientation_name(orientation_from_index(static_cast<int>(i)));
    for (std::size_t j = 0; j < kNumOrientations; ++j) out << " " << cm.counts[i][j];
    out << "\n";
  }
  out << "total=" << cm.total << "\naccuracy=" << fmt(cm.accuracy) << "\n";
}

void add_rerank_flags(CLI::App* cmd, RerankParams& p) {
  cmd->add_option("--k1", p.k1, "k-reciprocal neighbourhood size")->capture_default_str();
  cmd->add_option("--k2", p.k2, "query-expansion neighbourhood size")->capture_default_str();
  cmd->add_option("--lambda", p.lambda, "weight of the original distance")->capture_default_str();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Vehicle re-identification toolkit"};
  app.require_subcommand(1);

  SelectOptions select;
  auto* sel = app.add_subcommand("select-keypoints",
                                 "orientation likelihood -> group, key-points, dilated stack");
  sel->add_option("--probs", select.probs, "8 likelihoods (front, right_front, ..., left_front)")
      ->delimiter(',');
  sel->add_option("--logits", select.logits, "8 raw orientation logits")->delimiter(',');
  sel->add_option("--heatmap", select.heatmap, "20/21-channel heatmap blob to select from");
  sel->add_option("--out", select.out, "output 7-channel heatmap blob");
  sel->add_option("--manifest", select.manifest, "process every record of a manifest");
  sel->add_option("--out-dir", select.out_dir, "directory for per-record stacks (manifest mode)");
  sel->add_option("--sigma", select.sigma, "Gaussian dilation sigma")->capture_default_str();

  EvaluateOptions evaluate;
  auto* ev = app.add_subcommand("evaluate", "run a retrieval protocol and print the report");
  ev->add_option("--protocol", evaluate.protocol)
      ->check(CLI::IsMember({"veri", "vehicleid"}))
      ->capture_default_str();
  ev->add_option("--query", evaluate.query, "query manifest (veri)");
  ev->add_option("--test", evaluate.test, "test manifest")->required();
  ev->add_option("--model", evaluate.model, "fusion checkpoint; embeds features+local first");
  ev->add_flag("--rerank", evaluate.rerank, "apply k-reciprocal re-ranking (veri)");
  add_rerank_flags(ev, evaluate.rerank_params);
  ev->add_option("--trials", evaluate.trials)->capture_default_str();
  ev->add_option("--seed", evaluate.seed)->capture_default_str();
  ev->add_option("--cmc-depth", evaluate.cmc_depth)->capture_default_str();
  ev->add_option("--out", evaluate.out, "write the report here instead of stdout");

  RerankOptions rr;
  auto* rc = app.add_subcommand("rerank", "re-rank a square all-pairs distance blob");
  rc->add_option("--in", rr.in, "RIDDIST1 all-pairs distances (queries first)")->required();
  rc->add_option("--out", rr.out, "RIDDIST1 output")->required();
  rc->add_option("--num-query", rr.num_query,
                 "emit only the query x gallery block (rows < Q, columns >= Q)");
  add_rerank_flags(rc, rr.params);

  GradcheckOptions gc;
  auto* gcc = app.add_subcommand("gradcheck", "finite-difference check of every gradient");
  gcc->set_help_flag("--help", "Print this help message and exit");
  gcc->add_option("--trials", gc.trials)->capture_default_str();
  gcc->add_option("--h", gc.step, "central-difference step")->capture_default_str();
  gcc->add_option("--tol", gc.tolerance, "max relative error")->capture_default_str();
  gcc->add_option("--seed", gc.seed)->capture_default_str();

  TrainOptions tr;
  auto* tc = app.add_subcommand("train-fusion", "train the fusion head on a manifest");
  tc->add_option("--manifest", tr.manifest)->required();
  tc->add_option("--out", tr.out, "checkpoint path")->required();
  tc->add_option("--history", tr.history, "history path (default stdout)");
  tc->add_option("--hidden", tr.hidden, "hidden widths")->delimiter(',')->capture_default_str();
  tc->add_option("--lr", tr.learning_rate)->capture_default_str();
  tc->add_option("--batch", tr.batch_size)->capture_default_str();
  tc->add_option("--epochs", tr.epochs)->capture_default_str();
  tc->add_option("--seed", tr.seed)->capture_default_str();
  tc->add_option("--alpha", tr.alpha, "initial L2-softmax radius")->capture_default_str();

  KpOptions kp;
  auto* kc = app.add_subcommand("kp-metrics", "key-point error and precision@r0 from heatmap peaks");
  kc->add_option("--manifest", kp.manifest)->required();
  kc->add_option("--r0", kp.r0, "thresholds in 48x48 pixels")->delimiter(',');

  ConfusionOptions cf;
  auto* cc = app.add_subcommand("confusion", "orientation confusion matrix");
  cc->add_option("--manifest", cf.manifest, "truth = orientation field, prediction = argmax");
  cc->add_option("--pairs", cf.pairs, "text file of '<truth> <predicted>' name pairs");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*sel) run_select(select, out);
    if (*ev) run_evaluate(evaluate, out);
    if (*rc) run_rerank(rr, out);
    if (*gcc) run_gradcheck(gc, out);
    if (*tc) run_train(tr, out);
    if (*kc) run_kp_metrics(kp, out);
    if (*cc) run_confusion(cf, out);
  } catch (const CheckFailed&) {
    return kExitCheckFailed;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error (" << category_name(e.category()) << "): " << e.what() << "\n";
    return kExitDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  }
  return kExitOk;
}

}  // namespace reid
