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

#include "reid/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "reid/error.hpp"
#include "reid/fusion.hpp"
#include "reid/losses.hpp"
#include "reid/random.hpp"

namespace reid {

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

GradReport finite_diff_check(const ScalarFunction& f, std::span<const double> theta,
                             std::span<const double> analytic, std::span<const ParamBlock> blocks,
                             double step, double tolerance) {
  if (!(step > 0.0)) throw InvalidArgument("finite_diff_check: step must be positive");
  if (analytic.size() != theta.size()) {
    throw DimensionError("finite_diff_check: gradient size does not match parameters");
  }
  std::vector<ParamBlock> layout(blocks.begin(), blocks.end());
  if (layout.empty()) layout.push_back(ParamBlock{"theta", 0, theta.size()});

  GradReport report;
  report.step = step;
  report.tolerance = tolerance;
  std::vector<double> probe(theta.begin(), theta.end());
  auto eval = [&f, &probe] {
    const double v = f(probe);
    if (!std::isfinite(v)) throw NonFiniteError("finite_diff_check: loss is not finite");
    return v;
  };

  for (const auto& block : layout) {
    if (block.offset + block.size > theta.size()) {
      throw DimensionError("finite_diff_check: block '" + block.name + "' exceeds parameters");
    }
    BlockError err{block.name, 0.0, block.offset, 0.0, 0.0};
    for (std::size_t i = block.offset; i < block.offset + block.size; ++i) {
      const double saved = probe[i];
      probe[i] = saved + step;
      const double plus = eval();
      probe[i] = saved - step;
      const double minus = eval();
      probe[i] = saved;
      const double numeric = (plus - minus) / (2.0 * step);
      const double rel = relative_error(analytic[i], numeric);
      if (rel > err.max_rel_error || i == block.offset) {
        err.max_rel_error = std::max(rel, err.max_rel_error);
        err.worst_index = i;
        err.analytic = analytic[i];
        err.numeric = numeric;
      }
    }
    report.max_rel_error = std::max(report.max_rel_error, err.max_rel_error);
    report.blocks.push_back(std::move(err));
  }
  report.passed = report.max_rel_error < tolerance;
  return report;
}

bool GradSuiteResult::passed() const {
  return std::ranges::all_of(cases, [](const GradCaseResult& c) { return c.failures == 0; });
}

namespace {

std::vector<double> normals(Rng& rng, std::size_t n, double scale) {
  std::vector<double> v(n);
  for (double& x : v) x = scale * rng.normal();
  return v;
}

void record(GradCaseResult& result, const GradReport& report) {
  ++result.trials;
  if (!report.passed) ++result.failures;
  for (const auto& b : report.blocks) {
    if (b.max_rel_error >= result.max_rel_error) {
      result.max_rel_error = b.max_rel_error;
      result.worst_block = b.name;
    }
  }
}

std::vector<double> concat(std::initializer_list<std::span<const double>> parts) {
  std::vector<double> out;
  for (auto p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

GradReport check_l2softmax(Rng& rng, double step, double tol) {
  constexpr std::size_t kClasses = 5;
  constexpr std::size_t kDim = 8;
  L2SoftmaxParams params{Matrix(kClasses, kDim, normals(rng, kClasses * kDim, 0.5)),
                         normals(rng, kClasses, 0.1), rng.uniform(1.0, 4.0)};
  const auto x = normals(rng, kDim, 1.0);
  const auto label = static_cast<std::size_t>(rng.uniform_below(kClasses));

  const auto g = l2softmax_grad(x, label, params);
  const auto theta = concat({x, params.weights.data(), params.bias, std::span(&params.alpha, 1)});
  const auto analytic =
      concat({g.d_input, g.d_weights.data(), g.d_bias, std::span(&g.d_alpha, 1)});
  const ParamBlock blocks[] = {{"x", 0, kDim},
                               {"W", kDim, kClasses * kDim},
                               {"b", kDim + kClasses * kDim, kClasses},
                               {"alpha", kDim + kClasses * kDim + kClasses, 1}};
  auto f = [&](std::span<const double> t) {
    L2SoftmaxParams p{Matrix(kClasses, kDim, std::vector<double>(t.begin() + kDim,
                                                                 t.begin() + kDim + kClasses * kDim)),
                      std::vector<double>(t.begin() + kDim + kClasses * kDim, t.end() - 1),
                      t.back()};
    return l2softmax_loss(t.first(kDim), label, p);
  };
  return finite_diff_check(f, theta, analytic, blocks, step, tol);
}

GradReport check_pixel_ce(Rng& rng, double step, double tol) {
  constexpr std::size_t kClasses = 21, kH = 4, kW = 4;
  HeatmapStack logits(kClasses, kH, kW, normals(rng, kClasses * kH * kW, 1.0));
  PixelTarget target{kH, kW, std::vector<int>(kH * kW)};
  for (int& t : target.labels) t = static_cast<int>(rng.uniform_below(kClasses));
  const auto g = pixel_ce_loss(logits, target);
  auto f = [&](std::span<const double> t) {
    return pixel_ce_loss(HeatmapStack(kClasses, kH, kW, std::vector<double>(t.begin(), t.end())),
                         target)
        .loss;
  };
  const ParamBlock blocks[] = {{"logits", 0, logits.values().size()}};
  return finite_diff_check(f, logits.values(), g.grad, blocks, step, tol);
}

// Ground truth offset from the prediction by at least 0.05 per pixel, so no
// gradient component sits at zero where relative error is ill-conditioned.
std::pair<HeatmapStack, HeatmapStack> heatmap_pair(Rng& rng, std::size_t h, std::size_t w) {
  HeatmapStack pred(kNumKeypoints, h, w);
  HeatmapStack gt(kNumKeypoints, h, w);
  for (std::size_t i = 0; i < pred.values().size(); ++i) {
    pred.values()[i] = rng.uniform01();
    const double offset = rng.uniform(0.05, 0.5);
    gt.values()[i] = pred.values()[i] + (rng.uniform01() < 0.5 ? -offset : offset);
  }
  return {std::move(pred), std::move(gt)};
}

GradReport check_heatmap_mse(Rng& rng, double step, double tol) {
  constexpr std::size_t kH = 4, kW = 4;
  auto [pred, gt] = heatmap_pair(rng, kH, kW);
  const auto g = heatmap_mse_loss(pred, gt);
  const std::size_t n = pred.values().size();
  std::vector<double> d_gt(g.grad);
  for (double& v : d_gt) v = -v;
  const auto theta = concat({pred.values(), gt.values()});
  const auto analytic = concat({g.grad, d_gt});
  const ParamBlock blocks[] = {{"pred", 0, n}, {"gt", n, n}};
  auto f = [&](std::span<const double> t) {
    return heatmap_mse_loss(
               HeatmapStack(kNumKeypoints, kH, kW, std::vector<double>(t.begin(), t.begin() + n)),
               HeatmapStack(kNumKeypoints, kH, kW, std::vector<double>(t.begin() + n, t.end())))
        .loss;
  };
  return finite_diff_check(f, theta, analytic, blocks, step, tol);
}

GradReport check_orientation_ce(Rng& rng, double step, double tol) {
  const auto logits = normals(rng, kNumOrientations, 2.0);
  const int target = static_cast<int>(rng.uniform_below(kNumOrientations));
  const auto g = orientation_ce_loss(logits, target);
  auto f = [&](std::span<const double> t) { return orientation_ce_loss(t, target).loss; };
  const ParamBlock blocks[] = {{"logits", 0, kNumOrientations}};
  return finite_diff_check(f, logits, g.grad, blocks, step, tol);
}

GradReport check_stage2(Rng& rng, double step, double tol) {
  constexpr std::size_t kH = 4, kW = 4;
  auto [pred, gt] = heatmap_pair(rng, kH, kW);
  const auto logits = normals(rng, kNumOrientations, 2.0);
  const int target = static_cast<int>(rng.uniform_below(kNumOrientations));
  const auto g = stage2_loss(pred, gt, logits, target);
  const std::size_t n = pred.values().size();
  const auto theta = concat({pred.values(), logits});
  const auto analytic = concat({g.heatmap_grad, g.logit_grad});
  const ParamBlock blocks[] = {{"pred", 0, n}, {"logits", n, kNumOrientations}};
  auto f = [&](std::span<const double> t) {
    return stage2_loss(
               HeatmapStack(kNumKeypoints, kH, kW, std::vector<double>(t.begin(), t.begin() + n)),
               gt, t.subspan(n), target)
        .total;
  };
  return finite_diff_check(f, theta, analytic, blocks, step, tol);
}

// Random small head evaluated at a point away from every ReLU kink: all
// pre-activations satisfy |z| >= 1e-3, far beyond the finite-difference step.
GradReport check_fusion(Rng& rng, double step, double tol) {
  FusionConfig config;
  config.global_dim = 6;
  config.local_dim = 4;
  config.hidden = {8, 5};
  config.num_classes = 3;
  config.seed = rng.next();

  for (;;) {
    FusionHead head = FusionHead::initialize(config);
    auto params = head.parameters();
    // Non-trivial biases and alpha.
    std::size_t cursor = 0;
    for (const auto& layer : head.layers()) {
      cursor += layer.weights.size();
      for (std::size_t i = 0; i < layer.bias.size(); ++i) params[cursor + i] = 0.1 * rng.normal();
      cursor += layer.bias.size();
    }
    cursor += head.classifier().weights.size();
    for (std::size_t i = 0; i < config.num_classes; ++i) params[cursor + i] = 0.1 * rng.normal();
    params.back() = rng.uniform(1.0, 4.0);
    head.set_parameters(params);

    const auto input = normals(rng, config.input_dim(), 1.0);
    const auto label = static_cast<std::size_t>(rng.uniform_below(config.num_classes));
    const auto cache = forward(head, input);
    bool near_kink = false;
    for (const auto& z : cache.pre_activations) {
      for (double v : z) near_kink = near_kink || std::abs(v) < 1e-3;
    }
    const auto e = cache.embedding();
    const bool dead = std::ranges::all_of(e, [](double v) { return v == 0.0; });
    if (near_kink || dead) continue;

    const auto g = backward(head, cache, label);
    std::vector<ParamBlock> blocks;
    cursor = 0;
    for (std::size_t l = 0; l < head.layers().size(); ++l) {
      const auto& layer = head.layers()[l];
      blocks.push_back({"W" + std::to_string(l), cursor, layer.weights.size()});
      cursor += layer.weights.size();
      blocks.push_back({"b" + std::to_string(l), cursor, layer.bias.size()});
      cursor += layer.bias.size();
    }
    blocks.push_back({"W_cls", cursor, head.classifier().weights.size()});
    cursor += head.classifier().weights.size();
    blocks.push_back({"b_cls", cursor, config.num_classes});
    cursor += config.num_classes;
    blocks.push_back({"alpha", cursor, 1});

    FusionHead probe = head;
    auto f = [&](std::span<const double> t) {
      probe.set_parameters(t);
      return sample_loss(probe, input, label);
    };
    return finite_diff_check(f, params, g.flat, blocks, step, tol);
  }
}

}  // namespace

GradSuiteResult run_gradcheck_suite(std::size_t trials, double step, double tolerance,
                                    std::uint64_t seed) {
  using Checker = GradReport (*)(Rng&, double, double);
  const std::pair<const char*, Checker> cases[] = {
      {"l2softmax", check_l2softmax},       {"pixel_ce", check_pixel_ce},
      {"heatmap_mse", check_heatmap_mse},   {"orientation_ce", check_orientation_ce},
      {"stage2", check_stage2},             {"fusion_mlp", check_fusion},
  };
  GradSuiteResult result;
  result.step = step;
  result.tolerance = tolerance;
  const auto seeds = derive_seeds(seed, std::size(cases));
  for (std::size_t c = 0; c < std::size(cases); ++c) {
    GradCaseResult cr;
    cr.name = cases[c].first;
    Rng rng(seeds[c]);
    for (std::size_t t = 0; t < trials; ++t) record(cr, cases[c].second(rng, step, tolerance));
    result.cases.push_back(std::move(cr));
  }
  return result;
}

std::string format_grad_suite(const GradSuiteResult& result) {
  std::ostringstream out;
  out.precision(6);
  out << "step=" << result.step << "\n";
  out << "tolerance=" << result.tolerance << "\n";
  for (const auto& c : result.cases) {
    out << "[" << c.name << "]\n";
    out << "trials=" << c.trials << "\n";
    out << "failures=" << c.failures << "\n";
    out << "max_rel_error=" << std::scientific << c.max_rel_error << std::defaultfloat << "\n";
    out << "worst_block=" << c.worst_block << "\n";
  }
  out << "status=" << (result.passed() ? "pass" : "fail") << "\n";
  return out.str();
}

}  // namespace reid
