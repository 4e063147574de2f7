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

// Central finite-difference verification of analytic gradients, plus the
// seeded suite that checks every objective and the fusion MLP.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace reid {

using ScalarFunction = std::function<double(std::span<const double>)>;

// A named contiguous slice of the flat parameter vector.
struct ParamBlock {
  std::string name;
  std::size_t offset = 0;
  std::size_t size = 0;
};

struct BlockError {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;  // absolute index into theta
  double analytic = 0.0;
  double numeric = 0.0;
};

struct GradReport {
  std::vector<BlockError> blocks;
  double step = 0.0;
  double tolerance = 0.0;
  double max_rel_error = 0.0;
  bool passed = false;
};

// |a - n| / max(|a|, |n|, 1e-8)
double relative_error(double analytic, double numeric);

// Numeric gradient (f(theta + h e_i) - f(theta - h e_i)) / 2h per coordinate,
// compared with `analytic`. An empty block list checks theta as one block
// named "theta". Throws NonFiniteError if f returns a non-finite value and
// InvalidArgument for step <= 0.
GradReport finite_diff_check(const ScalarFunction& f, std::span<const double> theta,
                             std::span<const double> analytic,
                             std::span<const ParamBlock> blocks = {}, double step = 1e-5,
                             double tolerance = 1e-4);

struct GradCaseResult {
  std::string name;
  std::size_t trials = 0;
  std::size_t failures = 0;
  double max_rel_error = 0.0;
  std::string worst_block;
};

struct GradSuiteResult {
  std::vector<GradCaseResult> cases;
  double step = 0.0;
  double tolerance = 0.0;
  bool passed() const;
};

// Runs `trials` seeded random instances of: l2softmax, pixel_ce, heatmap_mse,
// orientation_ce, stage2 and fusion_mlp.
GradSuiteResult run_gradcheck_suite(std::size_t trials, double step, double tolerance,
                                    std::uint64_t seed);

// key=value lines, one block per case.
std::string format_grad_suite(const GradSuiteResult& result);

}  // namespace reid
