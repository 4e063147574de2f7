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

#include <cstdio>
#include <string>

#include "json.hpp"
#include "reid/evaluation.hpp"

namespace reid {
namespace {

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

std::string format_eval_report(const EvalReport& r) {
  std::string out;
  auto line = [&out](const std::string& key, const std::string& value) {
    out += key;
    out += '=';
    out += value;
    out += '\n';
  };
  line("protocol", std::string(protocol_name(r.protocol)));
  line("map", fixed6(r.mean_ap));
  line("cmc1", fixed6(r.cmc_at(1)));
  line("cmc5", fixed6(r.cmc_at(5)));
  line("num_queries", std::to_string(r.num_queries));
  line("excluded_queries", std::to_string(r.excluded_queries));
  line("trials", std::to_string(r.trials));
  line("seed", std::to_string(r.seed));
  line("rerank", r.rerank ? "on" : "off");
  if (r.rerank) {
    line("rerank_k1", std::to_string(r.rerank->k1));
    line("rerank_k2", std::to_string(r.rerank->k2));
    line("rerank_lambda", fixed6(r.rerank->lambda));
  }

  nlohmann::ordered_json j;
  j["protocol"] = protocol_name(r.protocol);
  j["map"] = r.mean_ap;
  j["cmc1"] = r.cmc_at(1);
  j["cmc5"] = r.cmc_at(5);
  j["cmc"] = r.cmc;
  j["num_queries"] = r.num_queries;
  j["excluded_queries"] = r.excluded_queries;
  j["trials"] = r.trials;
  j["seed"] = r.seed;
  if (r.rerank) {
    j["rerank"] = {{"k1", r.rerank->k1}, {"k2", r.rerank->k2}, {"lambda", r.rerank->lambda}};
  } else {
    j["rerank"] = nullptr;
  }
  j["trial_map"] = r.trial_map;
  auto trial_cmc = nlohmann::ordered_json::array();
  for (const auto& t : r.trial_cmc) trial_cmc.push_back({{"cmc1", t[0]}, {"cmc5", t[1]}});
  j["trial_cmc"] = trial_cmc;
  out += "[json]\n";
  out += j.dump();
  out += '\n';
  return out;
}

}  // namespace reid
