// Copyright 2026-present the linklab project
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
#include "linklab/config.hpp"

#include <charconv>
#include <functional>

namespace linklab {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_value(const std::string& key, std::string_view text) {
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw FormatError("config key '" + key + "': cannot parse '" + std::string(text) + "'");
  }
  return v;
}

std::vector<std::size_t> parse_list(const std::string& key, std::string_view text) {
  std::vector<std::size_t> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    out.push_back(parse_value<std::size_t>(key, trim(text.substr(0, comma))));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

std::string show(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

using Setter = std::function<void(TrainConfig&, const std::string&, std::string_view)>;

template <typename T>
Setter field(T TrainConfig::*member) {
  return [member](TrainConfig& cfg, const std::string& key, std::string_view v) {
    cfg.*member = parse_value<T>(key, v);
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"batch_size", field(&TrainConfig::batch_size)},
      {"neg", field(&TrainConfig::neg)},
      {"context_size", field(&TrainConfig::context_size)},
      {"logit_multiplier", field(&TrainConfig::logit_multiplier)},
      {"lr", field(&TrainConfig::lr)},
      {"beta1", field(&TrainConfig::beta1)},
      {"beta2", field(&TrainConfig::beta2)},
      {"eps", field(&TrainConfig::eps)},
      {"decay", field(&TrainConfig::decay)},
      {"steps_round1", field(&TrainConfig::steps_round1)},
      {"steps_later", field(&TrainConfig::steps_later)},
      {"rounds", field(&TrainConfig::rounds)},
      {"n_partitions", field(&TrainConfig::n_partitions)},
      {"default_probes", field(&TrainConfig::default_probes)},
      {"retrieval_k", field(&TrainConfig::retrieval_k)},
      {"seed", field(&TrainConfig::seed)},
      {"vocab_size", field(&TrainConfig::vocab_size)},
      {"dim", field(&TrainConfig::dim)},
      {"eval_kb_mode",
       [](TrainConfig& cfg, const std::string&, std::string_view v) { cfg.eval_kb_mode = parse_kb_mode(v); }},
      {"eval_ks",
       [](TrainConfig& cfg, const std::string& key, std::string_view v) { cfg.eval_ks = parse_list(key, v); }},
  };
  return table;
}

}  // namespace

ConfigMap parse_config(std::string_view text) {
  ConfigMap out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw FormatError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    out[std::string(trim(line.substr(0, eq)))] = std::string(trim(line.substr(eq + 1)));
  }
  return out;
}

std::pair<std::string, std::string> parse_override(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw FormatError("override '" + std::string(text) + "' is not key=value");
  }
  return {std::string(trim(text.substr(0, eq))), std::string(trim(text.substr(eq + 1)))};
}

void apply_config(TrainConfig& cfg, const ConfigMap& values, const std::set<std::string>& extra_keys) {
  std::string unknown;
  for (const auto& [key, value] : values) {
    if (key != "preset" && !setters().contains(key) && !extra_keys.contains(key)) {
      unknown += unknown.empty() ? key : ", " + key;
    }
  }
  if (!unknown.empty()) throw UnknownKeyError("unknown config key(s): " + unknown);

  if (auto it = values.find("preset"); it != values.end()) {
    if (it->second == "final_round") {
      cfg.decay = 0.998;
    } else if (it->second != "default") {
      throw ArgumentError("unknown preset '" + it->second + "'");
    }
  }
  for (const auto& [key, value] : values) {
    if (auto s = setters().find(key); s != setters().end()) s->second(cfg, key, value);
  }
}

ConfigMap describe(const TrainConfig& cfg) {
  std::string ks;
  for (auto k : cfg.eval_ks) ks += (ks.empty() ? "" : ",") + std::to_string(k);
  return {
      {"batch_size", std::to_string(cfg.batch_size)},
      {"neg", std::to_string(cfg.neg)},
      {"context_size", std::to_string(cfg.context_size)},
      {"logit_multiplier", show(cfg.logit_multiplier)},
      {"lr", show(cfg.lr)},
      {"beta1", show(cfg.beta1)},
      {"beta2", show(cfg.beta2)},
      {"eps", show(cfg.eps)},
      {"decay", show(cfg.decay)},
      {"steps_round1", std::to_string(cfg.steps_round1)},
      {"steps_later", std::to_string(cfg.steps_later)},
      {"rounds", std::to_string(cfg.rounds)},
      {"n_partitions", std::to_string(cfg.n_partitions)},
      {"default_probes", std::to_string(cfg.default_probes)},
      {"retrieval_k", std::to_string(cfg.retrieval_k)},
      {"seed", std::to_string(cfg.seed)},
      {"vocab_size", std::to_string(cfg.vocab_size)},
      {"dim", std::to_string(cfg.dim)},
      {"eval_kb_mode", std::string(to_string(cfg.eval_kb_mode))},
      {"eval_ks", ks},
  };
}

}  // namespace linklab
