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
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "linklab/encoder.hpp"
#include "linklab/kb.hpp"
#include "linklab/tokenizer.hpp"
#include "linklab/vindex.hpp"

namespace linklab {

enum class KbMode { kDescriptions, kContexts, kBoth };

std::string_view to_string(KbMode mode);
/// Accepts "descriptions", "contexts", "both". Throws ArgumentError otherwise.
KbMode parse_kb_mode(std::string_view text);

struct EvalReport {
  std::string language;
  KbMode kb_mode = KbMode::kDescriptions;
  std::map<std::size_t, double> recalls;
  std::size_t n_mentions = 0;
  std::size_t kb_size = 0;

  double recall(std::size_t k) const { return recalls.at(k); }
  bool operator==(const EvalReport&) const = default;
};

/// `language<TAB>kb_mode<TAB>K<TAB>recall<TAB>n_mentions`, one line per K.
std::string format_report(const EvalReport& report);

// Inverse of format_report; kb_size is not part of the TSV and stays 0.
EvalReport parse_report(std::string_view tsv);

/// Fraction of mentions whose gold qid is among the first K distinct qids
/// of its ranked list. Throws DomainError on an empty mention set.
double recall_at_k(const std::vector<std::vector<Qid>>& ranked, const std::vector<Qid>& golds,
                   std::size_t k);

/// Truncates to the first `k` distinct qids, keeping first occurrences.
std::vector<Qid> distinct_prefix(const std::vector<Qid>& ranked, std::size_t k);

struct EvalConfig {
  std::vector<std::size_t> ks{1, 10};
  KbMode kb_mode = KbMode::kDescriptions;
  std::size_t context_size = 64;
  std::size_t n_partitions = 1;
  std::size_t probes = 1;
  std::uint64_t seed = 0;
};

/// Top `k` distinct entities for a query, over-fetching 4k rows and
/// doubling until enough distinct qids appear or the index is exhausted.
std::vector<Qid> ranked_entities(const SearchIndex& index, const SearchIndex::Vector& query,
                                 std::size_t k, std::size_t probes);

/// Index rows for the chosen KB population: entity descriptions, training
/// mention windows labeled with their gold entity, or both.
struct KbPopulation {
  std::vector<Qid> qids;
  std::vector<std::vector<TokenId>> windows;
};

KbPopulation populate_kb(const std::map<Qid, Entity>& kb, const std::vector<Mention>* train_mentions,
                         KbMode mode, std::size_t context_size, const Vocabulary& vocab);

/// Embeds `population` and evaluates `eval` against it.
EvalReport evaluate(const EncoderParams<double>& params, const std::map<Qid, Entity>& kb,
                    const std::vector<Mention>& eval, const std::vector<Mention>* train_mentions,
                    const EvalConfig& cfg, const Vocabulary& vocab);

/// Evaluates against a prebuilt index (e.g. from an embedding file).
EvalReport evaluate_index(const EncoderParams<double>& params, const SearchIndex& index,
                          const std::vector<Mention>& eval, const EvalConfig& cfg,
                          const Vocabulary& vocab);

}  // namespace linklab
