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
#include "linklab/evaluator.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <unordered_set>

#include "linklab/embedding_io.hpp"
#include "linklab/error.hpp"
#include "linklab/windows.hpp"

namespace linklab {

std::string_view to_string(KbMode mode) {
  switch (mode) {
    case KbMode::kDescriptions:
      return "descriptions";
    case KbMode::kContexts:
      return "contexts";
    case KbMode::kBoth:
      return "both";
  }
  return "descriptions";
}

KbMode parse_kb_mode(std::string_view text) {
  if (text == "descriptions") return KbMode::kDescriptions;
  if (text == "contexts") return KbMode::kContexts;
  if (text == "both") return KbMode::kBoth;
  throw ArgumentError("unknown kb_mode '" + std::string(text) + "'");
}

std::string format_report(const EvalReport& report) {
  std::string out;
  for (const auto& [k, recall] : report.recalls) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", recall);
    out += report.language + '\t' + std::string(to_string(report.kb_mode)) + '\t' +
           std::to_string(k) + '\t' + buf + '\t' + std::to_string(report.n_mentions) + '\n';
  }
  return out;
}

EvalReport parse_report(std::string_view tsv) {
  EvalReport report;
  std::size_t line_no = 0;
  while (!tsv.empty()) {
    const auto nl = tsv.find('\n');
    const std::string line(tsv.substr(0, nl));
    tsv = nl == std::string_view::npos ? std::string_view{} : tsv.substr(nl + 1);
    if (line.empty()) continue;
    ++line_no;
    std::vector<std::string> fields;
    std::size_t pos = 0;
    for (;;) {
      const auto tab = line.find('\t', pos);
      fields.push_back(line.substr(pos, tab - pos));
      if (tab == std::string::npos) break;
      pos = tab + 1;
    }
    if (fields.size() != 5) throw FormatError("report line " + std::to_string(line_no) + ": expected 5 fields");
    const KbMode mode = parse_kb_mode(fields[1]);
    std::size_t k = 0;
    std::size_t n = 0;
    double recall = 0.0;
    const auto parse = [&](const std::string& f, auto& v) {
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc{} || ptr != f.data() + f.size()) {
        throw FormatError("report line " + std::to_string(line_no) + ": bad number '" + f + "'");
      }
    };
    parse(fields[2], k);
    parse(fields[3], recall);
    parse(fields[4], n);
    if (line_no > 1 && (fields[0] != report.language || mode != report.kb_mode || n != report.n_mentions)) {
      throw FormatError("report mixes languages, modes or mention counts");
    }
    report.language = fields[0];
    report.kb_mode = mode;
    report.n_mentions = n;
    report.recalls[k] = recall;
  }
  if (report.recalls.empty()) throw FormatError("empty report");
  return report;
}

std::vector<Qid> distinct_prefix(const std::vector<Qid>& ranked, std::size_t k) {
  std::vector<Qid> out;
  std::unordered_set<Qid> seen;
  for (Qid q : ranked) {
    if (out.size() == k) break;
    if (seen.insert(q).second) out.push_back(q);
  }
  return out;
}

double recall_at_k(const std::vector<std::vector<Qid>>& ranked, const std::vector<Qid>& golds,
                   std::size_t k) {
  if (golds.empty()) throw DomainError("R@K over an empty mention set");
  if (ranked.size() != golds.size()) throw ArgumentError("ranked lists and golds are not aligned");
  if (k < 1) throw ArgumentError("R@K needs K >= 1");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    const auto top = distinct_prefix(ranked[i], k);
    if (std::find(top.begin(), top.end(), golds[i]) != top.end()) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(golds.size());
}

std::vector<Qid> ranked_entities(const SearchIndex& index, const SearchIndex::Vector& query,
                                 std::size_t k, std::size_t probes) {
  const std::size_t n = index.size();
  std::size_t fetch = std::min(4 * k, n);
  for (;;) {
    const auto hits = index.search(query, fetch, probes);
    std::vector<Qid> qids;
    qids.reserve(hits.size());
    for (const auto& h : hits) qids.push_back(h.qid);
    auto top = distinct_prefix(qids, k);
    if (top.size() == k || fetch >= n) return top;
    fetch = std::min(2 * fetch, n);
  }
}

KbPopulation populate_kb(const std::map<Qid, Entity>& kb, const std::vector<Mention>* train_mentions,
                         KbMode mode, std::size_t context_size, const Vocabulary& vocab) {
  KbPopulation pop;
  if (mode == KbMode::kDescriptions || mode == KbMode::kBoth) {
    auto desc = prepare_descriptions(kb, context_size, vocab);
    pop.qids = std::move(desc.qids);
    pop.windows = std::move(desc.windows);
  }
  if (mode == KbMode::kContexts || mode == KbMode::kBoth) {
    if (train_mentions == nullptr) {
      throw ArgumentError(std::string("kb_mode ") + std::string(to_string(mode)) +
                          " needs training mentions");
    }
    auto ctx = prepare_mentions(*train_mentions, context_size, vocab);
    pop.qids.insert(pop.qids.end(), ctx.golds.begin(), ctx.golds.end());
    pop.windows.insert(pop.windows.end(), std::make_move_iterator(ctx.windows.begin()),
                       std::make_move_iterator(ctx.windows.end()));
  }
  if (pop.qids.empty()) throw ArgumentError("empty KB population");
  return pop;
}

EvalReport evaluate_index(const EncoderParams<double>& params, const SearchIndex& index,
                          const std::vector<Mention>& eval, const EvalConfig& cfg,
                          const Vocabulary& vocab) {
  if (cfg.ks.empty()) throw ArgumentError("no K values requested");
  if (eval.empty()) throw DomainError("evaluation over an empty mention set");
  const std::size_t max_k = *std::max_element(cfg.ks.begin(), cfg.ks.end());

  const auto prepared = prepare_mentions(eval, cfg.context_size, vocab);
  const auto queries = embed(params, to_token_block(prepared.windows));
  std::vector<std::vector<Qid>> ranked(eval.size());
  for (Eigen::Index i = 0; i < queries.rows(); ++i) {
    ranked[static_cast<std::size_t>(i)] = ranked_entities(index, queries.row(i), max_k, cfg.probes);
  }

  EvalReport report;
  report.language = eval.front().language;
  report.kb_mode = cfg.kb_mode;
  report.n_mentions = eval.size();
  report.kb_size = index.size();
  for (std::size_t k : cfg.ks) report.recalls[k] = recall_at_k(ranked, prepared.golds, k);
  return report;
}

EvalReport evaluate(const EncoderParams<double>& params, const std::map<Qid, Entity>& kb,
                    const std::vector<Mention>& eval, const std::vector<Mention>* train_mentions,
                    const EvalConfig& cfg, const Vocabulary& vocab) {
  auto pop = populate_kb(kb, train_mentions, cfg.kb_mode, cfg.context_size, vocab);
  auto vectors = embed(params, to_token_block(pop.windows));
  const std::size_t parts = std::min(cfg.n_partitions, pop.qids.size());
  const auto index = SearchIndex::build(std::move(vectors), std::move(pop.qids), std::move(pop.windows),
                                        parts, cfg.seed, std::min(cfg.probes, parts));
  return evaluate_index(params, index, eval, cfg, vocab);
}

}  // namespace linklab
