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
#include "linklab/alias_table.hpp"

#include <algorithm>
#include <charconv>
#include <unordered_map>

#include "linklab/error.hpp"
#include "linklab/unicode.hpp"

namespace linklab {

namespace {

bool ranked_before(const AliasCandidate& a, const AliasCandidate& b) {
  if (a.count != b.count) return a.count > b.count;
  return a.qid < b.qid;
}

}  // namespace

AliasTable::AliasTable(std::size_t k, bool cased) : k_(k), cased_(cased) {
  if (k < 1) throw ArgumentError("alias table K must be >= 1");
}

std::string AliasTable::key(std::string_view alias) const {
  return cased_ ? std::string(alias) : unicode::fold(alias);
}

const std::vector<AliasCandidate>* AliasTable::find(std::string_view alias) const {
  auto it = entries_.find(alias);
  return it == entries_.end() ? nullptr : &it->second;
}

void AliasTable::set(std::string alias, std::vector<AliasCandidate> ranked) {
  if (ranked.empty() || ranked.size() > k_) {
    throw FormatError("alias '" + alias + "' has " + std::to_string(ranked.size()) +
                      " candidates, expected 1.." + std::to_string(k_));
  }
  for (std::size_t i = 1; i < ranked.size(); ++i) {
    if (ranked[i - 1].count < ranked[i].count) {
      throw FormatError("alias '" + alias + "' candidates are not ranked by count");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (ranked[j].qid == ranked[i].qid) throw FormatError("alias '" + alias + "' repeats a qid");
    }
  }
  entries_.insert_or_assign(std::move(alias), std::move(ranked));
}

AliasTable build_alias_table(const std::vector<std::pair<std::string, Qid>>& pairs, std::size_t k,
                             bool cased) {
  AliasTable table(k, cased);
  std::map<std::string, std::unordered_map<Qid, std::size_t>> counts;
  for (const auto& [alias, qid] : pairs) {
    if (alias.empty()) throw ArgumentError("empty alias in training pairs");
    ++counts[table.key(alias)][qid];
  }
  for (auto& [alias, per_qid] : counts) {
    std::vector<AliasCandidate> ranked;
    ranked.reserve(per_qid.size());
    for (const auto& [qid, n] : per_qid) ranked.push_back({qid, n});
    const auto keep = std::min(k, ranked.size());
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep),
                      ranked.end(), ranked_before);
    ranked.resize(keep);
    table.set(alias, std::move(ranked));
  }
  return table;
}

std::vector<Qid> link_alias(const AliasTable& table, std::string_view mention) {
  std::vector<Qid> out;
  if (const auto* ranked = table.find(table.key(mention))) {
    out.reserve(ranked->size());
    for (const auto& c : *ranked) out.push_back(c.qid);
  }
  return out;
}

std::string dump_alias_table(const AliasTable& table) {
  std::string out;
  for (const auto& [alias, ranked] : table.entries()) {
    out += alias;
    out += '\t';
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      if (i > 0) out += ',';
      out += to_string(ranked[i].qid);
      out += ':';
      out += std::to_string(ranked[i].count);
    }
    out += '\n';
  }
  return out;
}

AliasTable load_alias_table(std::string_view text, std::size_t k, bool cased) {
  AliasTable table(k, cased);
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string_view::npos || tab == 0) {
      throw FormatError("alias table line " + std::to_string(line_no) + ": missing tab");
    }
    std::vector<AliasCandidate> ranked;
    std::string_view rest = line.substr(tab + 1);
    while (!rest.empty()) {
      auto comma = rest.find(',');
      std::string_view item = rest.substr(0, comma);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      const auto colon = item.find(':');
      if (colon == std::string_view::npos) {
        throw FormatError("alias table line " + std::to_string(line_no) + ": bad item");
      }
      std::size_t count = 0;
      const auto cnt = item.substr(colon + 1);
      const auto [ptr, ec] = std::from_chars(cnt.data(), cnt.data() + cnt.size(), count);
      if (ec != std::errc{} || ptr != cnt.data() + cnt.size()) {
        throw FormatError("alias table line " + std::to_string(line_no) + ": bad count");
      }
      ranked.push_back({parse_qid(item.substr(0, colon)), count});
    }
    table.set(std::string(line.substr(0, tab)), std::move(ranked));
  }
  return table;
}

}  // namespace linklab
