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
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "linklab/kb.hpp"

namespace linklab {

struct AliasCandidate {
  Qid qid;
  std::size_t count = 0;

  bool operator==(const AliasCandidate&) const = default;
};

/// Alias string -> up to K entities ranked by how often the alias linked to
/// them (count descending, then smaller qid).
class AliasTable {
 public:
  AliasTable(std::size_t k, bool cased);

  std::size_t k() const { return k_; }
  bool cased() const { return cased_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  /// Applies the table's case policy to an alias or query.
  std::string key(std::string_view alias) const;

  using Entries = std::map<std::string, std::vector<AliasCandidate>, std::less<>>;

  const Entries& entries() const { return entries_; }
  const std::vector<AliasCandidate>* find(std::string_view alias) const;

  /// Inserts a ranked list verbatim (already case-adjusted). Used by the
  /// table reader; throws FormatError when the list breaks the ranking.
  void set(std::string alias, std::vector<AliasCandidate> ranked);

 private:
  std::size_t k_;
  bool cased_;
  std::map<std::string, std::vector<AliasCandidate>, std::less<>> entries_;
};

AliasTable build_alias_table(const std::vector<std::pair<std::string, Qid>>& pairs, std::size_t k,
                             bool cased = true);

/// Ranked qids for the mention, or empty (NIL) on a miss.
std::vector<Qid> link_alias(const AliasTable& table, std::string_view mention);

/// `alias<TAB>qid:count,qid:count,...` per line.
std::string dump_alias_table(const AliasTable& table);
AliasTable load_alias_table(std::string_view text, std::size_t k, bool cased);

}  // namespace linklab
