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
#include <string>
#include <string_view>
#include <vector>

#include "linklab/alias_table.hpp"

namespace linklab {

/// Insert/delete edit distance over Unicode scalar values:
/// len(a) + len(b) - 2 * LCS(a, b).
std::size_t indel_distance(std::u32string_view a, std::u32string_view b);
std::size_t indel_distance(std::string_view a, std::string_view b);

/// indel_distance / (len(a) + len(b)); 0 when both are empty.
double normalized_indel(std::u32string_view a, std::u32string_view b);
double normalized_indel(std::string_view a, std::string_view b);

/// Precomputed match masks for one pattern, reused across many comparisons.
class LcsPattern {
 public:
  explicit LcsPattern(std::u32string_view pattern);

  std::size_t size() const { return size_; }
  std::size_t lcs(std::u32string_view text) const;

 private:
  const std::uint64_t* masks(char32_t c) const;

  std::size_t size_;
  std::size_t words_;
  std::vector<char32_t> alphabet_;      // sorted
  std::vector<std::uint64_t> blocks_;   // alphabet_.size() * words_
};

struct SimilarityHit {
  std::string alias;
  Qid qid;
  double distance = 0.0;
};

/// Candidates ordered by (normalized Indel distance, alias), expanding
/// aliases until `k` distinct qids are gathered. An exact alias hit yields
/// that alias's candidates at distance 0.
std::vector<SimilarityHit> similarity_hits(const AliasTable& table, std::string_view mention,
                                           std::size_t k);

/// Exact lookup first; otherwise the nearest aliases by normalized Indel.
std::vector<Qid> link_by_similarity(const AliasTable& table, std::string_view mention,
                                    std::size_t k);

}  // namespace linklab
