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
#include "linklab/string_linker.hpp"

#include <algorithm>
#include <bit>
#include <unordered_set>

#include "linklab/error.hpp"
#include "linklab/unicode.hpp"

namespace linklab {

LcsPattern::LcsPattern(std::u32string_view pattern)
    : size_(pattern.size()), words_((pattern.size() + 63) / 64) {
  alphabet_.assign(pattern.begin(), pattern.end());
  std::sort(alphabet_.begin(), alphabet_.end());
  alphabet_.erase(std::unique(alphabet_.begin(), alphabet_.end()), alphabet_.end());
  blocks_.assign(alphabet_.size() * words_, 0);
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    const auto a = static_cast<std::size_t>(
        std::lower_bound(alphabet_.begin(), alphabet_.end(), pattern[i]) - alphabet_.begin());
    blocks_[a * words_ + i / 64] |= std::uint64_t{1} << (i % 64);
  }
}

const std::uint64_t* LcsPattern::masks(char32_t c) const {
  auto it = std::lower_bound(alphabet_.begin(), alphabet_.end(), c);
  if (it == alphabet_.end() || *it != c) return nullptr;
  return blocks_.data() + static_cast<std::size_t>(it - alphabet_.begin()) * words_;
}

// Bit-parallel LCS (Hyyrö): bit i of V is cleared once pattern[i] is matched
// in an optimal alignment; the LCS is the count of cleared bits.
std::size_t LcsPattern::lcs(std::u32string_view text) const {
  if (size_ == 0 || text.empty()) return 0;
  std::vector<std::uint64_t> v(words_, ~std::uint64_t{0});
  for (char32_t c : text) {
    const std::uint64_t* m = masks(c);
    if (m == nullptr) continue;
    std::uint64_t carry = 0;
    for (std::size_t w = 0; w < words_; ++w) {
      const std::uint64_t u = v[w] & m[w];
      const std::uint64_t sum = v[w] + u;
      const std::uint64_t c1 = sum < v[w] ? 1 : 0;
      const std::uint64_t sum2 = sum + carry;
      const std::uint64_t c2 = sum2 < sum ? 1 : 0;
      carry = c1 | c2;
      v[w] = sum2 | (v[w] - u);
    }
  }
  std::size_t zeros = 0;
  for (std::size_t w = 0; w < words_; ++w) {
    std::uint64_t bits = ~v[w];
    const std::size_t used = std::min<std::size_t>(64, size_ - w * 64);
    if (used < 64) bits &= (std::uint64_t{1} << used) - 1;
    zeros += static_cast<std::size_t>(std::popcount(bits));
  }
  return zeros;
}

std::size_t indel_distance(std::u32string_view a, std::u32string_view b) {
  const auto& [pat, txt] = a.size() <= b.size() ? std::pair{a, b} : std::pair{b, a};
  const std::size_t lcs = LcsPattern(pat).lcs(txt);
  return a.size() + b.size() - 2 * lcs;
}

std::size_t indel_distance(std::string_view a, std::string_view b) {
  return indel_distance(unicode::decode(a), unicode::decode(b));
}

double normalized_indel(std::u32string_view a, std::u32string_view b) {
  const std::size_t total = a.size() + b.size();
  if (total == 0) return 0.0;
  return static_cast<double>(indel_distance(a, b)) / static_cast<double>(total);
}

double normalized_indel(std::string_view a, std::string_view b) {
  return normalized_indel(unicode::decode(a), unicode::decode(b));
}

std::vector<SimilarityHit> similarity_hits(const AliasTable& table, std::string_view mention,
                                           std::size_t k) {
  if (k < 1) throw ArgumentError("similarity linking K must be >= 1");
  if (table.empty()) throw ArgumentError("similarity linking over an empty alias table");

  const std::string key = table.key(mention);
  std::vector<SimilarityHit> hits;
  if (const auto* exact = table.find(key)) {
    for (const auto& c : *exact) hits.push_back({key, c.qid, 0.0});
    return hits;
  }

  const std::u32string query = unicode::decode(key);
  const LcsPattern pattern(query);
  struct Scored {
    double distance;
    const std::string* alias;
    const std::vector<AliasCandidate>* ranked;
  };
  std::vector<Scored> scored;
  scored.reserve(table.size());
  for (const auto& [alias, ranked] : table.entries()) {
    const std::u32string text = unicode::decode(alias);
    const std::size_t total = query.size() + text.size();
    const std::size_t dist = total - 2 * pattern.lcs(text);
    scored.push_back({static_cast<double>(dist) / static_cast<double>(total), &alias, &ranked});
  }
  // entries() iterates aliases in ascending order, so a stable sort on
  // distance leaves equidistant aliases in lexicographic order.
  std::stable_sort(scored.begin(), scored.end(),
                   [](const Scored& x, const Scored& y) { return x.distance < y.distance; });

  std::unordered_set<Qid> seen;
  for (const auto& s : scored) {
    for (const auto& c : *s.ranked) {
      if (seen.insert(c.qid).second) hits.push_back({*s.alias, c.qid, s.distance});
      if (seen.size() == k) return hits;
    }
  }
  return hits;
}

std::vector<Qid> link_by_similarity(const AliasTable& table, std::string_view mention,
                                    std::size_t k) {
  std::vector<Qid> out;
  for (const auto& h : similarity_hits(table, mention, k)) out.push_back(h.qid);
  return out;
}

}  // namespace linklab
