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
#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>

#include "linklab/alias_table.hpp"
#include "linklab/error.hpp"
#include "linklab/evaluator.hpp"

namespace linklab {
namespace {

using Pairs = std::vector<std::pair<std::string, Qid>>;

std::vector<AliasCandidate> cands(std::initializer_list<std::pair<std::uint64_t, std::size_t>> rows) {
  std::vector<AliasCandidate> out;
  for (auto [q, c] : rows) out.push_back({Qid{q}, c});
  return out;
}

TEST(BuildAliasTable, RanksByCount) {
  const Pairs pairs = {{"Paris", Qid{90}}, {"Paris", Qid{90}}, {"Paris", Qid{90}}, {"Paris", Qid{167646}}};
  const auto table = build_alias_table(pairs, 10);
  ASSERT_NE(table.find("Paris"), nullptr);
  EXPECT_EQ(*table.find("Paris"), cands({{90, 3}, {167646, 1}}));
}

TEST(BuildAliasTable, Singleton) {
  const auto table = build_alias_table({{"X", Qid{1}}}, 1);
  EXPECT_EQ(*table.find("X"), cands({{1, 1}}));
}

TEST(BuildAliasTable, CountTiesPreferSmallerQid) {
  const auto table = build_alias_table({{"a", Qid{2}}, {"a", Qid{1}}}, 2);
  EXPECT_EQ(*table.find("a"), cands({{1, 1}, {2, 1}}));
}

TEST(BuildAliasTable, TruncatesToK) {
  const auto table = build_alias_table({{"a", Qid{3}}, {"a", Qid{3}}, {"a", Qid{2}}, {"a", Qid{1}}}, 2);
  EXPECT_EQ(*table.find("a"), cands({{3, 2}, {1, 1}}));
}

TEST(BuildAliasTable, RejectsZeroK) { EXPECT_THROW(build_alias_table({}, 0), ArgumentError); }

TEST(BuildAliasTable, RejectsEmptyAlias) {
  EXPECT_THROW(build_alias_table({{"", Qid{1}}}, 1), ArgumentError);
}

Pairs random_pairs(std::mt19937_64& rng, std::size_t n) {
  static const std::vector<std::string> aliases = {"Paris", "paris", "PARIS", "Roma", "İstanbul", "istanbul", "x"};
  std::uniform_int_distribution<std::size_t> a(0, aliases.size() - 1);
  std::uniform_int_distribution<std::uint64_t> q(1, 8);
  Pairs out;
  for (std::size_t i = 0; i < n; ++i) out.emplace_back(aliases[a(rng)], Qid{q(rng)});
  return out;
}

TEST(BuildAliasTable, MatchesExhaustiveCount) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const auto pairs = random_pairs(rng, 1 + trial % 40);
    const std::size_t k = 1 + trial % 5;
    const bool cased = trial % 2 == 0;
    const auto table = build_alias_table(pairs, k, cased);
    std::map<std::string, std::map<Qid, std::size_t>> counts;
    for (const auto& [a, q] : pairs) ++counts[table.key(a)][q];
    ASSERT_EQ(table.size(), counts.size());
    for (const auto& [alias, per_qid] : counts) {
      std::vector<AliasCandidate> expected;
      for (const auto& [q, c] : per_qid) expected.push_back({q, c});
      std::stable_sort(expected.begin(), expected.end(),
                       [](const auto& x, const auto& y) { return x.count > y.count; });
      if (expected.size() > k) expected.resize(k);
      EXPECT_EQ(*table.find(alias), expected);
    }
  }
}

TEST(BuildAliasTable, InvariantsHold) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 1 + trial % 4;
    const auto table = build_alias_table(random_pairs(rng, 30), k, trial % 3 != 0);
    for (const auto& [alias, list] : table.entries()) {
      EXPECT_LE(list.size(), k);
      std::set<Qid> seen;
      for (std::size_t i = 0; i < list.size(); ++i) {
        EXPECT_TRUE(seen.insert(list[i].qid).second);
        if (i > 0) {
          EXPECT_GE(list[i - 1].count, list[i].count);
        }
      }
    }
  }
}

TEST(BuildAliasTable, OrderIndependent) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    auto pairs = random_pairs(rng, 25);
    const auto a = build_alias_table(pairs, 3, false);
    std::shuffle(pairs.begin(), pairs.end(), rng);
    const auto b = build_alias_table(pairs, 3, false);
    EXPECT_EQ(a.entries(), b.entries());
  }
}

TEST(BuildAliasTable, TopKPairsAreRetrievable) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 1 + trial % 3;
    const auto pairs = random_pairs(rng, 30);
    const auto table = build_alias_table(pairs, k);
    for (const auto& [alias, q] : pairs) {
      // Rank of q under alias = 1 + number of qids strictly ahead in the total order.
      std::map<Qid, std::size_t> c;
      for (const auto& [a2, q2] : pairs) {
        if (a2 == alias) ++c[q2];
      }
      std::size_t rank = 1;
      for (const auto& [q2, n2] : c) {
        if (n2 > c[q] || (n2 == c[q] && q2 < q)) ++rank;
      }
      const auto linked = link_alias(table, alias);
      const bool present = std::find(linked.begin(), linked.end(), q) != linked.end();
      EXPECT_EQ(present, rank <= k);
    }
  }
}

TEST(LinkAlias, LookupAndMiss) {
  const auto table = build_alias_table({{"Paris", Qid{90}}, {"Paris", Qid{90}}, {"Paris", Qid{167646}}}, 10);
  EXPECT_EQ(link_alias(table, "Paris"), (std::vector<Qid>{Qid{90}, Qid{167646}}));
  EXPECT_TRUE(link_alias(table, "Zzz").empty());
  EXPECT_TRUE(link_alias(table, "paris").empty());
}

TEST(LinkAlias, UncasedFoldsBothSides) {
  const auto table = build_alias_table({{"İstanbul", Qid{1}}}, 1, false);
  EXPECT_EQ(link_alias(table, "istanbul"), std::vector<Qid>{Qid{1}});
  EXPECT_EQ(link_alias(table, "İSTANBUL"), std::vector<Qid>{Qid{1}});
}

TEST(AliasTableFile, RoundTrip) {
  std::mt19937_64 rng(5);
  const auto table = build_alias_table(random_pairs(rng, 60), 3, true);
  const std::string text = dump_alias_table(table);
  const auto back = load_alias_table(text, 3, true);
  EXPECT_EQ(back.entries(), table.entries());
  EXPECT_EQ(dump_alias_table(back), text);
}

TEST(AliasTableFile, Format) {
  const auto table = build_alias_table({{"Paris", Qid{90}}, {"Paris", Qid{90}}, {"Paris", Qid{167646}}}, 10);
  EXPECT_EQ(dump_alias_table(table), "Paris\tQ90:2,Q167646:1\n");
}

TEST(AliasTableFile, RejectsBrokenRanking) {
  EXPECT_THROW(load_alias_table("a\tQ1:1,Q2:3\n", 10, true), FormatError);
  EXPECT_THROW(load_alias_table("a\tQ1:1,Q1:1\n", 10, true), FormatError);
  EXPECT_THROW(load_alias_table("a\tQ1:2,Q2:1,Q3:1\n", 2, true), FormatError);
  EXPECT_THROW(load_alias_table("a Q1:2\n", 2, true), FormatError);
  EXPECT_THROW(load_alias_table("a\tQ1\n", 2, true), FormatError);
}

TEST(AliasRecall, NonDecreasingInK) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const auto table = build_alias_table(random_pairs(rng, 50), 5, trial % 2 == 0);
    const auto queries = random_pairs(rng, 20);
    std::vector<std::vector<Qid>> ranked;
    std::vector<Qid> golds;
    for (const auto& [a, q] : queries) {
      ranked.push_back(link_alias(table, a));
      golds.push_back(q);
    }
    double prev = 0.0;
    for (std::size_t k = 1; k <= 6; ++k) {
      const double r = recall_at_k(ranked, golds, k);
      EXPECT_GE(r, prev);
      prev = r;
    }
  }
}

}  // namespace
}  // namespace linklab
