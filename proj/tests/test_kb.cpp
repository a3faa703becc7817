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

#include <random>

#include "json.hpp"
#include "linklab/error.hpp"
#include "linklab/io.hpp"
#include "linklab/kb.hpp"
#include "linklab/unicode.hpp"
#include "test_util.hpp"

namespace linklab {
namespace {

using nlohmann::json;

TEST(Qid, ParsesPrefixedAndBareForms) {
  EXPECT_EQ(parse_qid("Q62").value, 62u);
  EXPECT_EQ(parse_qid("62").value, 62u);
  EXPECT_EQ(to_string(Qid{90}), "Q90");
  EXPECT_THROW(parse_qid("Q0"), FormatError);
  EXPECT_THROW(parse_qid("Q"), FormatError);
  EXPECT_THROW(parse_qid("Q12x"), FormatError);
  EXPECT_THROW(parse_qid("-3"), FormatError);
}

TEST(LoadKb, SingleEntity) {
  const auto part = load_kb(
      R"({"qid":"Q62","label":"San Francisco","description":"consolidated city and county in California, United States"})",
      "en");
  ASSERT_EQ(part.entities.size(), 1u);
  const Entity& e = part.entities.at(Qid{62});
  EXPECT_EQ(e.label, "San Francisco");
  EXPECT_EQ(e.description, "consolidated city and county in California, United States");
  EXPECT_EQ(e.language, "en");
  EXPECT_EQ(part.skipped_lines, 0u);
}

TEST(LoadKb, EmptyStream) {
  const auto part = load_kb("", "en");
  EXPECT_TRUE(part.entities.empty());
  EXPECT_EQ(part.skipped_lines, 0u);
}

// Counts lines lacking a usable qid or label without going through load_kb.
std::size_t invalid_lines(const std::string& text) {
  std::size_t bad = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    const std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json obj = json::parse(line, nullptr, false);
    const bool ok = obj.is_object() && obj.contains("qid") && obj["qid"].is_string() &&
                    obj.contains("label") && obj["label"].is_string() &&
                    !obj["label"].get<std::string>().empty();
    if (!ok) ++bad;
  }
  return bad;
}

TEST(LoadKb, MissingLabelIsSkippedAndCounted) {
  const std::string text =
      "{\"qid\":\"Q1\",\"label\":\"one\"}\n"
      "{\"qid\":\"Q2\",\"description\":\"no label\"}\n"
      "{\"qid\":\"Q3\",\"label\":\"three\"}\n";
  const auto part = load_kb(text, "en");
  EXPECT_EQ(part.entities.size(), 2u);
  EXPECT_EQ(part.skipped_lines, 1u);
  EXPECT_EQ(part.skipped_lines, invalid_lines(text));
}

TEST(LoadKb, MalformedLinesAreCountedNotFatal) {
  const std::string text =
      "not json\n"
      "{\"label\":\"no qid\"}\n"
      "{\"qid\":\"Qabc\",\"label\":\"bad qid\"}\n"
      "\n"
      "{\"qid\":\"Q7\",\"label\":\"\"}\n"
      "{\"qid\":\"Q8\",\"label\":\"ok\",\"extra\":{\"ignored\":true}}\r\n";
  const auto part = load_kb(text, "en");
  EXPECT_EQ(part.entities.size(), 1u);
  EXPECT_EQ(part.skipped_lines, 4u);
}

TEST(LoadKb, UnreadableFileIsIoError) {
  EXPECT_THROW(load_kb_file("/nonexistent/kb.jsonl", "en"), IoError);
}

TEST(LoadKb, ReadsCompressedInputs) {
  testing::TempDir dir;
  const std::string text = "{\"qid\":\"Q5\",\"label\":\"five\"}\n";
  io::write_gzip(dir / "kb.jsonl.gz", text);
  EXPECT_EQ(load_kb_file((dir / "kb.jsonl.gz").string(), "en").entities.size(), 1u);
}

TEST(LoadKb, RoundTripPreservesFields) {
  const std::string text =
      "{\"qid\":\"Q3\",\"label\":\"Çanakkale\",\"description\":\"city\",\"wiki\":{\"title\":\"Ç\",\"text\":\"body\"}}\n"
      "{\"qid\":\"Q1\",\"label\":\"x\"}\n";
  const auto first = load_kb(text, "tr");
  const auto second = load_kb(dump_kb(first.entities), "tr");
  ASSERT_EQ(first.entities.size(), second.entities.size());
  for (const auto& [qid, e] : first.entities) {
    const Entity& f = second.entities.at(qid);
    EXPECT_EQ(f.label, e.label);
    EXPECT_EQ(f.description, e.description);
    EXPECT_EQ(f.wiki_title, e.wiki_title);
    EXPECT_EQ(f.wiki_text, e.wiki_text);
  }
}

TEST(Entity, BodyPrefersWikiText) {
  Entity e;
  e.description = "desc";
  EXPECT_EQ(e.body(), "desc");
  e.wiki_text = "";
  EXPECT_EQ(e.body(), "desc");
  e.wiki_text = "text";
  EXPECT_EQ(e.body(), "text");
}

TEST(ExtractMentions, DirectSlice) {
  const auto ex = extract_mentions(
      R"({"qid":"Q1","label":"x","wiki":{"text":"Paris fell.","links":[{"start":0,"end":5,"qid":"Q90"}]}})", "fr");
  ASSERT_EQ(ex.mentions.size(), 1u);
  EXPECT_EQ(ex.mentions[0].surface, "Paris");
  EXPECT_EQ(ex.mentions[0].gold_qid, Qid{90});
  EXPECT_EQ(ex.mentions[0].doc_id, "Q1");
  EXPECT_EQ(ex.mentions[0].language, "fr");
}

TEST(ExtractMentions, EmptySpanIsDropped) {
  const auto ex = extract_mentions(
      R"({"qid":"Q1","label":"x","wiki":{"text":"Paris fell.","links":[{"start":0,"end":0,"qid":"Q90"}]}})", "fr");
  EXPECT_TRUE(ex.mentions.empty());
  EXPECT_EQ(ex.dropped_empty, 1u);
}

TEST(ExtractMentions, OutOfBoundsSpanIsSkipped) {
  const auto ex = extract_mentions(
      R"({"qid":"Q1","label":"x","wiki":{"text":"abc","links":[{"start":1,"end":9,"qid":"Q2"},{"start":2,"end":1,"qid":"Q2"},{"start":0,"end":1,"qid":"Q2"}]}})",
      "en");
  EXPECT_EQ(ex.mentions.size(), 1u);
  EXPECT_EQ(ex.skipped_out_of_bounds, 2u);
}

TEST(ExtractMentions, OffsetsCountCodePoints) {
  const auto ex = extract_mentions(
      R"({"qid":"Q1","label":"x","wiki":{"text":"İstanbul'da güzel","links":[{"start":0,"end":8,"qid":"Q406"}]}})", "tr");
  ASSERT_EQ(ex.mentions.size(), 1u);
  EXPECT_EQ(ex.mentions[0].surface, "İstanbul");
}

// Counts non-empty in-bounds links with a plain walk over the parsed JSON.
std::size_t walk_links(const std::string& jsonl) {
  std::size_t n = 0;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    auto nl = jsonl.find('\n', pos);
    if (nl == std::string::npos) nl = jsonl.size();
    const json obj = json::parse(jsonl.substr(pos, nl - pos));
    pos = nl + 1;
    const auto len = unicode::length(obj["wiki"]["text"].get<std::string>());
    for (const auto& link : obj["wiki"]["links"]) {
      const auto s = link["start"].get<std::size_t>();
      const auto e = link["end"].get<std::size_t>();
      if (s < e && e <= len) ++n;
    }
  }
  return n;
}

TEST(ExtractMentions, LinkCountMatchesWalker) {
  const std::string text =
      R"({"qid":"Q1","label":"a","wiki":{"text":"Ankara ve İzmir","links":[{"start":0,"end":6,"qid":"Q3640"},{"start":10,"end":15,"qid":"Q35997"}]}})"
      "\n"
      R"({"qid":"Q2","label":"b","wiki":{"text":"Roma e Milano","links":[{"start":0,"end":4,"qid":"Q220"},{"start":7,"end":13,"qid":"Q490"}]}})";
  const auto ex = extract_mentions(text, "xx");
  EXPECT_EQ(ex.mentions.size(), 4u);
  EXPECT_EQ(ex.mentions.size(), walk_links(text));
}

TEST(ExtractMentions, RandomDocumentsSatisfyMentionInvariants) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::u32string body = testing::random_text(rng, 40);
    json links = json::array();
    std::uniform_int_distribution<std::size_t> off(0, body.size() + 3);
    for (int i = 0; i < 5; ++i) links.push_back({{"start", off(rng)}, {"end", off(rng)}, {"qid", "Q9"}});
    const json doc = {{"qid", "Q1"}, {"label", "x"}, {"wiki", {{"text", unicode::encode(body)}, {"links", links}}}};
    const auto ex = extract_mentions(doc.dump(), "xx");
    EXPECT_EQ(ex.mentions.size() + ex.dropped_empty + ex.skipped_out_of_bounds, 5u);
    for (const auto& m : ex.mentions) {
      EXPECT_LT(m.start, m.end);
      EXPECT_LE(m.end, unicode::length(m.context_text));
      EXPECT_EQ(unicode::substr(m.context_text, m.start, m.end), m.surface);
    }
  }
}

TEST(MentionStore, RoundTrip) {
  const auto ex = extract_mentions(
      R"({"qid":"Q1","label":"x","wiki":{"text":"çok güzel Paris","links":[{"start":10,"end":15,"qid":"Q90"}]}})", "tr");
  const auto back = load_mentions(dump_mentions(ex.mentions));
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].surface, "Paris");
  EXPECT_EQ(back[0].start, 10u);
  EXPECT_EQ(back[0].gold_qid, Qid{90});
  EXPECT_EQ(back[0].context_text, "çok güzel Paris");
}

TEST(MentionStore, RejectsInconsistentSlice) {
  EXPECT_THROW(
      load_mentions(R"({"doc_id":"d","surface":"Rome","start":0,"end":4,"qid":"Q1","language":"en","context":"Pari"})"),
      FormatError);
}

std::vector<Qid> qids(std::initializer_list<std::uint64_t> values) {
  std::vector<Qid> out;
  for (auto v : values) out.push_back(Qid{v});
  return out;
}

std::set<Qid> qid_set(std::initializer_list<std::uint64_t> values) {
  std::set<Qid> out;
  for (auto v : values) out.insert(Qid{v});
  return out;
}

TEST(RecallUpperBound, CountsOccurrences) {
  EXPECT_DOUBLE_EQ(recall_upper_bound(qids({1, 2, 2, 3}), qid_set({1, 2})), 0.75);
  EXPECT_DOUBLE_EQ(recall_upper_bound(qids({1, 2, 3}), qid_set({1, 2, 3, 4})), 1.0);
  EXPECT_DOUBLE_EQ(recall_upper_bound(qids({1, 2}), qid_set({5})), 0.0);
  EXPECT_THROW(recall_upper_bound(std::vector<Qid>{}, qid_set({1})), DomainError);
}

TEST(RecallUpperBound, RandomAgainstMembershipCount) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::uint64_t> q(1, 30);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Qid> golds(1 + trial % 17);
    for (auto& g : golds) g = Qid{q(rng)};
    std::set<Qid> kb;
    for (int i = 0; i < trial % 25; ++i) kb.insert(Qid{q(rng)});
    std::size_t hits = 0;
    bool all = true;
    for (const auto& g : golds) {
      bool found = false;
      for (const auto& k : kb) found = found || k == g;
      hits += found;
      all = all && found;
    }
    const double bound = recall_upper_bound(golds, kb);
    EXPECT_DOUBLE_EQ(bound, static_cast<double>(hits) / golds.size());
    EXPECT_GE(bound, 0.0);
    EXPECT_LE(bound, 1.0);
    EXPECT_EQ(bound == 1.0, all);
  }
}

TEST(EntitySetIntersection, Examples) {
  EXPECT_DOUBLE_EQ(entity_set_intersection(qid_set({1, 2, 3}), qid_set({2, 3, 4})), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(entity_set_intersection(qid_set({4, 5}), qid_set({4, 5})), 1.0);
  EXPECT_THROW(entity_set_intersection({}, qid_set({1})), DomainError);
}

TEST(EntitySetIntersection, DiffersFromOccurrenceBoundUnderRepeats) {
  EXPECT_DOUBLE_EQ(recall_upper_bound(qids({1, 1, 2}), qid_set({1})), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(entity_set_intersection(qid_set({1, 2}), qid_set({1})), 0.5);
}

MentionCounts counts(std::initializer_list<std::tuple<std::string, std::size_t, std::size_t>> rows) {
  // (language, n_e for Q1, n for the language)
  MentionCounts c;
  for (const auto& [lang, ne, n] : rows) {
    c.per_entity[{Qid{1}, lang}] = ne;
    c.per_language[lang] = n;
  }
  return c;
}

TEST(SelectDescriptionLanguage, StrictMaximum) {
  EXPECT_EQ(select_description_language(Qid{1}, counts({{"es", 5, 10}, {"de", 2, 10}}), {"es", "de"}), "es");
}

TEST(SelectDescriptionLanguage, LanguageSizeBreaksTies) {
  EXPECT_EQ(select_description_language(Qid{1}, counts({{"es", 3, 100}, {"de", 3, 400}}), {"es", "de"}), "de");
}

TEST(SelectDescriptionLanguage, LexicographicFinalTie) {
  EXPECT_EQ(select_description_language(Qid{1}, counts({{"es", 0, 7}, {"de", 0, 7}}), {"es", "de"}), "de");
}

TEST(SelectDescriptionLanguage, AbsentKeysCountAsZero) {
  MentionCounts c;
  c.add(Qid{1}, "fr", 1);
  EXPECT_EQ(select_description_language(Qid{1}, c, {"fr", "ar"}), "fr");
  EXPECT_EQ(select_description_language(Qid{2}, c, {"fr", "ar"}), "fr");
  EXPECT_EQ(select_description_language(Qid{2}, MentionCounts{}, {"fr", "ar"}), "ar");
}

TEST(SelectDescriptionLanguage, MatchesExhaustiveOrdering) {
  const std::vector<std::string> langs = {"ar", "de", "en", "es"};
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> small(0, 3);
  for (int trial = 0; trial < 500; ++trial) {
    MentionCounts c;
    std::set<std::string> available;
    for (const auto& l : langs) {
      if (small(rng) > 0) available.insert(l);
      c.per_entity[{Qid{1}, l}] = small(rng);
      c.per_language[l] = small(rng);
    }
    if (available.empty()) available.insert("en");
    std::string best;
    for (const auto& l : available) {
      if (best.empty()) {
        best = l;
        continue;
      }
      const auto key = [&](const std::string& x) {
        return std::pair{c.entity_count(Qid{1}, x), c.language_count(x)};
      };
      if (key(l) > key(best)) best = l;  // strict: earlier (smaller) code wins ties
    }
    const auto got = select_description_language(Qid{1}, c, available);
    EXPECT_EQ(got, best);
    EXPECT_EQ(got, select_description_language(Qid{1}, c, available));
  }
}

TEST(MentionCounts, LanguageTotalsAreSumsOfEntityCounts) {
  std::vector<Mention> mentions;
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::uint64_t> q(1, 9);
  for (int i = 0; i < 200; ++i) {
    Mention m;
    m.gold_qid = Qid{q(rng)};
    m.language = i % 3 == 0 ? "de" : "es";
    mentions.push_back(m);
  }
  const auto c = count_mentions(mentions);
  for (const auto& [lang, n] : c.per_language) {
    std::size_t sum = 0;
    for (const auto& [key, ne] : c.per_entity) {
      if (key.second == lang) sum += ne;
    }
    EXPECT_EQ(sum, n);
  }
}

TEST(KnowledgeBase, PartitionsByLanguage) {
  KnowledgeBase kb;
  kb.add_partition(load_kb("{\"qid\":\"Q1\",\"label\":\"a\"}\n{\"qid\":\"Q2\",\"label\":\"b\"}", "en"));
  kb.add_partition(load_kb("{\"qid\":\"Q2\",\"label\":\"b\"}", "de"));
  EXPECT_EQ(kb.entity_count("en"), 2u);
  EXPECT_EQ(kb.entity_count("de"), 1u);
  EXPECT_EQ(kb.qids().size(), 2u);
  EXPECT_NE(kb.find("de", Qid{2}), nullptr);
  EXPECT_EQ(kb.find("de", Qid{1}), nullptr);
  EXPECT_THROW(kb.partition("fr"), ArgumentError);
  KbPartition wrong = load_kb("{\"qid\":\"Q3\",\"label\":\"c\"}", "en");
  wrong.language = "fr";
  EXPECT_THROW(kb.add_partition(wrong), ArgumentError);
}

}  // namespace
}  // namespace linklab
