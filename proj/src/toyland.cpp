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
#include "linklab/toyland.hpp"

#include <algorithm>
#include <array>
#include <random>
#include <set>
#include <vector>

#include <unicode/uchar.h>

#include "json.hpp"
#include "linklab/error.hpp"
#include "linklab/io.hpp"
#include "linklab/unicode.hpp"

namespace linklab {

namespace {

constexpr std::array<const char*, 19> kConsonants = {"b", "c", "d", "f", "g", "h", "k", "l", "m", "n",
                                                      "p", "r", "s", "t", "v", "y", "z", "ş", "ç"};
constexpr std::array<const char*, 8> kVowels = {"a", "e", "i", "o", "u", "ı", "ö", "ü"};
constexpr std::array<const char*, 8> kSuffixes = {"'da", "'de", "'nın", "'ya", "'dan", "'ten", "'e", "'u"};
constexpr std::size_t kFillerWords = 400;
constexpr std::size_t kContentWords = 1500;
constexpr std::size_t kNameWords = 600;
constexpr std::size_t kTopicWordsPerEntity = 6;
constexpr double kArticleTopicRate = 0.35;
constexpr double kContextTopicRate = 0.15;

class WordFactory {
 public:
  explicit WordFactory(std::mt19937_64& rng) : rng_(rng) {}

  std::vector<std::string> make(std::size_t n, std::size_t min_syl, std::size_t max_syl, bool capital) {
    std::vector<std::string> out;
    std::uniform_int_distribution<std::size_t> syl(min_syl, max_syl);
    std::uniform_int_distribution<std::size_t> cons(0, kConsonants.size() - 1);
    std::uniform_int_distribution<std::size_t> vow(0, kVowels.size() - 1);
    while (out.size() < n) {
      std::string w;
      const std::size_t k = syl(rng_);
      for (std::size_t i = 0; i < k; ++i) {
        w += kConsonants[cons(rng_)];
        w += kVowels[vow(rng_)];
      }
      if (capital) w = capitalize(w);
      if (used_.insert(w).second) out.push_back(std::move(w));
    }
    return out;
  }

 private:
  static std::string capitalize(const std::string& w) {
    std::u32string chars = unicode::decode(w);
    if (!chars.empty()) chars[0] = static_cast<char32_t>(u_toupper(static_cast<UChar32>(chars[0])));
    return unicode::encode(chars);
  }

  std::mt19937_64& rng_;
  std::set<std::string> used_;
};

/// Accumulates space-separated words while tracking scalar-value offsets.
class TextBuilder {
 public:
  void add(const std::string& word) {
    if (!text_.empty()) {
      text_ += ' ';
      ++chars_;
    }
    text_ += word;
    chars_ += unicode::length(word);
  }
  std::size_t chars() const { return chars_; }
  std::size_t next_start() const { return text_.empty() ? 0 : chars_ + 1; }
  const std::string& text() const { return text_; }

 private:
  std::string text_;
  std::size_t chars_ = 0;
};

struct ToyEntity {
  std::uint64_t qid;
  std::vector<std::string> label;
  std::vector<std::string> topics;
};

std::string join(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) out += (out.empty() ? "" : " ") + w;
  return out;
}

}  // namespace

Toyland generate_toyland(const ToylandConfig& cfg) {
  if (cfg.train_per_entity > cfg.mentions_per_entity) {
    throw ArgumentError("train_per_entity exceeds mentions_per_entity");
  }
  if (2 * cfg.homonym_pairs > cfg.n_entities) throw ArgumentError("too many homonym pairs");
  std::mt19937_64 rng(cfg.seed);
  WordFactory words(rng);
  const auto filler = words.make(kFillerWords, 1, 2, false);
  const auto content = words.make(kContentWords, 2, 3, false);
  const auto names = words.make(kNameWords, 2, 3, true);

  std::vector<double> zipf(filler.size());
  for (std::size_t i = 0; i < zipf.size(); ++i) zipf[i] = 1.0 / static_cast<double>(i + 1);
  std::discrete_distribution<std::size_t> pick_filler(zipf.begin(), zipf.end());
  std::uniform_int_distribution<std::size_t> pick_content(0, content.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_name(0, names.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_topic(0, kTopicWordsPerEntity - 1);
  std::uniform_int_distribution<std::size_t> pick_suffix(0, kSuffixes.size() - 1);
  std::bernoulli_distribution coin_label3(0.5);

  std::vector<ToyEntity> entities;
  std::set<std::vector<std::string>> labels;
  for (std::size_t i = 0; i < cfg.n_entities; ++i) {
    ToyEntity e;
    e.qid = 1000 + 7 * i;
    if (i % 2 == 1 && i / 2 < cfg.homonym_pairs) {
      e.label = entities.back().label;
    } else {
      do {
        e.label.clear();
        const std::size_t len = coin_label3(rng) ? 3 : 2;
        for (std::size_t j = 0; j < len; ++j) e.label.push_back(names[pick_name(rng)]);
      } while (!labels.insert(e.label).second);
    }
    for (std::size_t j = 0; j < kTopicWordsPerEntity; ++j) e.topics.push_back(content[pick_content(rng)]);
    entities.push_back(std::move(e));
  }

  const auto body_word = [&](const ToyEntity& e, double topic_rate) -> const std::string& {
    std::bernoulli_distribution topical(topic_rate);
    return topical(rng) ? e.topics[pick_topic(rng)] : filler[pick_filler(rng)];
  };

  Toyland out;
  std::uniform_int_distribution<std::size_t> article_len(40, 80);
  for (const auto& e : entities) {
    TextBuilder article;
    for (const auto& w : e.label) article.add(w);
    const std::size_t len = article_len(rng);
    std::vector<std::string> blurb;
    while (blurb.size() + e.label.size() < len) {
      const auto& w = body_word(e, kArticleTopicRate);
      article.add(w);
      blurb.push_back(w);
    }
    nlohmann::json obj = {
        {"qid", "Q" + std::to_string(e.qid)},
        {"label", join(e.label)},
        {"description", join(std::vector<std::string>(blurb.begin(), blurb.begin() + 6))},
        {"wiki", {{"title", join(e.label)}, {"text", article.text()}}},
    };
    out.kb_jsonl += obj.dump() + "\n";
  }

  std::uniform_int_distribution<std::size_t> context_len(60, 120);
  const auto inflected_per_entity = static_cast<std::size_t>(
      std::lround(cfg.inflected_fraction * static_cast<double>(cfg.mentions_per_entity)));
  std::uint64_t next_doc = 5000000;
  std::vector<std::string> train_lines;
  std::vector<std::string> eval_lines;
  for (const auto& e : entities) {
    std::vector<bool> inflected(cfg.mentions_per_entity, false);
    std::fill_n(inflected.begin(), inflected_per_entity, true);
    std::shuffle(inflected.begin(), inflected.end(), rng);
    for (std::size_t m = 0; m < cfg.mentions_per_entity; ++m) {
      std::vector<std::string> surface_words = e.label;
      if (inflected[m]) surface_words.back() += kSuffixes[pick_suffix(rng)];
      const std::size_t len = context_len(rng);
      std::uniform_int_distribution<std::size_t> pos_dist(0, len - surface_words.size());
      const std::size_t pos = pos_dist(rng);

      TextBuilder doc;
      std::size_t start = 0;
      std::size_t end = 0;
      for (std::size_t t = 0; t < len;) {
        if (t == pos) {
          start = doc.next_start();
          for (const auto& w : surface_words) doc.add(w);
          end = doc.chars();
          t += surface_words.size();
        } else {
          doc.add(body_word(e, kContextTopicRate));
          ++t;
        }
      }
      const std::uint64_t doc_qid = next_doc++;
      nlohmann::json obj = {
          {"qid", "Q" + std::to_string(doc_qid)},
          {"label", "Document " + std::to_string(doc_qid)},
          {"wiki",
           {{"title", "Document " + std::to_string(doc_qid)},
            {"text", doc.text()},
            {"links", {{{"start", start}, {"end", end}, {"qid", "Q" + std::to_string(e.qid)}}}}}},
      };
      (m < cfg.train_per_entity ? train_lines : eval_lines).push_back(obj.dump());
    }
  }
  for (const auto& l : train_lines) out.train_jsonl += l + "\n";
  for (const auto& l : eval_lines) out.eval_jsonl += l + "\n";
  return out;
}

void write_toyland(const Toyland& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  io::write_file(dir / "kb.jsonl", corpus.kb_jsonl);
  io::write_file(dir / "train.jsonl", corpus.train_jsonl);
  io::write_file(dir / "eval.jsonl", corpus.eval_jsonl);
}

}  // namespace linklab
