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
#include "linklab/kb.hpp"

#include <algorithm>
#include <charconv>
#include <tuple>

#include "json.hpp"
#include "linklab/error.hpp"
#include "linklab/io.hpp"
#include "linklab/unicode.hpp"

namespace linklab {

using nlohmann::json;

namespace {

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") != std::string_view::npos) fn(line);
    pos = nl + 1;
  }
}

std::optional<Qid> qid_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) return std::nullopt;
  try {
    if (it->is_string()) return parse_qid(it->get<std::string>());
    if (it->is_number_unsigned() && it->get<std::uint64_t>() > 0) return Qid{it->get<std::uint64_t>()};
  } catch (const FormatError&) {
  }
  return std::nullopt;
}

std::optional<std::string> string_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) return std::nullopt;
  return it->get<std::string>();
}

std::optional<std::size_t> offset_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number_integer() || it->get<long long>() < 0) return std::nullopt;
  return static_cast<std::size_t>(it->get<long long>());
}

}  // namespace

Qid parse_qid(std::string_view text) {
  std::string_view digits = text;
  if (!digits.empty() && (digits.front() == 'Q' || digits.front() == 'q')) digits.remove_prefix(1);
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (digits.empty() || ec != std::errc{} || ptr != digits.data() + digits.size() || value == 0) {
    throw FormatError("invalid qid '" + std::string(text) + "'");
  }
  return Qid{value};
}

std::string to_string(Qid qid) { return "Q" + std::to_string(qid.value); }

const std::string& Entity::body() const {
  static const std::string empty;
  if (wiki_text && !wiki_text->empty()) return *wiki_text;
  if (description) return *description;
  return empty;
}

void KnowledgeBase::add_partition(KbPartition part) {
  for (const auto& [qid, entity] : part.entities) {
    if (entity.language != part.language) {
      throw ArgumentError("entity " + to_string(qid) + " has language '" + entity.language +
                          "' but partition is '" + part.language + "'");
    }
  }
  partitions_[part.language] = std::move(part.entities);
}

const std::map<Qid, Entity>& KnowledgeBase::partition(const std::string& language) const {
  auto it = partitions_.find(language);
  if (it == partitions_.end()) throw ArgumentError("no partition for language '" + language + "'");
  return it->second;
}

const Entity* KnowledgeBase::find(const std::string& language, Qid qid) const {
  auto it = partitions_.find(language);
  if (it == partitions_.end()) return nullptr;
  auto e = it->second.find(qid);
  return e == it->second.end() ? nullptr : &e->second;
}

std::size_t KnowledgeBase::entity_count(const std::string& language) const {
  auto it = partitions_.find(language);
  return it == partitions_.end() ? 0 : it->second.size();
}

std::set<Qid> KnowledgeBase::qids() const {
  std::set<Qid> out;
  for (const auto& [lang, part] : partitions_) {
    for (const auto& [qid, e] : part) out.insert(qid);
  }
  return out;
}

std::set<Qid> KnowledgeBase::qids(const std::string& language) const {
  std::set<Qid> out;
  auto it = partitions_.find(language);
  if (it != partitions_.end()) {
    for (const auto& [qid, e] : it->second) out.insert(qid);
  }
  return out;
}

void MentionCounts::add(Qid qid, const std::string& language, std::size_t n) {
  per_entity[{qid, language}] += n;
  per_language[language] += n;
}

std::size_t MentionCounts::entity_count(Qid qid, const std::string& language) const {
  auto it = per_entity.find({qid, language});
  return it == per_entity.end() ? 0 : it->second;
}

std::size_t MentionCounts::language_count(const std::string& language) const {
  auto it = per_language.find(language);
  return it == per_language.end() ? 0 : it->second;
}

MentionCounts count_mentions(const std::vector<Mention>& mentions) {
  MentionCounts counts;
  for (const auto& m : mentions) counts.add(m.gold_qid, m.language);
  return counts;
}

KbPartition load_kb(std::string_view jsonl, const std::string& language) {
  KbPartition part;
  part.language = language;
  for_each_line(jsonl, [&](std::string_view line) {
    json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (!obj.is_object()) {
      ++part.skipped_lines;
      return;
    }
    auto qid = qid_field(obj, "qid");
    auto label = string_field(obj, "label");
    if (!qid || !label || label->empty()) {
      ++part.skipped_lines;
      return;
    }
    Entity e;
    e.qid = *qid;
    e.label = std::move(*label);
    e.description = string_field(obj, "description");
    e.language = language;
    if (auto wiki = obj.find("wiki"); wiki != obj.end() && wiki->is_object()) {
      e.wiki_title = string_field(*wiki, "title");
      e.wiki_text = string_field(*wiki, "text");
    }
    part.entities.insert_or_assign(e.qid, std::move(e));
  });
  return part;
}

KbPartition load_kb_file(const std::string& path, const std::string& language) {
  return load_kb(io::read_file(path), language);
}

MentionExtraction extract_mentions(std::string_view jsonl, const std::string& language) {
  MentionExtraction out;
  std::size_t line_no = 0;
  for_each_line(jsonl, [&](std::string_view line) {
    ++line_no;
    json obj = json::parse(line, nullptr, false);
    if (!obj.is_object()) {
      ++out.skipped_lines;
      return;
    }
    auto wiki = obj.find("wiki");
    if (wiki == obj.end() || !wiki->is_object()) return;
    auto text = string_field(*wiki, "text");
    auto links = wiki->find("links");
    if (!text || links == wiki->end() || !links->is_array()) return;

    const auto qid = qid_field(obj, "qid");
    const std::string doc_id = qid ? to_string(*qid) : "line:" + std::to_string(line_no);
    const std::u32string chars = unicode::decode(*text);
    for (const auto& link : *links) {
      if (!link.is_object()) {
        ++out.skipped_out_of_bounds;
        continue;
      }
      auto start = offset_field(link, "start");
      auto end = offset_field(link, "end");
      auto gold = qid_field(link, "qid");
      if (!start || !end || !gold || *start > *end || *end > chars.size()) {
        ++out.skipped_out_of_bounds;
        continue;
      }
      if (*start == *end) {
        ++out.dropped_empty;
        continue;
      }
      Mention m;
      m.doc_id = doc_id;
      m.surface = unicode::encode(std::u32string_view(chars).substr(*start, *end - *start));
      m.start = *start;
      m.end = *end;
      m.context_text = *text;
      m.gold_qid = *gold;
      m.language = language;
      out.mentions.push_back(std::move(m));
    }
  });
  return out;
}

std::string dump_kb(const std::map<Qid, Entity>& entities) {
  std::string out;
  for (const auto& [qid, e] : entities) {
    json obj = {{"qid", to_string(qid)}, {"label", e.label}};
    if (e.description) obj["description"] = *e.description;
    if (e.wiki_title || e.wiki_text) {
      json wiki = json::object();
      if (e.wiki_title) wiki["title"] = *e.wiki_title;
      if (e.wiki_text) wiki["text"] = *e.wiki_text;
      obj["wiki"] = std::move(wiki);
    }
    out += obj.dump();
    out += '\n';
  }
  return out;
}

std::string dump_mentions(const std::vector<Mention>& mentions) {
  std::string out;
  for (const auto& m : mentions) {
    json obj = {{"doc_id", m.doc_id},   {"surface", m.surface},         {"start", m.start},
                {"end", m.end},         {"qid", to_string(m.gold_qid)}, {"language", m.language},
                {"context", m.context_text}};
    out += obj.dump();
    out += '\n';
  }
  return out;
}

std::vector<Mention> load_mentions(std::string_view jsonl) {
  std::vector<Mention> out;
  std::size_t line_no = 0;
  for_each_line(jsonl, [&](std::string_view line) {
    ++line_no;
    try {
      json obj = json::parse(line);
      Mention m;
      m.doc_id = obj.at("doc_id").get<std::string>();
      m.surface = obj.at("surface").get<std::string>();
      m.start = obj.at("start").get<std::size_t>();
      m.end = obj.at("end").get<std::size_t>();
      m.gold_qid = parse_qid(obj.at("qid").get<std::string>());
      m.language = obj.at("language").get<std::string>();
      m.context_text = obj.at("context").get<std::string>();
      if (m.surface.empty() || unicode::substr(m.context_text, m.start, m.end) != m.surface) {
        throw FormatError("surface does not match context span");
      }
      out.push_back(std::move(m));
    } catch (const std::exception& e) {
      throw FormatError("mention store line " + std::to_string(line_no) + ": " + e.what());
    }
  });
  return out;
}

double recall_upper_bound(const std::vector<Qid>& golds, const std::set<Qid>& kb) {
  if (golds.empty()) throw DomainError("recall upper bound of an empty mention list");
  const auto covered = std::count_if(golds.begin(), golds.end(),
                                     [&](Qid q) { return kb.contains(q); });
  return static_cast<double>(covered) / static_cast<double>(golds.size());
}

double recall_upper_bound(const std::vector<Mention>& mentions, const std::set<Qid>& kb) {
  std::vector<Qid> golds;
  golds.reserve(mentions.size());
  for (const auto& m : mentions) golds.push_back(m.gold_qid);
  return recall_upper_bound(golds, kb);
}

double entity_set_intersection(const std::set<Qid>& eval_qids, const std::set<Qid>& kb_qids) {
  if (eval_qids.empty()) throw DomainError("set intersection over an empty evaluation set");
  const auto shared = std::count_if(eval_qids.begin(), eval_qids.end(),
                                    [&](Qid q) { return kb_qids.contains(q); });
  return static_cast<double>(shared) / static_cast<double>(eval_qids.size());
}

std::string select_description_language(Qid qid, const MentionCounts& counts,
                                        const std::set<std::string>& available) {
  if (available.empty()) throw ArgumentError("no candidate description languages");
  // std::set iterates in ascending order, so strict '>' keeps the smallest code on full ties.
  const std::string* best = nullptr;
  std::tuple<std::size_t, std::size_t> best_key{};
  for (const auto& lang : available) {
    const std::tuple key{counts.entity_count(qid, lang), counts.language_count(lang)};
    if (best == nullptr || key > best_key) {
      best = &lang;
      best_key = key;
    }
  }
  return *best;
}

}  // namespace linklab
