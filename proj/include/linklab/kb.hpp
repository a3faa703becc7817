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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace linklab {

/// Entity identifier. Positive; rendered with a "Q" prefix at I/O boundaries.
struct Qid {
  std::uint64_t value = 0;

  auto operator<=>(const Qid&) const = default;
};

/// Accepts "Q62", "62" or a bare number. Throws FormatError otherwise.
Qid parse_qid(std::string_view text);
std::string to_string(Qid qid);

struct Entity {
  Qid qid;
  std::string label;
  std::optional<std::string> description;
  std::optional<std::string> wiki_title;
  std::optional<std::string> wiki_text;
  std::string language;

  /// Text used for the body of the entity description: the article when
  /// present, else the short description, else empty.
  const std::string& body() const;
};

/// A linked surface span inside a context document. Offsets count Unicode
/// scalar values.
struct Mention {
  std::string doc_id;
  std::string surface;
  std::size_t start = 0;
  std::size_t end = 0;
  std::string context_text;
  Qid gold_qid;
  std::string language;
};

struct KbPartition {
  std::string language;
  std::map<Qid, Entity> entities;
  std::size_t skipped_lines = 0;
};

struct MentionExtraction {
  std::vector<Mention> mentions;
  std::size_t dropped_empty = 0;
  std::size_t skipped_out_of_bounds = 0;
  std::size_t skipped_lines = 0;
};

class KnowledgeBase {
 public:
  /// Adds or replaces the partition for `part.language`. Throws ArgumentError
  /// when an entity's language disagrees with the partition key.
  void add_partition(KbPartition part);

  const std::map<std::string, std::map<Qid, Entity>>& partitions() const { return partitions_; }
  const std::map<Qid, Entity>& partition(const std::string& language) const;
  const Entity* find(const std::string& language, Qid qid) const;

  std::size_t entity_count(const std::string& language) const;
  std::set<Qid> qids() const;
  std::set<Qid> qids(const std::string& language) const;

 private:
  std::map<std::string, std::map<Qid, Entity>> partitions_;
};

/// n_e(l) and n(l): per-entity and per-language mention counts.
struct MentionCounts {
  std::map<std::pair<Qid, std::string>, std::size_t> per_entity;
  std::map<std::string, std::size_t> per_language;

  void add(Qid qid, const std::string& language, std::size_t n = 1);
  std::size_t entity_count(Qid qid, const std::string& language) const;
  std::size_t language_count(const std::string& language) const;
};

MentionCounts count_mentions(const std::vector<Mention>& mentions);

/// Parses one entity per JSONL line. Lines that are not JSON objects or lack
/// qid/label are skipped and counted.
KbPartition load_kb(std::string_view jsonl, const std::string& language);
KbPartition load_kb_file(const std::string& path, const std::string& language);

/// One Mention per wiki link with a non-empty in-bounds span.
MentionExtraction extract_mentions(std::string_view jsonl, const std::string& language);

/// Serializes entities back to the input schema (qid, label, description,
/// wiki.title, wiki.text).
std::string dump_kb(const std::map<Qid, Entity>& entities);

/// Mention store: one JSON object per line.
std::string dump_mentions(const std::vector<Mention>& mentions);
std::vector<Mention> load_mentions(std::string_view jsonl);

/// Fraction of mention occurrences whose gold entity is in `kb`.
/// Throws DomainError on an empty mention list.
double recall_upper_bound(const std::vector<Mention>& mentions, const std::set<Qid>& kb);
double recall_upper_bound(const std::vector<Qid>& golds, const std::set<Qid>& kb);

/// |eval ∩ kb| / |eval|. Throws DomainError when eval_qids is empty.
double entity_set_intersection(const std::set<Qid>& eval_qids, const std::set<Qid>& kb_qids);

/// Picks the description language for an entity: most mentions of the
/// entity, then most mentions overall, then smallest language code.
std::string select_description_language(Qid qid, const MentionCounts& counts,
                                        const std::set<std::string>& available);

}  // namespace linklab

template <>
struct std::hash<linklab::Qid> {
  std::size_t operator()(const linklab::Qid& q) const noexcept {
    return std::hash<std::uint64_t>{}(q.value);
  }
};
