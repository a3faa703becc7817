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
#include "linklab/windows.hpp"

#include <string_view>
#include <unordered_map>

namespace linklab {

PreparedMentions prepare_mentions(const std::vector<Mention>& mentions, std::size_t window,
                                  const Vocabulary& vocab) {
  PreparedMentions out;
  out.golds.reserve(mentions.size());
  out.windows.reserve(mentions.size());
  std::unordered_map<std::string_view, TokenizedDoc> docs;
  for (const auto& m : mentions) {
    auto it = docs.find(m.context_text);
    if (it == docs.end()) it = docs.emplace(m.context_text, tokenize(m.context_text, vocab)).first;
    auto w = extract_mention_window(it->second, {m.start, m.end}, window);
    out.truncated += w.truncated ? 1 : 0;
    out.golds.push_back(m.gold_qid);
    out.windows.push_back(std::move(w.ids));
  }
  return out;
}

PreparedEntities prepare_descriptions(const std::map<Qid, Entity>& entities, std::size_t window,
                                      const Vocabulary& vocab) {
  PreparedEntities out;
  out.qids.reserve(entities.size());
  out.windows.reserve(entities.size());
  for (const auto& [qid, e] : entities) {
    out.qids.push_back(qid);
    out.windows.push_back(compose_description(e.label, e.body(), window, vocab));
  }
  return out;
}

}  // namespace linklab
