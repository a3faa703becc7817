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
#include <vector>

#include "linklab/kb.hpp"
#include "linklab/tokenizer.hpp"

namespace linklab {

/// Token windows for a set of mentions. Each distinct context document is
/// tokenized once and every mention in it is cut from that single pass.
struct PreparedMentions {
  std::vector<Qid> golds;
  std::vector<std::vector<TokenId>> windows;
  std::size_t truncated = 0;
};

PreparedMentions prepare_mentions(const std::vector<Mention>& mentions, std::size_t window,
                                  const Vocabulary& vocab);

struct PreparedEntities {
  std::vector<Qid> qids;
  std::vector<std::vector<TokenId>> windows;
};

/// compose_description over every entity, in qid order.
PreparedEntities prepare_descriptions(const std::map<Qid, Entity>& entities, std::size_t window,
                                      const Vocabulary& vocab);

}  // namespace linklab
