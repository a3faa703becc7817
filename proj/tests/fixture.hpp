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
// Small in-memory toyland corpus shared by the pipeline tests.
#pragma once

#include <map>
#include <vector>

#include "linklab/kb.hpp"
#include "linklab/toyland.hpp"

namespace linklab::testing {

struct Corpus {
  std::map<Qid, Entity> kb;
  std::vector<Mention> train;
  std::vector<Mention> eval;
};

inline Corpus small_corpus(std::size_t entities = 24, std::uint64_t seed = 5) {
  ToylandConfig cfg;
  cfg.seed = seed;
  cfg.n_entities = entities;
  cfg.mentions_per_entity = 6;
  cfg.train_per_entity = 4;
  cfg.homonym_pairs = 2;
  const Toyland t = generate_toyland(cfg);
  Corpus c;
  c.kb = load_kb(t.kb_jsonl, cfg.language).entities;
  c.train = extract_mentions(t.train_jsonl, cfg.language).mentions;
  c.eval = extract_mentions(t.eval_jsonl, cfg.language).mentions;
  return c;
}

}  // namespace linklab::testing
