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
#include <filesystem>
#include <string>

namespace linklab {

/// Synthetic desk-scale corpus. Entities carry a 2-3 token label and a
/// 40-80 token article containing it; every entity is linked from
/// `mentions_per_entity` distinct 60-120 token documents, a fraction of
/// them with a suffix glued to the surface ("Label'da").
struct ToylandConfig {
  std::uint64_t seed = 20240601;
  std::size_t n_entities = 200;
  std::size_t mentions_per_entity = 20;
  std::size_t train_per_entity = 15;
  double inflected_fraction = 0.1;
  /// Pairs of entities sharing one label.
  std::size_t homonym_pairs = 10;
  std::string language = "tr";
};

/// Three JSONL dumps in the ingestion schema: the KB itself and two
/// document collections whose wiki links are the train/eval mentions.
struct Toyland {
  std::string kb_jsonl;
  std::string train_jsonl;
  std::string eval_jsonl;
};

Toyland generate_toyland(const ToylandConfig& cfg);

/// Writes kb.jsonl, train.jsonl and eval.jsonl into `dir`.
void write_toyland(const Toyland& corpus, const std::filesystem::path& dir);

}  // namespace linklab
