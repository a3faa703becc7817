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

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "linklab/encoder.hpp"
#include "linklab/kb.hpp"

namespace linklab {

struct LabeledEmbeddings {
  EmbeddingMatrix<double> rows;
  std::vector<Qid> qids;
};

/// Header `n d`, then `Q<id><TAB>v1 v2 ... vd` per row.
std::string dump_embeddings(const EmbeddingMatrix<double>& rows, const std::vector<Qid>& qids);

/// Rows are re-normalized on load. Throws FormatError on ragged or
/// non-numeric rows.
LabeledEmbeddings parse_embeddings(std::string_view text);
LabeledEmbeddings load_embeddings(const std::filesystem::path& path);
void save_embeddings(const std::filesystem::path& path, const EmbeddingMatrix<double>& rows,
                     const std::vector<Qid>& qids);

/// Binary parameter checkpoint: magic, V, d, then V*d little-endian doubles.
void save_params(const std::filesystem::path& path, const EncoderParams<double>& params);
EncoderParams<double> load_params(const std::filesystem::path& path);

/// Index token sidecar: `Q<id><TAB>id id id ...` per row.
std::string dump_token_rows(const std::vector<Qid>& qids,
                            const std::vector<std::vector<TokenId>>& tokens);
void parse_token_rows(std::string_view text, std::vector<Qid>& qids,
                      std::vector<std::vector<TokenId>>& tokens);

}  // namespace linklab
