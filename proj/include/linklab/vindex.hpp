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
#include <optional>
#include <random>
#include <span>
#include <unordered_map>
#include <vector>

#include "linklab/encoder.hpp"
#include "linklab/kb.hpp"

namespace linklab {

struct SearchHit {
  std::size_t row = 0;
  Qid qid;
  double score = 0.0;

  bool operator==(const SearchHit&) const = default;
};

/// Descending score, then ascending row.
inline bool hit_before(const SearchHit& a, const SearchHit& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.row < b.row;
}

struct NegativeSample {
  std::size_t row = 0;
  Qid qid;
  std::span<const TokenId> tokens;
};

/// Immutable maximum-inner-product index over unit rows. Rows are grouped
/// into partitions by spherical k-means; a search scans the `probes`
/// partitions whose centroids score highest against the query, so
/// probes == n_partitions is an exact search.
class SearchIndex {
 public:
  using Vector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

  /// Throws ArgumentError when n_partitions is 0 or exceeds the row count,
  /// or when payload sizes disagree with the row count.
  static SearchIndex build(EmbeddingMatrix<double> vectors, std::vector<Qid> qids,
                           std::vector<std::vector<TokenId>> tokens, std::size_t n_partitions,
                           std::uint64_t seed, std::size_t default_probes = 1);

  std::size_t size() const { return qids_.size(); }
  Eigen::Index dim() const { return vectors_.cols(); }
  std::size_t n_partitions() const { return static_cast<std::size_t>(centroids_.rows()); }
  std::size_t default_probes() const { return default_probes_; }

  const EmbeddingMatrix<double>& vectors() const { return vectors_; }
  const RowMatrix<double>& centroids() const { return centroids_; }
  const std::vector<std::size_t>& assignment() const { return assignment_; }
  Qid row_qid(std::size_t row) const { return qids_[row]; }
  const std::vector<Qid>& qids() const { return qids_; }
  std::span<const TokenId> row_tokens(std::size_t row) const { return tokens_[row]; }
  const std::vector<std::vector<TokenId>>& tokens() const { return tokens_; }
  /// First row carrying `qid`, if any.
  std::optional<std::size_t> row_of(Qid qid) const;

  /// Top-k rows by dot product among the probed partitions.
  std::vector<SearchHit> search(const Vector& query, std::size_t k,
                                std::optional<std::size_t> probes = std::nullopt) const;

 private:
  SearchIndex() = default;

  EmbeddingMatrix<double> vectors_;
  std::vector<Qid> qids_;
  std::vector<std::vector<TokenId>> tokens_;
  RowMatrix<double> centroids_;
  std::vector<std::size_t> assignment_;
  std::vector<std::vector<std::size_t>> members_;
  std::unordered_map<Qid, std::size_t> first_row_;
  std::size_t default_probes_ = 1;
};

/// Removes hits whose qid equals the previous hit's qid.
std::vector<SearchHit> collapse_runs(const std::vector<SearchHit>& hits);

/// Hard negatives for one mention: retrieve k0 neighbours, drop the gold
/// entity, collapse repeated entities, double k until `neg` distinct
/// entities survive, then sample `neg` of them without replacement.
/// Throws InsufficientNegativesError when the index cannot supply them.
std::vector<NegativeSample> query_negatives(const SearchIndex& index,
                                            const SearchIndex::Vector& query, Qid gold,
                                            std::size_t neg, std::size_t k0,
                                            std::mt19937_64& rng);

}  // namespace linklab
