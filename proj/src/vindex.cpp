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
#include "linklab/vindex.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <unordered_set>

#include "linklab/error.hpp"

namespace linklab {

namespace {

constexpr int kKmeansIterations = 10;

std::size_t nearest_centroid(const RowMatrix<double>& centroids,
                             const Eigen::Ref<const SearchIndex::Vector>& v) {
  std::size_t best = 0;
  double best_score = centroids.row(0).dot(v);
  for (Eigen::Index c = 1; c < centroids.rows(); ++c) {
    const double s = centroids.row(c).dot(v);
    if (s > best_score) {
      best_score = s;
      best = static_cast<std::size_t>(c);
    }
  }
  return best;
}

}  // namespace

SearchIndex SearchIndex::build(EmbeddingMatrix<double> vectors, std::vector<Qid> qids,
                               std::vector<std::vector<TokenId>> tokens, std::size_t n_partitions,
                               std::uint64_t seed, std::size_t default_probes) {
  const auto n = static_cast<std::size_t>(vectors.rows());
  if (qids.size() != n || tokens.size() != n) {
    throw ArgumentError("index payloads do not match the row count");
  }
  if (n_partitions < 1 || n_partitions > n) {
    throw ArgumentError("n_partitions must lie in [1, " + std::to_string(n) + "], got " +
                        std::to_string(n_partitions));
  }
  if (default_probes < 1 || default_probes > n_partitions) {
    throw ArgumentError("default_probes must lie in [1, n_partitions]");
  }

  SearchIndex index;
  index.vectors_ = std::move(vectors);
  index.qids_ = std::move(qids);
  index.tokens_ = std::move(tokens);
  index.default_probes_ = default_probes;

  // Seed centroids with distinct random rows (partial Fisher-Yates).
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = 0; i < n_partitions; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  auto& centroids = index.centroids_;
  centroids.resize(static_cast<Eigen::Index>(n_partitions), index.vectors_.cols());
  for (std::size_t c = 0; c < n_partitions; ++c) {
    centroids.row(static_cast<Eigen::Index>(c)) = index.vectors_.row(static_cast<Eigen::Index>(order[c]));
  }

  auto& assignment = index.assignment_;
  assignment.assign(n, 0);
  if (n_partitions > 1) {
    for (int it = 0; it < kKmeansIterations; ++it) {
      for (std::size_t r = 0; r < n; ++r) {
        assignment[r] = nearest_centroid(centroids, index.vectors_.row(static_cast<Eigen::Index>(r)));
      }
      RowMatrix<double> sums = RowMatrix<double>::Zero(centroids.rows(), centroids.cols());
      std::vector<std::size_t> counts(n_partitions, 0);
      for (std::size_t r = 0; r < n; ++r) {
        sums.row(static_cast<Eigen::Index>(assignment[r])) += index.vectors_.row(static_cast<Eigen::Index>(r));
        ++counts[assignment[r]];
      }
      for (std::size_t c = 0; c < n_partitions; ++c) {
        const double norm = sums.row(static_cast<Eigen::Index>(c)).norm();
        // Empty or cancelled-out clusters keep their previous centroid.
        if (counts[c] > 0 && norm > 0.0) {
          centroids.row(static_cast<Eigen::Index>(c)) = sums.row(static_cast<Eigen::Index>(c)) / norm;
        }
      }
    }
    for (std::size_t r = 0; r < n; ++r) {
      assignment[r] = nearest_centroid(centroids, index.vectors_.row(static_cast<Eigen::Index>(r)));
    }
  }
  index.members_.assign(n_partitions, {});
  for (std::size_t r = 0; r < n; ++r) index.members_[assignment[r]].push_back(r);
  for (std::size_t r = 0; r < n; ++r) index.first_row_.try_emplace(index.qids_[r], r);
  return index;
}

std::optional<std::size_t> SearchIndex::row_of(Qid qid) const {
  auto it = first_row_.find(qid);
  if (it == first_row_.end()) return std::nullopt;
  return it->second;
}

std::vector<SearchHit> SearchIndex::search(const Vector& query, std::size_t k,
                                           std::optional<std::size_t> probes) const {
  if (k < 1) throw ArgumentError("search k must be >= 1");
  if (query.cols() != dim()) {
    throw ArgumentError("query has dimension " + std::to_string(query.cols()) + ", index has " +
                        std::to_string(dim()));
  }
  const std::size_t p = std::clamp<std::size_t>(probes.value_or(default_probes_), 1, n_partitions());

  std::vector<std::size_t> parts(n_partitions());
  std::iota(parts.begin(), parts.end(), 0);
  if (p < parts.size()) {
    std::vector<double> cscore(parts.size());
    for (std::size_t c = 0; c < parts.size(); ++c) {
      cscore[c] = centroids_.row(static_cast<Eigen::Index>(c)).dot(query);
    }
    std::partial_sort(parts.begin(), parts.begin() + static_cast<std::ptrdiff_t>(p), parts.end(),
                      [&](std::size_t a, std::size_t b) {
                        return cscore[a] != cscore[b] ? cscore[a] > cscore[b] : a < b;
                      });
    parts.resize(p);
  }

  std::vector<SearchHit> hits;
  for (std::size_t c : parts) {
    for (std::size_t r : members_[c]) {
      hits.push_back({r, qids_[r], vectors_.row(static_cast<Eigen::Index>(r)).dot(query)});
    }
  }
  const std::size_t keep = std::min(k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(keep), hits.end(),
                    hit_before);
  hits.resize(keep);
  return hits;
}

std::vector<SearchHit> collapse_runs(const std::vector<SearchHit>& hits) {
  std::vector<SearchHit> out;
  out.reserve(hits.size());
  for (const auto& h : hits) {
    if (out.empty() || out.back().qid != h.qid) out.push_back(h);
  }
  return out;
}

std::vector<NegativeSample> query_negatives(const SearchIndex& index,
                                            const SearchIndex::Vector& query, Qid gold,
                                            std::size_t neg, std::size_t k0,
                                            std::mt19937_64& rng) {
  if (k0 < 1) throw ArgumentError("retrieval k must be >= 1");
  if (neg < 1) throw ArgumentError("neg must be >= 1");
  const std::size_t n = index.size();

  std::vector<SearchHit> pool;
  std::size_t k = std::min(k0, n);
  for (;;) {
    // Once k covers the whole index, probe every partition so that a
    // shortfall really means the index lacks negatives.
    const bool full = k >= n;
    const auto hits = index.search(query, k, full ? std::optional(index.n_partitions()) : std::nullopt);
    std::vector<SearchHit> filtered;
    filtered.reserve(hits.size());
    for (const auto& h : hits) {
      if (h.qid != gold) filtered.push_back(h);
    }
    pool = collapse_runs(filtered);
    std::unordered_set<Qid> distinct;
    for (const auto& h : pool) distinct.insert(h.qid);
    if (distinct.size() >= neg) break;
    if (full) {
      throw InsufficientNegativesError("index holds " + std::to_string(distinct.size()) +
                                       " entities other than " + to_string(gold) + ", need " +
                                       std::to_string(neg));
    }
    k = std::min(2 * k, n);
  }

  // Uniform sampling without replacement over the pool; a qid already drawn
  // (possible only when duplicates were not adjacent) is skipped.
  std::vector<NegativeSample> out;
  std::unordered_set<Qid> taken;
  for (std::size_t i = 0; i < pool.size() && out.size() < neg; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
    if (!taken.insert(pool[i].qid).second) continue;
    out.push_back({pool[i].row, pool[i].qid, index.row_tokens(pool[i].row)});
  }
  return out;
}

}  // namespace linklab
