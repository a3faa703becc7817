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

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "linklab/error.hpp"
#include "linklab/tokenizer.hpp"

namespace linklab {

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// m x W block of token ids, one window per row.
using TokenBlock = Eigen::Matrix<TokenId, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Rows are L2-normalized embeddings.
template <typename Scalar>
using EmbeddingMatrix = RowMatrix<Scalar>;

/// One token-embedding table shared by mentions and entities.
template <typename Scalar>
struct EncoderParams {
  RowMatrix<Scalar> table;  // V x d

  Eigen::Index vocab_size() const { return table.rows(); }
  Eigen::Index dim() const { return table.cols(); }

  /// i.i.d. uniform in [-0.05, 0.05] from a seeded generator.
  static EncoderParams random(Eigen::Index vocab_size, Eigen::Index dim, std::uint64_t seed) {
    EncoderParams p;
    p.table.resize(vocab_size, dim);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-0.05, 0.05);
    for (Eigen::Index i = 0; i < p.table.size(); ++i) {
      p.table.data()[i] = static_cast<Scalar>(dist(rng));
    }
    return p;
  }
};

namespace detail {

template <typename Scalar>
void check_ids(const EncoderParams<Scalar>& params, const TokenBlock& batch) {
  for (Eigen::Index i = 0; i < batch.size(); ++i) {
    const TokenId t = batch.data()[i];
    if (t < 0 || t >= params.vocab_size()) {
      throw ArgumentError("token id " + std::to_string(t) + " outside vocabulary of size " +
                          std::to_string(params.vocab_size()));
    }
  }
}

/// Mean of table rows over non-PAD positions; an all-PAD row averages PAD.
template <typename Scalar>
Eigen::Matrix<Scalar, 1, Eigen::Dynamic> pooled_row(const EncoderParams<Scalar>& params,
                                                    const TokenBlock& batch, Eigen::Index r,
                                                    Eigen::Index& count) {
  Eigen::Matrix<Scalar, 1, Eigen::Dynamic> sum =
      Eigen::Matrix<Scalar, 1, Eigen::Dynamic>::Zero(params.dim());
  count = 0;
  for (Eigen::Index c = 0; c < batch.cols(); ++c) {
    const TokenId t = batch(r, c);
    if (t == kPad) continue;
    sum += params.table.row(t);
    ++count;
  }
  if (count == 0) {
    sum = params.table.row(kPad);
    return sum;
  }
  return sum / static_cast<Scalar>(count);
}

}  // namespace detail

/// Mean-pool over non-PAD tokens, then L2-normalize each row.
template <typename Scalar>
EmbeddingMatrix<Scalar> embed(const EncoderParams<Scalar>& params, const TokenBlock& batch) {
  detail::check_ids(params, batch);
  EmbeddingMatrix<Scalar> out(batch.rows(), params.dim());
  for (Eigen::Index r = 0; r < batch.rows(); ++r) {
    Eigen::Index count = 0;
    const auto pooled = detail::pooled_row(params, batch, r, count);
    const Scalar norm = pooled.norm();
    if (!(norm > Scalar(0)) || !std::isfinite(static_cast<double>(norm))) {
      throw NumericError("embedding row " + std::to_string(r) + " has norm " +
                         std::to_string(static_cast<double>(norm)));
    }
    out.row(r) = pooled / norm;
  }
  return out;
}

/// Adds d(loss)/d(table) to `grad` given d(loss)/d(embeddings) in `upstream`.
/// Per row: g_y = (I - y_hat y_hat^T) g / |y|, then g_y / count to each
/// contributing token (PAD itself for all-PAD rows).
template <typename Scalar>
void accumulate_embed_backward(const EncoderParams<Scalar>& params, const TokenBlock& batch,
                               const RowMatrix<Scalar>& upstream, RowMatrix<Scalar>& grad) {
  if (upstream.rows() != batch.rows() || upstream.cols() != params.dim() ||
      grad.rows() != params.vocab_size() || grad.cols() != params.dim()) {
    throw ArgumentError("embed_backward shape mismatch");
  }
  detail::check_ids(params, batch);
  for (Eigen::Index r = 0; r < batch.rows(); ++r) {
    Eigen::Index count = 0;
    const auto pooled = detail::pooled_row(params, batch, r, count);
    const Scalar norm = pooled.norm();
    const auto unit = (pooled / norm).eval();
    const auto g = upstream.row(r);
    Eigen::Matrix<Scalar, 1, Eigen::Dynamic> g_pooled = (g - g.dot(unit) * unit) / norm;
    if (count == 0) {
      grad.row(kPad) += g_pooled;
      continue;
    }
    g_pooled /= static_cast<Scalar>(count);
    for (Eigen::Index c = 0; c < batch.cols(); ++c) {
      const TokenId t = batch(r, c);
      if (t != kPad) grad.row(t) += g_pooled;
    }
  }
}

template <typename Scalar>
RowMatrix<Scalar> embed_backward(const EncoderParams<Scalar>& params, const TokenBlock& batch,
                                 const RowMatrix<Scalar>& upstream) {
  RowMatrix<Scalar> grad = RowMatrix<Scalar>::Zero(params.vocab_size(), params.dim());
  accumulate_embed_backward(params, batch, upstream, grad);
  return grad;
}

/// Packs equal-length id rows into a block.
TokenBlock to_token_block(const std::vector<std::vector<TokenId>>& rows);

}  // namespace linklab
