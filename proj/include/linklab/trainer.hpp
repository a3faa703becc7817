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
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <span>
#include <vector>

#include "linklab/encoder.hpp"
#include "linklab/evaluator.hpp"
#include "linklab/kb.hpp"
#include "linklab/vindex.hpp"
#include "linklab/windows.hpp"

namespace linklab {

struct TrainConfig {
  std::size_t batch_size = 32;
  std::size_t neg = 7;
  std::size_t context_size = 64;
  double logit_multiplier = 50.0;
  double lr = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double decay = 1.0;  // per-step lr multiplier
  std::size_t steps_round1 = 20000;
  std::size_t steps_later = 100000;
  std::size_t rounds = 5;
  std::size_t n_partitions = 1;
  std::size_t default_probes = 1;
  std::size_t retrieval_k = 100;
  std::uint64_t seed = 0;
  std::size_t vocab_size = 65536;
  std::size_t dim = 32;
  KbMode eval_kb_mode = KbMode::kDescriptions;
  std::vector<std::size_t> eval_ks{1, 10};

  /// Throws ArgumentError on b < 2, neg < 1, a <= 0 and similar.
  void validate() const;
  std::size_t columns() const { return batch_size * (1 + neg); }
  std::size_t steps_for_round(std::size_t round) const {
    return round <= 1 ? steps_round1 : steps_later;
  }
};

/// b mentions against b(1+neg) entities. Entities of mention i occupy
/// columns [i(1+neg), (i+1)(1+neg)) with the positive first.
struct TrainingBatch {
  TokenBlock mention_ids;            // b x W
  TokenBlock entity_ids;             // b(1+neg) x W
  std::vector<std::uint32_t> gold_columns;
  std::vector<Qid> entity_qids;      // not persisted in epoch files

  std::size_t size() const { return gold_columns.size(); }
  /// One-hot b x b(1+neg) targets.
  RowMatrix<double> targets() const;
  bool operator==(const TrainingBatch& other) const;
};

struct AdamState {
  RowMatrix<double> m;
  RowMatrix<double> v;
  std::uint64_t t = 0;

  static AdamState zeros_like(const EncoderParams<double>& params);
};

/// Builds one batch from `sample.size()` prepared mentions. Negatives come
/// from query_negatives over `index`. Throws ArgumentError when a gold
/// entity has no index row.
TrainingBatch build_batch(const PreparedMentions& sample, const SearchIndex& index,
                          const EncoderParams<double>& params, const TrainConfig& cfg,
                          std::mt19937_64& rng);

/// b x b(1+neg) cosine matrix of unit-row embeddings.
RowMatrix<double> similarity_matrix(const RowMatrix<double>& mention_embs,
                                    const RowMatrix<double>& entity_embs);

struct SoftmaxXent {
  double loss = 0.0;
  std::vector<double> probs;
};

/// probs = softmax(a * logits), loss = -log probs[gold]. Stabilized by
/// subtracting the maximum logit. Throws NumericError on non-finite input.
SoftmaxXent scaled_softmax_xent(std::span<const double> logits, std::size_t gold, double a);

struct BatchGradient {
  double loss = 0.0;  // mean over rows
  RowMatrix<double> grad;
};

/// Mean scaled-softmax cross-entropy of a batch and its gradient with
/// respect to the token table.
BatchGradient batch_loss_and_gradient(const EncoderParams<double>& params,
                                      const TrainingBatch& batch, double a);

/// One Adam update at rate lr * decay^(t-1). Returns the batch loss.
double train_step(EncoderParams<double>& params, AdamState& adam, const TrainingBatch& batch,
                  const TrainConfig& cfg);

/// gzip stream: header `b neg W n_batches` then per batch the mention ids,
/// entity ids and gold columns, all little-endian 32-bit.
void save_epoch(const std::filesystem::path& path, const std::vector<TrainingBatch>& batches,
                std::size_t b, std::size_t neg, std::size_t window);

struct Epoch {
  std::size_t batch_size = 0;
  std::size_t neg = 0;
  std::size_t window = 0;
  std::vector<TrainingBatch> batches;
};

/// Throws FormatError on a corrupt or truncated file.
Epoch load_epoch(const std::filesystem::path& path);

/// Draws b-mention samples uniformly without replacement within a pass over
/// the data, reshuffling at the start of every pass.
class MentionSampler {
 public:
  MentionSampler(const PreparedMentions& pool, std::uint64_t seed);

  PreparedMentions next(std::size_t b);

 private:
  const PreparedMentions& pool_;
  std::mt19937_64 rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

/// Generates `steps` batches for a round with frozen params and index.
std::vector<TrainingBatch> generate_epoch(const PreparedMentions& train, const SearchIndex& index,
                                          const EncoderParams<double>& params,
                                          const TrainConfig& cfg, std::size_t steps,
                                          std::uint64_t round_seed);

struct FinetuneState {
  EncoderParams<double> params;
  AdamState adam;
  std::vector<EvalReport> reports;  // reports[r] belongs to round r
  std::size_t completed_rounds = 0;
};

struct FinetuneHooks {
  std::function<void(std::size_t round, const std::vector<TrainingBatch>&)> on_epoch;
  std::function<void(std::size_t round, const FinetuneState&)> on_round_end;
  std::function<void(std::size_t round, std::size_t step, double loss)> on_step;
};

struct FinetuneResult {
  FinetuneState state;
  std::exception_ptr failure;  // set when a round aborted; reports stay valid
};

/// Seed for everything random inside round `round`.
std::uint64_t round_seed(std::uint64_t seed, std::size_t round);

/// Fresh state: random params from cfg.seed and zero Adam moments.
FinetuneState initial_state(const TrainConfig& cfg);

// Index over the description windows, rebuilt at the start of every round.
SearchIndex build_round_index(const EncoderParams<double>& params,
                              const PreparedEntities& descriptions, const TrainConfig& cfg,
                              std::uint64_t seed);

// Mentions whose gold entity is present in kb; the rest cannot be trained on.
std::vector<Mention> linkable_mentions(const std::map<Qid, Entity>& kb,
                                       const std::vector<Mention>& mentions);

/// Rounds 1..cfg.rounds of index rebuild, epoch generation, training and
/// evaluation, starting after `start.completed_rounds`. Round 0 (the
/// untrained model) is evaluated first when no report exists yet.
FinetuneResult run_finetuning(const std::map<Qid, Entity>& kb, const std::vector<Mention>& train,
                              const std::vector<Mention>& eval, const TrainConfig& cfg,
                              FinetuneState start, const FinetuneHooks& hooks = {});

}  // namespace linklab
