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
#include "linklab/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "linklab/embedding_io.hpp"
#include "linklab/error.hpp"

namespace linklab {

void TrainConfig::validate() const {
  if (batch_size < 2) throw ArgumentError("batch_size must be >= 2");
  if (neg < 1) throw ArgumentError("neg must be >= 1");
  if (context_size < 3) throw ArgumentError("context_size must be >= 3");
  if (!(logit_multiplier > 0.0)) throw ArgumentError("logit_multiplier must be > 0");
  if (!(lr > 0.0)) throw ArgumentError("lr must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ArgumentError("Adam betas must lie in [0, 1)");
  }
  if (!(eps > 0.0)) throw ArgumentError("eps must be > 0");
  if (!(decay > 0.0 && decay <= 1.0)) throw ArgumentError("decay must lie in (0, 1]");
  if (n_partitions < 1) throw ArgumentError("n_partitions must be >= 1");
  if (default_probes < 1 || default_probes > n_partitions) {
    throw ArgumentError("default_probes must lie in [1, n_partitions]");
  }
  if (retrieval_k < 1) throw ArgumentError("retrieval_k must be >= 1");
  if (vocab_size < 3) throw ArgumentError("vocab_size must be >= 3");
  if (dim < 1) throw ArgumentError("dim must be >= 1");
  if (eval_ks.empty()) throw ArgumentError("eval_ks must not be empty");
}

RowMatrix<double> TrainingBatch::targets() const {
  RowMatrix<double> t = RowMatrix<double>::Zero(static_cast<Eigen::Index>(size()), entity_ids.rows());
  for (std::size_t i = 0; i < gold_columns.size(); ++i) {
    t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(gold_columns[i])) = 1.0;
  }
  return t;
}

bool TrainingBatch::operator==(const TrainingBatch& other) const {
  return mention_ids.rows() == other.mention_ids.rows() &&
         mention_ids.cols() == other.mention_ids.cols() &&
         entity_ids.rows() == other.entity_ids.rows() &&
         entity_ids.cols() == other.entity_ids.cols() && mention_ids == other.mention_ids &&
         entity_ids == other.entity_ids && gold_columns == other.gold_columns;
}

AdamState AdamState::zeros_like(const EncoderParams<double>& params) {
  AdamState s;
  s.m = RowMatrix<double>::Zero(params.vocab_size(), params.dim());
  s.v = RowMatrix<double>::Zero(params.vocab_size(), params.dim());
  return s;
}

TrainingBatch build_batch(const PreparedMentions& sample, const SearchIndex& index,
                          const EncoderParams<double>& params, const TrainConfig& cfg,
                          std::mt19937_64& rng) {
  const std::size_t b = sample.golds.size();
  const std::size_t group = 1 + cfg.neg;
  const auto window = static_cast<Eigen::Index>(cfg.context_size);
  if (sample.windows.size() != b) throw ArgumentError("sample golds and windows differ in count");

  TrainingBatch batch;
  batch.mention_ids = to_token_block(sample.windows);
  if (batch.mention_ids.cols() != window) throw ArgumentError("mention windows do not match context_size");
  batch.entity_ids.resize(static_cast<Eigen::Index>(b * group), window);
  batch.entity_qids.resize(b * group);
  batch.gold_columns.resize(b);

  const auto queries = embed(params, batch.mention_ids);
  const auto put = [&](std::size_t col, Qid qid, std::span<const TokenId> tokens) {
    if (static_cast<Eigen::Index>(tokens.size()) != window) {
      throw ArgumentError("index token payload does not match context_size");
    }
    for (Eigen::Index c = 0; c < window; ++c) {
      batch.entity_ids(static_cast<Eigen::Index>(col), c) = tokens[static_cast<std::size_t>(c)];
    }
    batch.entity_qids[col] = qid;
  };
  for (std::size_t i = 0; i < b; ++i) {
    const Qid gold = sample.golds[i];
    const auto row = index.row_of(gold);
    if (!row) throw ArgumentError("gold entity " + to_string(gold) + " is not in the index");
    const std::size_t base = i * group;
    batch.gold_columns[i] = static_cast<std::uint32_t>(base);
    put(base, gold, index.row_tokens(*row));
    const auto negatives = query_negatives(index, queries.row(static_cast<Eigen::Index>(i)), gold,
                                           cfg.neg, cfg.retrieval_k, rng);
    for (std::size_t j = 0; j < negatives.size(); ++j) {
      put(base + 1 + j, negatives[j].qid, negatives[j].tokens);
    }
  }
  return batch;
}

RowMatrix<double> similarity_matrix(const RowMatrix<double>& mention_embs,
                                    const RowMatrix<double>& entity_embs) {
  if (mention_embs.cols() != entity_embs.cols()) {
    throw ArgumentError("mention and entity embeddings differ in width");
  }
  return mention_embs * entity_embs.transpose();
}

SoftmaxXent scaled_softmax_xent(std::span<const double> logits, std::size_t gold, double a) {
  if (!(a > 0.0)) throw ArgumentError("logit multiplier must be > 0");
  if (gold >= logits.size()) throw ArgumentError("gold column outside the logit row");
  double max_logit = -std::numeric_limits<double>::infinity();
  for (double z : logits) {
    if (!std::isfinite(z)) throw NumericError("non-finite logit");
    max_logit = std::max(max_logit, a * z);
  }
  SoftmaxXent out;
  out.probs.resize(logits.size());
  double total = 0.0;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    out.probs[j] = std::exp(a * logits[j] - max_logit);
    total += out.probs[j];
  }
  for (double& p : out.probs) p /= total;
  out.loss = -(a * logits[gold] - max_logit - std::log(total));
  return out;
}

BatchGradient batch_loss_and_gradient(const EncoderParams<double>& params,
                                      const TrainingBatch& batch, double a) {
  const auto mentions = embed(params, batch.mention_ids);
  const auto entities = embed(params, batch.entity_ids);
  const RowMatrix<double> sims = similarity_matrix(mentions, entities);
  const auto b = static_cast<double>(batch.size());

  BatchGradient out;
  RowMatrix<double> d_sims(sims.rows(), sims.cols());
  for (Eigen::Index i = 0; i < sims.rows(); ++i) {
    const auto gold = static_cast<std::size_t>(batch.gold_columns[static_cast<std::size_t>(i)]);
    const auto xent = scaled_softmax_xent(std::span<const double>(sims.row(i).data(), sims.cols()),
                                          gold, a);
    out.loss += xent.loss / b;
    for (Eigen::Index j = 0; j < sims.cols(); ++j) {
      d_sims(i, j) = a * xent.probs[static_cast<std::size_t>(j)] / b;
    }
    d_sims(i, static_cast<Eigen::Index>(gold)) -= a / b;
  }
  const RowMatrix<double> d_mentions = d_sims * entities;
  const RowMatrix<double> d_entities = d_sims.transpose() * mentions;
  out.grad = RowMatrix<double>::Zero(params.vocab_size(), params.dim());
  accumulate_embed_backward(params, batch.mention_ids, d_mentions, out.grad);
  accumulate_embed_backward(params, batch.entity_ids, d_entities, out.grad);
  return out;
}

double train_step(EncoderParams<double>& params, AdamState& adam, const TrainingBatch& batch,
                  const TrainConfig& cfg) {
  const auto g = batch_loss_and_gradient(params, batch, cfg.logit_multiplier);
  if (!std::isfinite(g.loss)) {
    throw NumericError("non-finite loss at step " + std::to_string(adam.t + 1));
  }
  if (adam.m.size() == 0) adam = AdamState::zeros_like(params);
  adam.t += 1;
  const double t = static_cast<double>(adam.t);
  const double lr = cfg.lr * std::pow(cfg.decay, t - 1.0);
  const double bias1 = 1.0 - std::pow(cfg.beta1, t);
  const double bias2 = 1.0 - std::pow(cfg.beta2, t);
  // Single fused pass; the table is large and the update is bandwidth-bound.
  const double step = lr / bias1;
  const double inv_bias2 = 1.0 / bias2;
  const double beta1 = cfg.beta1;
  const double beta2 = cfg.beta2;
  const double eps = cfg.eps;
  double* theta = params.table.data();
  double* m = adam.m.data();
  double* v = adam.v.data();
  const double* grad = g.grad.data();
  const Eigen::Index n = params.table.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
    theta[i] -= step * m[i] / (std::sqrt(v[i] * inv_bias2) + eps);
  }
  return g.loss;
}

MentionSampler::MentionSampler(const PreparedMentions& pool, std::uint64_t seed)
    : pool_(pool), rng_(seed), order_(pool.golds.size()) {
  std::iota(order_.begin(), order_.end(), 0);
  cursor_ = order_.size();
}

PreparedMentions MentionSampler::next(std::size_t b) {
  if (order_.size() < b) {
    throw ArgumentError("need at least " + std::to_string(b) + " training mentions, have " +
                        std::to_string(order_.size()));
  }
  PreparedMentions out;
  // A batch never holds the same mention twice, even across a pass boundary.
  std::vector<std::size_t> picked;
  while (picked.size() < b) {
    if (cursor_ == order_.size()) {
      std::shuffle(order_.begin(), order_.end(), rng_);
      cursor_ = 0;
    }
    const std::size_t idx = order_[cursor_++];
    if (std::find(picked.begin(), picked.end(), idx) != picked.end()) continue;
    picked.push_back(idx);
  }
  for (std::size_t idx : picked) {
    out.golds.push_back(pool_.golds[idx]);
    out.windows.push_back(pool_.windows[idx]);
  }
  return out;
}

std::vector<TrainingBatch> generate_epoch(const PreparedMentions& train, const SearchIndex& index,
                                          const EncoderParams<double>& params,
                                          const TrainConfig& cfg, std::size_t steps,
                                          std::uint64_t seed) {
  MentionSampler sampler(train, seed);
  std::mt19937_64 rng(seed ^ 0x5bd1e995ULL);
  std::vector<TrainingBatch> batches;
  batches.reserve(steps);
  for (std::size_t s = 0; s < steps; ++s) {
    batches.push_back(build_batch(sampler.next(cfg.batch_size), index, params, cfg, rng));
  }
  return batches;
}

std::uint64_t round_seed(std::uint64_t seed, std::size_t round) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(round) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

FinetuneState initial_state(const TrainConfig& cfg) {
  FinetuneState s;
  s.params = EncoderParams<double>::random(static_cast<Eigen::Index>(cfg.vocab_size),
                                           static_cast<Eigen::Index>(cfg.dim), cfg.seed);
  s.adam = AdamState::zeros_like(s.params);
  return s;
}

SearchIndex build_round_index(const EncoderParams<double>& params,
                              const PreparedEntities& descriptions, const TrainConfig& cfg,
                              std::uint64_t seed) {
  auto vectors = embed(params, to_token_block(descriptions.windows));
  const std::size_t parts = std::min(cfg.n_partitions, descriptions.qids.size());
  return SearchIndex::build(std::move(vectors), descriptions.qids, descriptions.windows, parts, seed,
                            std::min(cfg.default_probes, parts));
}

std::vector<Mention> linkable_mentions(const std::map<Qid, Entity>& kb,
                                       const std::vector<Mention>& mentions) {
  std::vector<Mention> out;
  out.reserve(mentions.size());
  for (const auto& m : mentions) {
    if (kb.contains(m.gold_qid)) out.push_back(m);
  }
  return out;
}

FinetuneResult run_finetuning(const std::map<Qid, Entity>& kb, const std::vector<Mention>& train,
                              const std::vector<Mention>& eval, const TrainConfig& cfg,
                              FinetuneState start, const FinetuneHooks& hooks) {
  cfg.validate();
  const Vocabulary vocab(cfg.vocab_size);
  FinetuneResult result{std::move(start), nullptr};
  auto& state = result.state;

  EvalConfig eval_cfg;
  eval_cfg.ks = cfg.eval_ks;
  eval_cfg.kb_mode = cfg.eval_kb_mode;
  eval_cfg.context_size = cfg.context_size;
  eval_cfg.n_partitions = cfg.n_partitions;
  eval_cfg.probes = cfg.default_probes;
  eval_cfg.seed = cfg.seed;

  try {
    const auto usable = linkable_mentions(kb, train);
    const auto prepared = prepare_mentions(usable, cfg.context_size, vocab);
    const auto descriptions = prepare_descriptions(kb, cfg.context_size, vocab);

    if (state.reports.empty()) {
      state.reports.push_back(evaluate(state.params, kb, eval, &usable, eval_cfg, vocab));
      if (hooks.on_round_end) hooks.on_round_end(0, state);
    }
    for (std::size_t round = state.completed_rounds + 1; round <= cfg.rounds; ++round) {
      const std::uint64_t seed = round_seed(cfg.seed, round);
      const auto index = build_round_index(state.params, descriptions, cfg, seed);
      const auto batches =
          generate_epoch(prepared, index, state.params, cfg, cfg.steps_for_round(round), seed);
      if (hooks.on_epoch) hooks.on_epoch(round, batches);
      for (std::size_t step = 0; step < batches.size(); ++step) {
        const double loss = train_step(state.params, state.adam, batches[step], cfg);
        if (hooks.on_step) hooks.on_step(round, step, loss);
      }
      state.reports.push_back(evaluate(state.params, kb, eval, &usable, eval_cfg, vocab));
      state.completed_rounds = round;
      if (hooks.on_round_end) hooks.on_round_end(round, state);
    }
  } catch (...) {
    result.failure = std::current_exception();
  }
  return result;
}

}  // namespace linklab
