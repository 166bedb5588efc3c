#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dvngram/corpus.hpp"
#include "dvngram/model.hpp"
#include "dvngram/random.hpp"

namespace dvngram {

struct TrainingPair {
  DocId doc_id = 0;
  TokenId target = 0;
};

struct EpochReport {
  int epoch = 0;
  double mean_objective = 0.0;
  std::uint64_t pairs_processed = 0;
  double wall_seconds = 0.0;
};

/// Negative-sampling objective of one (document, token) pair with the given
/// negatives: log σ(s) + Σ_j log σ(-s_j). Always <= 0.
template <class Real>
double pair_objective(const EmbeddingModel<Real>& model, TrainingPair pair,
                      std::span<const TokenId> negatives);

/// One step of gradient ascent on pair_objective with fixed negatives.
///
/// All sigmoids and gradients are taken at the pre-update parameters; a row
/// that appears more than once (a negative equal to the target, or a repeated
/// negative) receives the sum of its contributions. Returns the objective at
/// the pre-update parameters.
template <class Real>
double sgd_step(EmbeddingModel<Real>& model, TrainingPair pair, std::span<const TokenId> negatives,
                double learning_rate);

/// Draws `k` negatives from `noise` and applies sgd_step.
template <class Real>
double sgd_step(EmbeddingModel<Real>& model, TrainingPair pair, const NoiseTable& noise,
                double learning_rate, int k, Rng& rng);

/// Flattens the corpus into its (document, token) pair stream, in document
/// order then token order.
std::vector<TrainingPair> make_pairs(std::span<const EncodedDocument> corpus);

/// Called after every epoch with the report and the trainer's generator
/// state (for checkpoints).
using EpochCallback = std::function<void(const EpochReport&, const Rng&)>;

struct TrainOptions {
  // Only document vectors move; used to infer vectors for held-out documents.
  bool freeze_token_vectors = false;
  EpochCallback on_epoch;
};

/// Serial reference trainer; bit-reproducible for a fixed seed.
template <class Real>
std::vector<EpochReport> train_reference(EmbeddingModel<Real>& model,
                                         std::span<const EncodedDocument> corpus,
                                         const NoiseTable& noise, const TrainConfig& config,
                                         const TrainOptions& options = {});

/// OpenMP trainer with unsynchronized (hogwild) updates over mini-batches of
/// the shuffled pair stream. Only statistical outcomes are reproducible when
/// config.workers > 1; mean_objective is then approximate.
template <class Real>
std::vector<EpochReport> train_parallel(EmbeddingModel<Real>& model,
                                        std::span<const EncodedDocument> corpus,
                                        const NoiseTable& noise, const TrainConfig& config,
                                        const TrainOptions& options = {});

/// Dispatches to train_reference for one worker and train_parallel otherwise.
/// Throws std::invalid_argument on an empty corpus or on shapes that do not
/// match the model.
template <class Real>
std::vector<EpochReport> train(EmbeddingModel<Real>& model, std::span<const EncodedDocument> corpus,
                               const NoiseTable& noise, const TrainConfig& config,
                               const TrainOptions& options = {});

/// Learns vectors for `documents` against the frozen token vectors of
/// `trained`. Document ids in `documents` index the returned model's rows.
template <class Real>
EmbeddingModel<Real> infer_doc_vectors(const EmbeddingModel<Real>& trained,
                                       std::span<const EncodedDocument> documents,
                                       const NoiseTable& noise, const TrainConfig& config);

/// Exact softmax log-probability over the whole vocabulary:
/// y_t - log Σ_u exp(y_u) with y = b + W x_d.
template <class Real>
double exact_softmax_logprob(const EmbeddingModel<Real>& model, std::size_t doc, std::size_t token);

/// Mean per-pair negative-sampling objective over the corpus with fresh
/// negatives. Does not modify the model.
template <class Real>
double corpus_objective_estimate(const EmbeddingModel<Real>& model,
                                 std::span<const EncodedDocument> corpus, const NoiseTable& noise,
                                 int k, Rng& rng);

namespace detail {

/// Shared update kernel. `grad` is caller-owned scratch of size dim.
template <class Real>
double apply_pair_update(EmbeddingModel<Real>& model, TrainingPair pair,
                         std::span<const TokenId> negatives, double learning_rate,
                         bool update_tokens, std::span<double> grad);

void check_corpus(std::span<const EncodedDocument> corpus, std::size_t num_docs,
                  std::size_t vocab_size);

}  // namespace detail

}  // namespace dvngram
