#include "dvngram/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dvngram {

namespace detail {

template <class Real>
double apply_pair_update(EmbeddingModel<Real>& model, TrainingPair pair,
                         std::span<const TokenId> negatives, double learning_rate,
                         bool update_tokens, std::span<double> grad) {
  const std::size_t dim = model.dim();
  Real* doc = model.doc_vector(pair.doc_id).data();
  Real* target = model.token_vector(pair.target).data();
  const bool bias = model.has_bias();

  double s = bias ? static_cast<double>(model.biases()[pair.target]) : 0.0;
  for (std::size_t i = 0; i < dim; ++i) s += static_cast<double>(doc[i]) * target[i];
  double objective = log_sigmoid(s);
  const double g_pos = 1.0 - sigmoid(s);
  for (std::size_t i = 0; i < dim; ++i) grad[i] = g_pos * target[i];

  // Scores of all negatives against the pre-update doc vector; the doc
  // gradient reads the pre-update token rows, so token rows are written last.
  constexpr std::size_t kInline = 32;
  double neg_coef_inline[kInline];
  std::vector<double> neg_coef_heap;
  double* neg_coef = neg_coef_inline;
  if (negatives.size() > kInline) {
    neg_coef_heap.resize(negatives.size());
    neg_coef = neg_coef_heap.data();
  }
  for (std::size_t j = 0; j < negatives.size(); ++j) {
    const Real* neg = model.token_vector(negatives[j]).data();
    double sj = bias ? static_cast<double>(model.biases()[negatives[j]]) : 0.0;
    for (std::size_t i = 0; i < dim; ++i) sj += static_cast<double>(doc[i]) * neg[i];
    objective += log_sigmoid(-sj);
    const double g_neg = sigmoid(sj);
    neg_coef[j] = g_neg;
    for (std::size_t i = 0; i < dim; ++i) grad[i] -= g_neg * neg[i];
  }

  if (update_tokens) {
    const double step_pos = learning_rate * g_pos;
    for (std::size_t i = 0; i < dim; ++i) target[i] += static_cast<Real>(step_pos * doc[i]);
    if (bias) model.biases()[pair.target] += static_cast<Real>(step_pos);
    for (std::size_t j = 0; j < negatives.size(); ++j) {
      Real* neg = model.token_vector(negatives[j]).data();
      const double step_neg = -learning_rate * neg_coef[j];
      for (std::size_t i = 0; i < dim; ++i) neg[i] += static_cast<Real>(step_neg * doc[i]);
      if (bias) model.biases()[negatives[j]] += static_cast<Real>(step_neg);
    }
  }
  for (std::size_t i = 0; i < dim; ++i) doc[i] += static_cast<Real>(learning_rate * grad[i]);
  return objective;
}

void check_corpus(std::span<const EncodedDocument> corpus, std::size_t num_docs,
                  std::size_t vocab_size) {
  if (corpus.empty()) throw std::invalid_argument("train: corpus is empty");
  for (const auto& doc : corpus) {
    if (doc.doc_id >= num_docs) throw std::invalid_argument("train: document id exceeds model rows");
    for (auto t : doc.token_ids) {
      if (t >= vocab_size) throw std::invalid_argument("train: token id exceeds vocabulary size");
    }
  }
}

}  // namespace detail

template <class Real>
double pair_objective(const EmbeddingModel<Real>& model, TrainingPair pair,
                      std::span<const TokenId> negatives) {
  double objective = log_sigmoid(score(model, pair.doc_id, pair.target));
  for (auto neg : negatives) objective += log_sigmoid(-score(model, pair.doc_id, neg));
  return objective;
}

template <class Real>
double sgd_step(EmbeddingModel<Real>& model, TrainingPair pair, std::span<const TokenId> negatives,
                double learning_rate) {
  if (pair.doc_id >= model.num_docs() || pair.target >= model.vocab_size()) {
    throw std::out_of_range("sgd_step: pair ids out of range");
  }
  for (auto neg : negatives) {
    if (neg >= model.vocab_size()) throw std::out_of_range("sgd_step: negative id out of range");
  }
  std::vector<double> grad(model.dim());
  return detail::apply_pair_update(model, pair, negatives, learning_rate, true, grad);
}

template <class Real>
double sgd_step(EmbeddingModel<Real>& model, TrainingPair pair, const NoiseTable& noise,
                double learning_rate, int k, Rng& rng) {
  if (k < 1) throw std::invalid_argument("sgd_step: k must be >= 1");
  std::vector<TokenId> negatives(static_cast<std::size_t>(k));
  for (auto& n : negatives) n = noise.sample(rng);
  return sgd_step(model, pair, negatives, learning_rate);
}

std::vector<TrainingPair> make_pairs(std::span<const EncodedDocument> corpus) {
  std::size_t total = 0;
  for (const auto& doc : corpus) total += doc.token_ids.size();
  std::vector<TrainingPair> pairs;
  pairs.reserve(total);
  for (const auto& doc : corpus) {
    for (auto t : doc.token_ids) pairs.push_back({doc.doc_id, t});
  }
  return pairs;
}

template <class Real>
std::vector<EpochReport> train_reference(EmbeddingModel<Real>& model,
                                         std::span<const EncodedDocument> corpus,
                                         const NoiseTable& noise, const TrainConfig& config,
                                         const TrainOptions& options) {
  config.validate();
  detail::check_corpus(corpus, model.num_docs(), model.vocab_size());
  if (noise.size() != model.vocab_size()) {
    throw std::invalid_argument("train: noise table does not match vocabulary size");
  }
  std::vector<EpochReport> reports;
  auto pairs = make_pairs(corpus);
  if (pairs.empty()) throw std::invalid_argument("train: corpus has no tokens");

  Rng rng = make_rng(config.seed, 0x7a11);
  std::vector<double> grad(model.dim());
  std::vector<TokenId> negatives(static_cast<std::size_t>(config.negative_k));
  const std::size_t batch = static_cast<std::size_t>(config.mini_batch);
  const double total_steps = static_cast<double>(pairs.size()) * config.epochs;
  std::uint64_t step = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::shuffle(pairs.begin(), pairs.end(), rng);
    double objective_sum = 0.0;
    for (std::size_t begin = 0; begin < pairs.size(); begin += batch) {
      const std::size_t end = std::min(pairs.size(), begin + batch);
      for (std::size_t p = begin; p < end; ++p, ++step) {
        double lr = config.learning_rate;
        if (config.linear_decay) {
          lr = std::max(config.learning_rate * (1.0 - step / total_steps),
                        config.learning_rate * 1e-4);
        }
        for (auto& n : negatives) n = noise.sample(rng);
        objective_sum += detail::apply_pair_update(model, pairs[p], negatives, lr,
                                                   !options.freeze_token_vectors, grad);
      }
    }
    EpochReport report;
    report.epoch = epoch + 1;
    report.pairs_processed = pairs.size();
    report.mean_objective = objective_sum / static_cast<double>(pairs.size());
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    reports.push_back(report);
    if (options.on_epoch) options.on_epoch(report, rng);
  }
  return reports;
}

template <class Real>
std::vector<EpochReport> train(EmbeddingModel<Real>& model, std::span<const EncodedDocument> corpus,
                               const NoiseTable& noise, const TrainConfig& config,
                               const TrainOptions& options) {
  if (config.workers <= 1) return train_reference(model, corpus, noise, config, options);
  return train_parallel(model, corpus, noise, config, options);
}

template <class Real>
EmbeddingModel<Real> infer_doc_vectors(const EmbeddingModel<Real>& trained,
                                       std::span<const EncodedDocument> documents,
                                       const NoiseTable& noise, const TrainConfig& config) {
  DocId max_id = 0;
  for (const auto& d : documents) max_id = std::max(max_id, d.doc_id);
  TrainConfig cfg = config;
  cfg.dim = static_cast<int>(trained.dim());
  cfg.use_bias = trained.has_bias();
  auto fresh = init_model<Real>(documents.empty() ? 1 : max_id + 1, trained.vocab_size(), cfg);
  std::copy(trained.token_data().begin(), trained.token_data().end(), fresh.token_data().begin());
  std::copy(trained.biases().begin(), trained.biases().end(), fresh.biases().begin());
  TrainOptions options;
  options.freeze_token_vectors = true;
  train(fresh, documents, noise, cfg, options);
  return fresh;
}

template <class Real>
double exact_softmax_logprob(const EmbeddingModel<Real>& model, std::size_t doc, std::size_t token) {
  if (doc >= model.num_docs() || token >= model.vocab_size()) {
    throw std::out_of_range("exact_softmax_logprob: id out of range");
  }
  std::vector<double> y(model.vocab_size());
  double y_max = -std::numeric_limits<double>::infinity();
  for (std::size_t u = 0; u < y.size(); ++u) {
    y[u] = score(model, doc, u);
    y_max = std::max(y_max, y[u]);
  }
  double sum = 0.0;
  for (double v : y) sum += std::exp(v - y_max);
  return y[token] - (y_max + std::log(sum));
}

template <class Real>
double corpus_objective_estimate(const EmbeddingModel<Real>& model,
                                 std::span<const EncodedDocument> corpus, const NoiseTable& noise,
                                 int k, Rng& rng) {
  if (k < 1) throw std::invalid_argument("corpus_objective_estimate: k must be >= 1");
  std::vector<TokenId> negatives(static_cast<std::size_t>(k));
  double sum = 0.0;
  std::uint64_t count = 0;
  for (const auto& doc : corpus) {
    for (auto t : doc.token_ids) {
      for (auto& n : negatives) n = noise.sample(rng);
      sum += pair_objective(model, {doc.doc_id, t}, negatives);
      ++count;
    }
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

#define DVNGRAM_INSTANTIATE_TRAINER(Real)                                                        \
  template double detail::apply_pair_update<Real>(EmbeddingModel<Real>&, TrainingPair,           \
                                                  std::span<const TokenId>, double, bool,        \
                                                  std::span<double>);                            \
  template double pair_objective<Real>(const EmbeddingModel<Real>&, TrainingPair,                \
                                       std::span<const TokenId>);                                \
  template double sgd_step<Real>(EmbeddingModel<Real>&, TrainingPair, std::span<const TokenId>,  \
                                 double);                                                        \
  template double sgd_step<Real>(EmbeddingModel<Real>&, TrainingPair, const NoiseTable&, double, \
                                 int, Rng&);                                                     \
  template std::vector<EpochReport> train_reference<Real>(                                       \
      EmbeddingModel<Real>&, std::span<const EncodedDocument>, const NoiseTable&,                \
      const TrainConfig&, const TrainOptions&);                                                  \
  template std::vector<EpochReport> train<Real>(EmbeddingModel<Real>&,                           \
                                                std::span<const EncodedDocument>,                \
                                                const NoiseTable&, const TrainConfig&,           \
                                                const TrainOptions&);                            \
  template EmbeddingModel<Real> infer_doc_vectors<Real>(                                         \
      const EmbeddingModel<Real>&, std::span<const EncodedDocument>, const NoiseTable&,          \
      const TrainConfig&);                                                                       \
  template double exact_softmax_logprob<Real>(const EmbeddingModel<Real>&, std::size_t,          \
                                              std::size_t);                                      \
  template double corpus_objective_estimate<Real>(const EmbeddingModel<Real>&,                   \
                                                  std::span<const EncodedDocument>,              \
                                                  const NoiseTable&, int, Rng&);

DVNGRAM_INSTANTIATE_TRAINER(float)
DVNGRAM_INSTANTIATE_TRAINER(double)

#undef DVNGRAM_INSTANTIATE_TRAINER

}  // namespace dvngram
