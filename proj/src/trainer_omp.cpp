#include <algorithm>
#include <chrono>
#include <stdexcept>

#include <omp.h>

#include "dvngram/trainer.hpp"

namespace dvngram {

template <class Real>
std::vector<EpochReport> train_parallel(EmbeddingModel<Real>& model,
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

  Rng shuffle_rng = make_rng(config.seed, 0x7a11);
  const std::size_t batch = static_cast<std::size_t>(config.mini_batch);
  const auto num_batches = static_cast<std::int64_t>((pairs.size() + batch - 1) / batch);
  const double total_batches = static_cast<double>(num_batches) * config.epochs;
  const bool update_tokens = !options.freeze_token_vectors;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::shuffle(pairs.begin(), pairs.end(), shuffle_rng);
    double objective_sum = 0.0;

#pragma omp parallel num_threads(config.workers) reduction(+ : objective_sum)
    {
      const auto thread = static_cast<std::uint64_t>(omp_get_thread_num());
      Rng rng = make_rng(config.seed, (static_cast<std::uint64_t>(epoch + 1) << 20) | thread);
      std::vector<double> grad(model.dim());
      std::vector<TokenId> negatives(static_cast<std::size_t>(config.negative_k));

#pragma omp for schedule(dynamic, 1)
      for (std::int64_t b = 0; b < num_batches; ++b) {
        double lr = config.learning_rate;
        if (config.linear_decay) {
          const double progress = (static_cast<double>(epoch) * num_batches + b) / total_batches;
          lr = std::max(config.learning_rate * (1.0 - progress), config.learning_rate * 1e-4);
        }
        const std::size_t begin = static_cast<std::size_t>(b) * batch;
        const std::size_t end = std::min(pairs.size(), begin + batch);
        for (std::size_t p = begin; p < end; ++p) {
          for (auto& n : negatives) n = noise.sample(rng);
          objective_sum +=
              detail::apply_pair_update(model, pairs[p], negatives, lr, update_tokens, grad);
        }
      }
    }

    EpochReport report;
    report.epoch = epoch + 1;
    report.pairs_processed = pairs.size();
    report.mean_objective = objective_sum / static_cast<double>(pairs.size());
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    reports.push_back(report);
    if (options.on_epoch) options.on_epoch(report, shuffle_rng);
  }
  return reports;
}

template std::vector<EpochReport> train_parallel<float>(EmbeddingModel<float>&,
                                                        std::span<const EncodedDocument>,
                                                        const NoiseTable&, const TrainConfig&,
                                                        const TrainOptions&);
template std::vector<EpochReport> train_parallel<double>(EmbeddingModel<double>&,
                                                         std::span<const EncodedDocument>,
                                                         const NoiseTable&, const TrainConfig&,
                                                         const TrainOptions&);

}  // namespace dvngram
