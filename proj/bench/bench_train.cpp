// Throughput of the serial reference trainer against the OpenMP hogwild
// trainer on a synthetic Zipf-like corpus.
//
//   bench_train [docs] [doc_length] [vocab] [dim] [epochs]

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "dvngram/trainer.hpp"

using namespace dvngram;

int main(int argc, char** argv) {
  const std::size_t docs = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 2000;
  const std::size_t length = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 200;
  const std::size_t vocab = argc > 3 ? std::strtoul(argv[3], nullptr, 10) : 20000;
  const int dim = argc > 4 ? std::atoi(argv[4]) : 100;
  const int epochs = argc > 5 ? std::atoi(argv[5]) : 2;

  std::vector<std::uint64_t> freq(vocab);
  for (std::size_t t = 0; t < vocab; ++t) freq[t] = 1 + static_cast<std::uint64_t>(1e6 / (t + 1));
  NoiseTable zipf(freq, 1.0);
  Rng rng = make_rng(42);
  std::vector<EncodedDocument> corpus(docs);
  for (std::size_t d = 0; d < docs; ++d) {
    corpus[d].doc_id = static_cast<DocId>(d);
    for (std::size_t i = 0; i < length; ++i) corpus[d].token_ids.push_back(zipf.sample(rng));
  }
  NoiseTable noise(freq, 0.75);

  TrainConfig cfg;
  cfg.dim = dim;
  cfg.epochs = epochs;
  const double pairs = static_cast<double>(docs * length) * epochs;

  auto run = [&](const char* name, int workers, bool reference) {
    cfg.workers = workers;
    auto model = init_model<float>(docs, vocab, cfg);
    const auto start = std::chrono::steady_clock::now();
    auto reports = reference ? train_reference(model, corpus, noise, cfg)
                             : train_parallel(model, corpus, noise, cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%-10s workers=%-3d %8.3f s  %10.0f pairs/s  final objective %.5f\n", name, workers,
                secs, pairs / secs, reports.back().mean_objective);
    return secs;
  };

  std::printf("docs=%zu length=%zu vocab=%zu dim=%d epochs=%d\n", docs, length, vocab, dim, epochs);
  const double base = run("reference", 1, true);
  const int max_threads = omp_get_max_threads();
  for (int w = 1; w <= max_threads; w *= 2) {
    const double secs = run("openmp", w, false);
    std::printf("           speedup vs reference: %.2fx\n", base / secs);
  }
  return 0;
}
