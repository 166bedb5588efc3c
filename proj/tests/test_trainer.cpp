#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "dvngram/trainer.hpp"
#include "oracles.hpp"

using namespace dvngram;

namespace {

oracle::Params to_params(const EmbeddingModel<double>& m) {
  oracle::Params p;
  for (std::size_t d = 0; d < m.num_docs(); ++d)
    p.docs.emplace_back(m.doc_vector(d).begin(), m.doc_vector(d).end());
  for (std::size_t t = 0; t < m.vocab_size(); ++t)
    p.tokens.emplace_back(m.token_vector(t).begin(), m.token_vector(t).end());
  return p;
}

EmbeddingModel<double> random_model(std::mt19937& gen, std::size_t docs, std::size_t vocab,
                                    std::size_t dim, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  EmbeddingModel<double> m(docs, vocab, dim, false);
  for (auto& x : m.doc_data()) x = u(gen);
  for (auto& x : m.token_data()) x = u(gen);
  return m;
}

// Two documents with disjoint token sets, each token repeated.
std::vector<EncodedDocument> two_doc_corpus() {
  std::vector<EncodedDocument> corpus(2);
  corpus[0].doc_id = 0;
  corpus[1].doc_id = 1;
  for (int rep = 0; rep < 4; ++rep) {
    for (TokenId t = 0; t < 5; ++t) corpus[0].token_ids.push_back(t);
    for (TokenId t = 5; t < 10; ++t) corpus[1].token_ids.push_back(t);
  }
  return corpus;
}

NoiseTable uniform_noise(std::size_t vocab) {
  std::vector<std::uint64_t> f(vocab, 4);
  return NoiseTable(f, 0.75);
}

}  // namespace

TEST_CASE("sgd_step at zero parameters") {
  EmbeddingModel<double> m(1, 3, 4, false);
  std::vector<TokenId> neg{2};
  const double l = sgd_step(m, {0, 1}, neg, 0.25);
  CHECK(l == 2 * std::log(0.5));
  CHECK(std::abs(l - (-1.38629)) < 1e-5);
  for (int k = 1; k <= 5; ++k) {
    std::vector<TokenId> negs(k, 0);
    CHECK(pair_objective(EmbeddingModel<double>(1, 3, 4, false), {0, 1}, negs) == (k + 1) * std::log(0.5));
  }
}

TEST_CASE("sgd_step matches the straight-line update formulas") {
  std::mt19937 gen(4);
  std::uniform_int_distribution<TokenId> tok(0, 9);
  for (int trial = 0; trial < 50; ++trial) {
    auto m = random_model(gen, 3, 10, 4, 0.8);
    const TrainingPair pair{static_cast<DocId>(trial % 3), tok(gen)};
    std::vector<TokenId> negs{tok(gen), tok(gen), tok(gen)};
    if (trial % 5 == 0) negs[0] = pair.target;  // collision with the target
    if (trial % 7 == 0) negs[2] = negs[1];      // repeated negative
    const double lr = 0.3;

    const auto before = to_params(m);
    std::vector<int> ineg(negs.begin(), negs.end());
    const auto expected = oracle::sgd_update(before, pair.doc_id, pair.target, ineg, lr);
    const double l = sgd_step(m, pair, negs, lr);
    CHECK(std::abs(l - oracle::pair_objective(before, pair.doc_id, pair.target, ineg)) <= 1e-12);
    const auto after = to_params(m);
    for (std::size_t d = 0; d < after.docs.size(); ++d)
      for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(after.docs[d][i] - expected.docs[d][i]) <= 1e-12);
    for (std::size_t t = 0; t < after.tokens.size(); ++t)
      for (std::size_t i = 0; i < 4; ++i)
        CHECK(std::abs(after.tokens[t][i] - expected.tokens[t][i]) <= 1e-12);
  }
}

TEST_CASE("sgd_step update equals lr times the finite-difference gradient") {
  std::mt19937 gen(8);
  const double lr = 1e-3;
  const double h = 1e-6;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t dim = 1 + trial % 16;
    auto m = random_model(gen, 2, 32, dim, 0.5);
    std::uniform_int_distribution<TokenId> tok(0, 31);
    const TrainingPair pair{1, tok(gen)};
    std::vector<TokenId> negs(1 + trial % 5);
    for (auto& n : negs) n = tok(gen);
    std::vector<int> ineg(negs.begin(), negs.end());

    const auto before = to_params(m);
    auto stepped = m;
    sgd_step(stepped, pair, negs, lr);
    const auto after = to_params(stepped);

    auto check = [&](bool is_doc, std::size_t row) {
      for (std::size_t i = 0; i < dim; ++i) {
        auto plus = before, minus = before;
        (is_doc ? plus.docs : plus.tokens)[row][i] += h;
        (is_doc ? minus.docs : minus.tokens)[row][i] -= h;
        const double fd = (oracle::pair_objective(plus, pair.doc_id, pair.target, ineg) -
                           oracle::pair_objective(minus, pair.doc_id, pair.target, ineg)) / (2 * h);
        const auto& a = is_doc ? after.docs : after.tokens;
        const auto& b = is_doc ? before.docs : before.tokens;
        const double analytic = (a[row][i] - b[row][i]) / lr;
        CHECK(std::abs(analytic - fd) <= 1e-5 * std::max(1e-3, std::abs(fd)));
      }
    };
    check(true, pair.doc_id);
    check(false, pair.target);
    for (auto n : negs) check(false, n);
  }
}

TEST_CASE("sgd_step only touches the document, target and negative rows") {
  std::mt19937 gen(21);
  auto m = random_model(gen, 4, 12, 6, 0.3);
  const auto before = m;
  std::vector<TokenId> negs{3, 7};
  sgd_step(m, {2, 5}, negs, 0.25);
  for (std::size_t d = 0; d < 4; ++d) {
    const bool same = std::equal(m.doc_vector(d).begin(), m.doc_vector(d).end(), before.doc_vector(d).begin());
    CHECK(same == (d != 2));
  }
  for (std::size_t t = 0; t < 12; ++t) {
    const bool same =
        std::equal(m.token_vector(t).begin(), m.token_vector(t).end(), before.token_vector(t).begin());
    CHECK(same == (t != 5 && t != 3 && t != 7));
  }
}

TEST_CASE("sgd_step with a noise table is deterministic for a seed") {
  std::mt19937 gen(2);
  auto a = random_model(gen, 1, 8, 4, 0.2);
  auto b = a;
  auto noise = uniform_noise(8);
  Rng ra = make_rng(5), rb = make_rng(5);
  for (int i = 0; i < 20; ++i) {
    const double la = sgd_step(a, {0, static_cast<TokenId>(i % 8)}, noise, 0.1, 3, ra);
    const double lb = sgd_step(b, {0, static_cast<TokenId>(i % 8)}, noise, 0.1, 3, rb);
    CHECK(la == lb);
    CHECK(la <= 0.0);
  }
  CHECK(a == b);
  CHECK_THROWS(sgd_step(a, {0, 0}, noise, 0.1, 0, ra));
}

TEST_CASE("sgd_step bias gradients") {
  EmbeddingModel<double> m(1, 3, 2, true);
  std::vector<TokenId> negs{2};
  sgd_step(m, {0, 1}, negs, 0.5);
  CHECK(m.biases()[1] == doctest::Approx(0.25));   // lr * (1 - σ(0))
  CHECK(m.biases()[2] == doctest::Approx(-0.25));  // -lr * σ(0)
  CHECK(m.biases()[0] == 0.0);
}

TEST_CASE("train separates a two-document disjoint corpus") {
  auto corpus = two_doc_corpus();
  auto noise = uniform_noise(10);
  TrainConfig cfg;
  cfg.dim = 8;
  cfg.epochs = 50;
  cfg.seed = 3;
  auto model = init_model<double>(2, 10, cfg);
  Rng est0 = make_rng(77);
  const double before = corpus_objective_estimate(model, corpus, noise, cfg.negative_k, est0);
  auto reports = train(model, corpus, noise, cfg);
  REQUIRE(reports.size() == 50);
  for (const auto& r : reports) CHECK(r.pairs_processed == 40);
  CHECK(model.all_finite());
  for (TokenId t = 0; t < 10; ++t) {
    const std::size_t own = t < 5 ? 0 : 1;
    CHECK(sigmoid(score(model, own, t)) > sigmoid(score(model, 1 - own, t)));
  }
  Rng est1 = make_rng(77);
  CHECK(corpus_objective_estimate(model, corpus, noise, cfg.negative_k, est1) > before);
}

TEST_CASE("train edge cases and determinism") {
  auto corpus = two_doc_corpus();
  auto noise = uniform_noise(10);
  TrainConfig cfg;
  cfg.dim = 6;
  cfg.epochs = 0;
  auto model = init_model<float>(2, 10, cfg);
  const auto init = model;
  CHECK(train(model, corpus, noise, cfg).empty());
  CHECK(model == init);

  cfg.epochs = 3;
  auto a = init_model<float>(2, 10, cfg);
  auto b = init_model<float>(2, 10, cfg);
  train(a, corpus, noise, cfg);
  train(b, corpus, noise, cfg);
  CHECK(a == b);

  CHECK_THROWS_AS(train(a, std::vector<EncodedDocument>{}, noise, cfg), std::invalid_argument);
  std::vector<EncodedDocument> bad{{5, {1}}};
  CHECK_THROWS_AS(train(a, bad, noise, cfg), std::invalid_argument);
}

TEST_CASE("every document with tokens is updated each epoch") {
  std::vector<EncodedDocument> corpus{{0, {1, 2}}, {1, {}}, {2, {3}}, {3, {0, 0, 0}}};
  auto noise = uniform_noise(4);
  TrainConfig cfg;
  cfg.dim = 5;
  cfg.epochs = 1;
  auto model = init_model<double>(4, 4, cfg);
  const auto init = model;
  auto reports = train(model, corpus, noise, cfg);
  CHECK(reports.at(0).pairs_processed == 6);
  for (std::size_t d = 0; d < 4; ++d) {
    const bool changed =
        !std::equal(model.doc_vector(d).begin(), model.doc_vector(d).end(), init.doc_vector(d).begin());
    CHECK(changed == (d != 1));
  }
}

TEST_CASE("parallel trainer learns the same structure") {
  auto corpus = two_doc_corpus();
  auto noise = uniform_noise(10);
  TrainConfig cfg;
  cfg.dim = 8;
  cfg.epochs = 50;
  cfg.workers = 4;
  cfg.mini_batch = 4;
  auto model = init_model<float>(2, 10, cfg);
  auto reports = train_parallel(model, corpus, noise, cfg);
  CHECK(reports.size() == 50);
  CHECK(model.all_finite());
  for (TokenId t = 0; t < 10; ++t) {
    const std::size_t own = t < 5 ? 0 : 1;
    CHECK(score(model, own, t) > score(model, 1 - own, t));
  }
}

TEST_CASE("linear decay and frozen-token inference") {
  auto corpus = two_doc_corpus();
  auto noise = uniform_noise(10);
  TrainConfig cfg;
  cfg.dim = 8;
  cfg.epochs = 30;
  cfg.linear_decay = true;
  auto model = init_model<double>(2, 10, cfg);
  train(model, corpus, noise, cfg);
  CHECK(model.all_finite());

  std::vector<EncodedDocument> held_out{{0, {5, 6, 7, 8, 9, 5, 6}}};
  auto inferred = infer_doc_vectors(model, held_out, noise, cfg);
  CHECK(std::equal(inferred.token_data().begin(), inferred.token_data().end(), model.token_data().begin()));
  const std::vector<double> v(inferred.doc_vector(0).begin(), inferred.doc_vector(0).end());
  const std::vector<double> own(model.doc_vector(1).begin(), model.doc_vector(1).end());
  const std::vector<double> other(model.doc_vector(0).begin(), model.doc_vector(0).end());
  CHECK(oracle::naive_dot(v, own) > oracle::naive_dot(v, other));
}

TEST_CASE("exact_softmax_logprob") {
  EmbeddingModel<double> single(1, 1, 3, false);
  single.doc_vector(0)[0] = 2.0;
  single.token_vector(0)[0] = 5.0;
  CHECK(exact_softmax_logprob(single, 0, 0) == doctest::Approx(0.0));

  std::mt19937 gen(12);
  for (int trial = 0; trial < 50; ++trial) {
    auto m = random_model(gen, 2, 10, 4, 1.0);
    const auto p = to_params(m);
    double total = 0.0;
    for (TokenId t = 0; t < 10; ++t) {
      const double lp = exact_softmax_logprob(m, 1, t);
      CHECK(std::abs(lp - oracle::naive_logprob(p, {}, 1, static_cast<int>(t))) <= 1e-10);
      total += std::exp(lp);
    }
    CHECK(std::abs(total - 1.0) <= 1e-9);
  }

  SUBCASE("large scores stay finite") {
    EmbeddingModel<double> m(1, 2, 1, true);
    m.doc_vector(0)[0] = 1000;
    m.token_vector(0)[0] = 1;
    m.biases()[1] = 999;
    CHECK(exact_softmax_logprob(m, 0, 0) == doctest::Approx(-std::log1p(std::exp(-1.0))));
  }
}

TEST_CASE("corpus_objective_estimate") {
  auto corpus = two_doc_corpus();
  auto noise = uniform_noise(10);
  EmbeddingModel<double> zero(2, 10, 4, false);
  Rng r = make_rng(1);
  CHECK(corpus_objective_estimate(zero, corpus, noise, 5, r) == doctest::Approx(6 * std::log(0.5)).epsilon(1e-15));

  std::mt19937 gen(3);
  auto m = random_model(gen, 2, 10, 4, 0.5);
  const auto copy = m;
  Rng a = make_rng(9), b = make_rng(9);
  CHECK(corpus_objective_estimate(m, corpus, noise, 3, a) == corpus_objective_estimate(m, corpus, noise, 3, b));
  CHECK(m == copy);
}
