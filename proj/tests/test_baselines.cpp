#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "dvngram/baselines.hpp"
#include "oracles.hpp"

using namespace dvngram;

namespace {

SparseFeatureVector sv(std::vector<std::pair<FeatureId, double>> e) {
  SparseFeatureVector v;
  v.entries = std::move(e);
  return v;
}

}  // namespace

TEST_CASE("bag_of_ngram_features") {
  CHECK(bag_of_ngram_features({0, {3, 3, 1}}, 5) == sv({{1, 1.0}, {3, 1.0}}));
  CHECK(bag_of_ngram_features({0, {}}, 5).empty());
  CHECK(bag_of_ngram_features({0, {3, 3, 1}}, 5, TermWeighting::term_frequency) == sv({{1, 1.0}, {3, 2.0}}));
  CHECK_THROWS(bag_of_ngram_features({0, {9}}, 5));

  std::mt19937 gen(1);
  std::uniform_int_distribution<TokenId> tok(0, 40);
  for (int trial = 0; trial < 200; ++trial) {
    EncodedDocument doc{0, {}};
    for (int i = 0; i < trial % 30; ++i) doc.token_ids.push_back(tok(gen));
    auto x = bag_of_ngram_features(doc, 41);
    std::set<TokenId> distinct(doc.token_ids.begin(), doc.token_ids.end());
    REQUIRE(x.nnz() == distinct.size());
    auto it = distinct.begin();
    for (const auto& [id, w] : x.entries) {
      CHECK(id == *it++);
      CHECK(w == 1.0);
    }
    CHECK(x.is_canonical());
    // Fixed point on its own support.
    EncodedDocument support{0, {}};
    for (const auto& e : x.entries) support.token_ids.push_back(e.first);
    CHECK(bag_of_ngram_features(support, 41) == x);
  }
}

TEST_CASE("fit_nb_weights") {
  SUBCASE("balanced shared feature has zero ratio") {
    std::vector<SparseFeatureVector> x{sv({{0, 1.0}}), sv({{0, 1.0}})};
    std::vector<int> y{1, -1};
    auto nb = fit_nb_weights(x, y, 1);
    CHECK(std::abs(nb.r[0]) <= 1e-15);
  }
  SUBCASE("hand-worked 2-feature example") {
    // pos doc has feature 0, neg doc has feature 1, alpha = 1:
    // p = [2, 1], |p| = 3; q = [1, 2], |q| = 3 -> r0 = log((2/3)/(1/3)) = log 2, r1 = -log 2
    std::vector<SparseFeatureVector> x{sv({{0, 1.0}}), sv({{1, 1.0}})};
    std::vector<int> y{1, -1};
    auto nb = fit_nb_weights(x, y, 2, 1.0);
    CHECK(std::abs(nb.r[0] - std::log(2.0)) <= 1e-12);
    CHECK(std::abs(nb.r[1] + std::log(2.0)) <= 1e-12);
  }
  SUBCASE("counts are binarized") {
    std::vector<SparseFeatureVector> x{sv({{0, 5.0}}), sv({{1, 1.0}})};
    std::vector<int> y{1, -1};
    CHECK(std::abs(fit_nb_weights(x, y, 2).r[0] - std::log(2.0)) <= 1e-12);
  }
  SUBCASE("errors") {
    std::vector<SparseFeatureVector> x{sv({{0, 1.0}}), sv({{0, 1.0}})};
    std::vector<int> same{1, 1};
    CHECK_THROWS_AS(fit_nb_weights(x, same, 1), std::invalid_argument);
    std::vector<int> y{1, -1};
    CHECK_THROWS_AS(fit_nb_weights(x, y, 1, 0.0), std::invalid_argument);
  }
}

TEST_CASE("NB ratios match brute force and are antisymmetric") {
  std::mt19937 gen(2);
  std::uniform_int_distribution<int> tok(0, 19);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::set<int>> sets;
    std::vector<SparseFeatureVector> x;
    std::vector<int> y;
    for (int d = 0; d < 12; ++d) {
      EncodedDocument doc{0, {}};
      for (int i = 0; i < 6; ++i) doc.token_ids.push_back(static_cast<TokenId>(tok(gen)));
      x.push_back(bag_of_ngram_features(doc, 20));
      sets.emplace_back(doc.token_ids.begin(), doc.token_ids.end());
      y.push_back(d % 3 == 0 ? -1 : 1);
    }
    auto nb = fit_nb_weights(x, y, 20, 1.0);
    auto expected = oracle::nb_ratios(sets, y, 20, 1.0);
    for (int j = 0; j < 20; ++j) CHECK(nb.r[j] == expected[j]);
    std::vector<int> flipped;
    for (int v : y) flipped.push_back(-v);
    auto neg = fit_nb_weights(x, flipped, 20, 1.0);
    for (int j = 0; j < 20; ++j) CHECK(std::abs(neg.r[j] + nb.r[j]) <= 1e-14);
  }
}

TEST_CASE("nb_weighted_features") {
  auto x = sv({{0, 1.0}, {2, 1.0}});
  NbWeights ones{{1.0, 1.0, 1.0}, 1.0};
  CHECK(nb_weighted_features(x, ones) == x);
  NbWeights zero_first{{0.0, 1.0, -0.5}, 1.0};
  CHECK(nb_weighted_features(x, zero_first) == sv({{2, -0.5}}));
  NbWeights short_r{{1.0}, 1.0};
  CHECK_THROWS(nb_weighted_features(x, short_r));

  std::mt19937 gen(3);
  std::uniform_real_distribution<double> u(-2, 2);
  NbWeights r{std::vector<double>(30), 1.0};
  for (auto& v : r.r) v = u(gen);
  std::vector<std::pair<FeatureId, double>> e;
  for (FeatureId id = 0; id < 30; id += 3) e.emplace_back(id, u(gen));
  auto in = sv(e);
  auto out = nb_weighted_features(in, r);
  REQUIRE(out.nnz() == in.nnz());
  for (std::size_t i = 0; i < in.nnz(); ++i) {
    CHECK(out.entries[i].first == in.entries[i].first);
    CHECK(out.entries[i].second == r.r[in.entries[i].first] * in.entries[i].second);
  }
}

TEST_CASE("concat_features") {
  std::vector<double> dense{0.5, -1.0};
  CHECK(concat_features(dense, {}, 2.0) == sv({{0, 1.0}, {1, -2.0}}));
  auto sparse = sv({{0, 3.0}, {4, 1.0}});
  CHECK(concat_features(dense, sparse, 0.0) == sv({{2, 3.0}, {6, 1.0}}));
  auto both = concat_features(dense, sparse, 1.0);
  CHECK(both.nnz() == dense.size() + sparse.nnz());
  CHECK(both.is_canonical());
  SparseFeatureVector recovered;
  for (const auto& [id, w] : both.entries) {
    if (id >= dense.size()) recovered.entries.emplace_back(id - static_cast<FeatureId>(dense.size()), w);
  }
  CHECK(recovered == sparse);
}

TEST_CASE("sparse line format") {
  std::ostringstream out;
  write_sparse_line(out, 1, sv({{0, 1.0}, {7, -0.25}}));
  write_sparse_line(out, -1, {});
  CHECK(out.str() == "+1 1:1 8:-0.25\n-1\n");
  auto [label, x] = parse_sparse_line("+1 1:1 8:-0.25");
  CHECK(label == 1);
  CHECK(x == sv({{0, 1.0}, {7, -0.25}}));
  CHECK(parse_sparse_line("-1").first == -1);
  CHECK_THROWS(parse_sparse_line("1 0:1"));
  CHECK_THROWS(parse_sparse_line("1 3"));
  CHECK_THROWS(parse_sparse_line(""));

  std::mt19937 gen(4);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::pair<FeatureId, double>> e;
    for (FeatureId id = trial % 4; id < 60; id += 1 + trial % 7) e.emplace_back(id, u(gen));
    auto v = SparseFeatureVector::from_unsorted(e);
    std::ostringstream s;
    write_sparse_line(s, trial % 2 ? 1 : -1, v);
    auto line = s.str();
    line.pop_back();
    auto [l, back] = parse_sparse_line(line);
    CHECK(l == (trial % 2 ? 1 : -1));
    CHECK(back == v);
  }
}
