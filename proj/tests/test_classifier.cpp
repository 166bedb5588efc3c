#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "dvngram/classifier.hpp"

using namespace dvngram;

namespace {

LabeledDataset gaussian_blobs(std::mt19937& gen, int n, int dim, double shift, double noise) {
  std::normal_distribution<double> g(0.0, noise);
  LabeledDataset d;
  d.feature_dim = static_cast<std::size_t>(dim);
  for (int i = 0; i < n; ++i) {
    const int y = i % 2 == 0 ? 1 : -1;
    std::vector<double> x(dim);
    for (int j = 0; j < dim; ++j) x[j] = g(gen) + (j == 0 ? y * shift : 0.0);
    d.features.push_back(SparseFeatureVector::from_dense(x));
    d.labels.push_back(y);
  }
  return d;
}

double grad_norm(const LabeledDataset& d, const LinearModel& m) {
  auto g = logreg_gradient(d, m.weights, m.intercept, m.c_value);
  double s = 0;
  for (double v : g) s += v * v;
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("train_logreg on 1-D separable data") {
  LabeledDataset d;
  d.add(SparseFeatureVector::from_dense(std::vector<double>{-1.0}), -1);
  d.add(SparseFeatureVector::from_dense(std::vector<double>{1.0}), 1);
  auto m = train_logreg(d, 1000.0);
  CHECK(predict(m, std::vector<double>{-1.0}) == -1);
  CHECK(predict(m, std::vector<double>{1.0}) == 1);
  CHECK(evaluate(m, d) == 1.0);
  CHECK(grad_norm(d, m) <= 1e-4);
  CHECK(std::abs(m.intercept) <= 1e-6);  // symmetric data
}

TEST_CASE("train_logreg converges to the stated tolerance") {
  std::mt19937 gen(1);
  auto d = gaussian_blobs(gen, 300, 10, 1.0, 1.0);
  for (double c : {0.01, 1.0, 100.0}) {
    for (double tol : {1e-3, 1e-6}) {
      auto m = train_logreg(d, c, {tol, 1000});
      CHECK(grad_norm(d, m) <= tol);
      std::vector<double> zero(d.feature_dim, 0.0);
      CHECK(logreg_objective(d, m.weights, m.intercept, c) <= logreg_objective(d, zero, 0.0, c));
    }
  }
}

TEST_CASE("objective is non-increasing from zero to the solution") {
  std::mt19937 gen(2);
  auto d = gaussian_blobs(gen, 200, 5, 0.7, 1.0);
  auto m = train_logreg(d, 10.0);
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 10; ++k) {
    const double t = k / 10.0;
    std::vector<double> w(m.weights.size());
    for (std::size_t j = 0; j < w.size(); ++j) w[j] = t * m.weights[j];
    const double f = logreg_objective(d, w, t * m.intercept, 10.0);
    CHECK(f <= prev + 1e-9);
    prev = f;
  }
}

TEST_CASE("symmetric data yields a zero intercept") {
  std::mt19937 gen(3);
  std::normal_distribution<double> g(0, 1);
  LabeledDataset d;
  d.feature_dim = 3;
  for (int i = 0; i < 50; ++i) {
    std::vector<double> x{g(gen) + 0.5, g(gen), g(gen)};
    const int y = g(gen) > -0.5 ? 1 : -1;
    std::vector<double> neg{-x[0], -x[1], -x[2]};
    d.features.push_back(SparseFeatureVector::from_dense(x));
    d.labels.push_back(y);
    d.features.push_back(SparseFeatureVector::from_dense(neg));
    d.labels.push_back(-y);
  }
  auto m = train_logreg(d, 1.0, {1e-9, 1000});
  CHECK(std::abs(m.intercept) <= 1e-6);
}

TEST_CASE("train_logreg errors") {
  LabeledDataset one_class;
  one_class.add(SparseFeatureVector::from_dense(std::vector<double>{1.0}), 1);
  one_class.add(SparseFeatureVector::from_dense(std::vector<double>{2.0}), 1);
  CHECK_THROWS_AS(train_logreg(one_class, 1.0), std::invalid_argument);
  LabeledDataset ok;
  ok.add(SparseFeatureVector::from_dense(std::vector<double>{1.0}), 1);
  ok.add(SparseFeatureVector::from_dense(std::vector<double>{-1.0}), -1);
  CHECK_THROWS_AS(train_logreg(ok, 0.0), std::invalid_argument);
  ok.labels[0] = 2;
  CHECK_THROWS_AS(train_logreg(ok, 1.0), std::invalid_argument);
}

TEST_CASE("predict") {
  LinearModel zero{{0.0}, 0.0, 1.0};
  CHECK(predict(zero, std::vector<double>{5.0}) == 1);
  LinearModel m{{1.0}, 0.0, 1.0};
  CHECK(predict(m, std::vector<double>{-2.0}) == -1);
  CHECK_THROWS_AS(predict(m, std::vector<double>{1.0, 2.0}), std::invalid_argument);
  SparseFeatureVector far;
  far.entries = {{3, 1.0}};
  CHECK_THROWS_AS(predict(m, far), std::invalid_argument);

  std::mt19937 gen(4);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 100; ++trial) {
    LinearModel r{{u(gen), u(gen), u(gen), u(gen)}, u(gen), 1.0};
    std::vector<double> x{u(gen), u(gen), u(gen), u(gen)};
    double s = r.intercept;
    for (int j = 0; j < 4; ++j) s += r.weights[j] * x[j];
    const int expected = s >= 0 ? 1 : -1;
    CHECK(predict(r, x) == expected);
    CHECK(predict(r, SparseFeatureVector::from_dense(x)) == expected);
    LinearModel scaled = r;
    const double lambda = 0.1 + 10 * std::abs(u(gen));
    for (auto& w : scaled.weights) w *= lambda;
    scaled.intercept *= lambda;
    CHECK(predict(scaled, x) == expected);
  }
}

TEST_CASE("evaluate") {
  LabeledDataset d;
  for (double x : {1.0, 2.0, -1.0, -3.0}) d.add(SparseFeatureVector::from_dense(std::vector<double>{x}), x > 0 ? 1 : -1);
  LinearModel perfect{{1.0}, 0.0, 1.0};
  CHECK(evaluate(perfect, d) == 1.0);
  LinearModel flipped{{-1.0}, 0.0, 1.0};
  CHECK(evaluate(flipped, d) == 0.0);
  LinearModel shifted{{1.0}, -1.5, 1.0};  // misclassifies x = 1
  CHECK(evaluate(shifted, d) == 0.75);
  CHECK_THROWS(evaluate(perfect, LabeledDataset{}));
}

TEST_CASE("stratified split and dev selection") {
  std::mt19937 gen(5);
  auto d = gaussian_blobs(gen, 200, 4, 1.0, 1.0);
  auto [tr, dev] = stratified_split(d.labels, 0.2, 11);
  CHECK(dev.size() == 40);
  CHECK(tr.size() == 160);
  int dev_pos = 0;
  for (auto r : dev) dev_pos += d.labels[r] == 1;
  CHECK(dev_pos == 20);
  CHECK(stratified_split(d.labels, 0.2, 11) == std::make_pair(tr, dev));

  std::vector<double> one{3.0};
  CHECK(dev_split_select(d, one, 1) == 3.0);
  const auto& grid = default_c_grid();
  CHECK(dev_split_select(d, grid, 9) == dev_split_select(d, grid, 9));
}

TEST_CASE("dev selection avoids an underfitting C") {
  // Imbalanced classes: at tiny C the weights vanish and the unregularized
  // intercept predicts the majority class everywhere.
  std::mt19937 gen(6);
  std::normal_distribution<double> g(0, 1);
  LabeledDataset d;
  d.feature_dim = 5;
  for (int i = 0; i < 400; ++i) {
    const int y = i % 10 < 7 ? 1 : -1;
    std::vector<double> x(5);
    for (auto& v : x) v = 1.5 * y + g(gen);
    d.features.push_back(SparseFeatureVector::from_dense(x));
    d.labels.push_back(y);
  }
  std::vector<double> grid{1e-8, 1e-3, 1.0};
  auto [tr, dev] = stratified_split(d.labels, 0.2, 2);
  const double tiny = evaluate(train_logreg(d.subset(tr), 1e-8), d.subset(dev));
  CHECK(tiny == doctest::Approx(0.7));
  const double best = dev_split_select(d, grid, 2);
  CHECK(best > 1e-8);
  CHECK(evaluate(train_logreg(d.subset(tr), best), d.subset(dev)) > tiny);
}

TEST_CASE("linear model save/load") {
  LinearModel m{{0.1, -2.5, 1e-300}, 0.75, 10.0};
  std::stringstream s;
  m.save(s);
  CHECK(s.str().rfind("10\n0.75\n0.1\n", 0) == 0);
  auto back = LinearModel::load(s);
  CHECK(back.weights == m.weights);
  CHECK(back.intercept == m.intercept);
  CHECK(back.c_value == m.c_value);
}
