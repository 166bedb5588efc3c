#include "dvngram/classifier.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "dvngram/errors.hpp"
#include "dvngram/random.hpp"

namespace dvngram {

void LabeledDataset::add(SparseFeatureVector x, int label) {
  feature_dim = std::max(feature_dim, x.extent());
  features.push_back(std::move(x));
  labels.push_back(label);
}

void LabeledDataset::validate() const {
  if (features.size() != labels.size()) throw std::invalid_argument("dataset: |features| != |labels|");
  for (int y : labels) {
    if (y != 1 && y != -1) throw std::invalid_argument("dataset: labels must be +1 or -1");
  }
  for (const auto& x : features) {
    if (x.extent() > feature_dim) throw std::invalid_argument("dataset: feature id >= feature_dim");
  }
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> rows) const {
  LabeledDataset out;
  out.feature_dim = feature_dim;
  out.features.reserve(rows.size());
  out.labels.reserve(rows.size());
  for (auto r : rows) {
    out.features.push_back(features.at(r));
    out.labels.push_back(labels.at(r));
  }
  return out;
}

LabeledDataset LabeledDataset::from_dense(std::span<const double> values, std::size_t dim,
                                          std::span<const int> labels) {
  if (values.size() != dim * labels.size()) throw std::invalid_argument("from_dense: shape mismatch");
  LabeledDataset out;
  out.feature_dim = dim;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    out.features.push_back(SparseFeatureVector::from_dense(values.subspan(r * dim, dim)));
    out.labels.push_back(labels[r]);
  }
  return out;
}

double LinearModel::decision(const SparseFeatureVector& x) const {
  if (x.extent() > weights.size()) throw std::invalid_argument("predict: feature id exceeds model dim");
  return x.dot(weights) + intercept;
}

void LinearModel::save(std::ostream& out) const {
  char buf[64];
  auto put = [&](double v) {
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.write(buf, end - buf);
    out.put('\n');
  };
  put(c_value);
  put(intercept);
  for (double w : weights) put(w);
}

LinearModel LinearModel::load(std::istream& in) {
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc{} || ptr != line.data() + line.size()) {
      throw DataError("linear model: bad number '" + line + "'");
    }
    values.push_back(v);
  }
  if (values.size() < 2) throw DataError("linear model: expected C and intercept");
  LinearModel m;
  m.c_value = values[0];
  m.intercept = values[1];
  m.weights.assign(values.begin() + 2, values.end());
  return m;
}

// ---------------------------------------------------------------------------

namespace {

// log(1 + exp(-t))
double softplus_neg(double t) {
  if (t >= 0.0) return std::log1p(std::exp(-t));
  return -t + std::log1p(std::exp(t));
}

double sigma(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot_dense(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Parameters are z = (w, b) with b stored last.
class LogregProblem {
 public:
  LogregProblem(const LabeledDataset& data, double c) : data_(data), c_(c), dim_(data.feature_dim) {}

  std::size_t size() const { return dim_ + 1; }

  double margin(std::size_t i, std::span<const double> z) const {
    return data_.features[i].dot(z) + z[dim_];
  }

  double objective(std::span<const double> z) const {
    double f = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) f += 0.5 * z[j] * z[j];
    double loss = 0.0;
    for (std::size_t i = 0; i < data_.size(); ++i) loss += softplus_neg(data_.labels[i] * margin(i, z));
    return f + c_ * loss;
  }

  // Gradient into `g`; caches the Hessian diagonal weights for hessian_vec.
  void gradient(std::span<const double> z, std::span<double> g) {
    curvature_.resize(data_.size());
    for (std::size_t j = 0; j < dim_; ++j) g[j] = z[j];
    g[dim_] = 0.0;
    for (std::size_t i = 0; i < data_.size(); ++i) {
      const double y = data_.labels[i];
      const double s = sigma(y * margin(i, z));
      curvature_[i] = s * (1.0 - s);
      const double coef = c_ * (s - 1.0) * y;
      for (const auto& [id, x] : data_.features[i].entries) g[id] += coef * x;
      g[dim_] += coef;
    }
  }

  void hessian_vec(std::span<const double> v, std::span<double> out) const {
    for (std::size_t j = 0; j < dim_; ++j) out[j] = v[j];
    out[dim_] = 0.0;
    for (std::size_t i = 0; i < data_.size(); ++i) {
      const double xv = data_.features[i].dot(v) + v[dim_];
      const double coef = c_ * curvature_[i] * xv;
      for (const auto& [id, x] : data_.features[i].entries) out[id] += coef * x;
      out[dim_] += coef;
    }
  }

 private:
  const LabeledDataset& data_;
  double c_;
  std::size_t dim_;
  std::vector<double> curvature_;
};

// Steihaug conjugate gradient for min g's + s'Hs/2 within ||s|| <= radius.
// Returns the step in `s` and the residual -g - Hs in `r`.
void trust_region_cg(const LogregProblem& problem, std::span<const double> g, double radius,
                     double cg_tol, std::span<double> s, std::span<double> r) {
  const std::size_t n = g.size();
  std::vector<double> d(n);
  std::vector<double> hd(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = 0.0;
    r[i] = -g[i];
    d[i] = r[i];
  }
  double rtr = dot_dense(r, r);
  for (std::size_t iter = 0; iter < 2 * n + 10; ++iter) {
    if (std::sqrt(rtr) <= cg_tol) break;
    problem.hessian_vec(d, hd);
    const double dhd = dot_dense(d, hd);
    double alpha = rtr / dhd;
    for (std::size_t i = 0; i < n; ++i) s[i] += alpha * d[i];
    if (norm2(s) > radius) {
      // Step back and move to the trust-region boundary along d.
      for (std::size_t i = 0; i < n; ++i) s[i] -= alpha * d[i];
      const double std_ = dot_dense(s, d);
      const double sts = dot_dense(s, s);
      const double dtd = dot_dense(d, d);
      const double dsq = radius * radius;
      const double rad = std::sqrt(std_ * std_ + dtd * (dsq - sts));
      alpha = std_ >= 0.0 ? (dsq - sts) / (std_ + rad) : (rad - std_) / dtd;
      for (std::size_t i = 0; i < n; ++i) {
        s[i] += alpha * d[i];
        r[i] -= alpha * hd[i];
      }
      return;
    }
    for (std::size_t i = 0; i < n; ++i) r[i] -= alpha * hd[i];
    const double rtr_new = dot_dense(r, r);
    const double beta = rtr_new / rtr;
    for (std::size_t i = 0; i < n; ++i) d[i] = r[i] + beta * d[i];
    rtr = rtr_new;
  }
}

}  // namespace

double logreg_objective(const LabeledDataset& data, std::span<const double> weights,
                        double intercept, double c_value) {
  std::vector<double> z(weights.begin(), weights.end());
  z.push_back(intercept);
  return LogregProblem(data, c_value).objective(z);
}

std::vector<double> logreg_gradient(const LabeledDataset& data, std::span<const double> weights,
                                    double intercept, double c_value) {
  std::vector<double> z(weights.begin(), weights.end());
  z.push_back(intercept);
  std::vector<double> g(z.size());
  LogregProblem(data, c_value).gradient(z, g);
  return g;
}

LinearModel train_logreg(const LabeledDataset& data, double c_value, const LogregOptions& options) {
  data.validate();
  if (!(c_value > 0.0)) throw std::invalid_argument("train_logreg: C must be > 0");
  const bool has_pos = std::find(data.labels.begin(), data.labels.end(), 1) != data.labels.end();
  const bool has_neg = std::find(data.labels.begin(), data.labels.end(), -1) != data.labels.end();
  if (!has_pos || !has_neg) throw std::invalid_argument("train_logreg: both classes are required");

  constexpr double eta0 = 1e-4, eta1 = 0.25, eta2 = 0.75;
  constexpr double sigma1 = 0.25, sigma2 = 0.5, sigma3 = 4.0;

  LogregProblem problem(data, c_value);
  const std::size_t n = problem.size();
  std::vector<double> z(n, 0.0), z_new(n), g(n), s(n), r(n);

  double f = problem.objective(z);
  problem.gradient(z, g);
  double gnorm = norm2(g);
  double radius = gnorm;

  for (int iter = 0; iter < options.max_iterations && gnorm > options.tol; ++iter) {
    const double cg_tol = std::min(0.1, std::sqrt(gnorm)) * gnorm;
    trust_region_cg(problem, g, radius, cg_tol, s, r);
    for (std::size_t i = 0; i < n; ++i) z_new[i] = z[i] + s[i];

    const double gs = dot_dense(g, s);
    const double predicted = -0.5 * (gs - dot_dense(s, r));
    const double f_new = problem.objective(z_new);
    const double actual = f - f_new;
    const double snorm = norm2(s);
    if (iter == 0) radius = std::min(radius, snorm);

    double alpha = f_new - f - gs <= 0.0 ? sigma3 : std::max(sigma1, -0.5 * (gs / (f_new - f - gs)));
    if (actual < eta0 * predicted) {
      radius = std::min(std::max(alpha, sigma1) * snorm, sigma2 * radius);
    } else if (actual < eta1 * predicted) {
      radius = std::max(sigma1 * radius, std::min(alpha * snorm, sigma2 * radius));
    } else if (actual < eta2 * predicted) {
      radius = std::max(sigma1 * radius, std::min(alpha * snorm, sigma3 * radius));
    } else {
      radius = std::max(radius, std::min(alpha * snorm, sigma3 * radius));
    }

    if (actual > eta0 * predicted) {
      z.swap(z_new);
      f = f_new;
      problem.gradient(z, g);
      gnorm = norm2(g);
    } else {
      problem.gradient(z, g);  // restore curvature cache at z
    }
    if (predicted <= 0.0 || radius < 1e-300) break;
  }

  LinearModel model;
  model.c_value = c_value;
  model.intercept = z[n - 1];
  model.weights.assign(z.begin(), z.end() - 1);
  return model;
}

int predict(const LinearModel& model, const SparseFeatureVector& x) {
  return model.decision(x) >= 0.0 ? 1 : -1;
}

int predict(const LinearModel& model, std::span<const double> x) {
  if (x.size() != model.weights.size()) throw std::invalid_argument("predict: dim mismatch");
  return dot_dense(model.weights, x) + model.intercept >= 0.0 ? 1 : -1;
}

double evaluate(const LinearModel& model, const LabeledDataset& data) {
  if (data.empty()) throw std::invalid_argument("evaluate: empty dataset");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (predict(model, data.features[i]) == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split(
    std::span<const int> labels, double dev_fraction, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0xde5);
  std::vector<std::size_t> train_rows, dev_rows;
  for (int cls : {1, -1}) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) rows.push_back(i);
    }
    std::shuffle(rows.begin(), rows.end(), rng);
    const auto n_dev = static_cast<std::size_t>(std::llround(dev_fraction * rows.size()));
    dev_rows.insert(dev_rows.end(), rows.begin(), rows.begin() + n_dev);
    train_rows.insert(train_rows.end(), rows.begin() + n_dev, rows.end());
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(dev_rows.begin(), dev_rows.end());
  return {train_rows, dev_rows};
}

double dev_split_select(const LabeledDataset& data, std::span<const double> c_grid,
                        std::uint64_t seed, const LogregOptions& options) {
  if (c_grid.empty()) throw std::invalid_argument("dev_split_select: empty C grid");
  if (c_grid.size() == 1) return c_grid.front();
  auto [train_rows, dev_rows] = stratified_split(data.labels, 0.2, seed);
  const auto train = data.subset(train_rows);
  const auto dev = data.subset(dev_rows);

  std::vector<double> accuracy(c_grid.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t k = 0; k < c_grid.size(); ++k) {
    accuracy[k] = evaluate(train_logreg(train, c_grid[k], options), dev);
  }
  double best_c = c_grid.front();
  double best_acc = -1.0;
  for (std::size_t k = 0; k < c_grid.size(); ++k) {
    if (accuracy[k] > best_acc || (accuracy[k] == best_acc && c_grid[k] < best_c)) {
      best_acc = accuracy[k];
      best_c = c_grid[k];
    }
  }
  return best_c;
}

}  // namespace dvngram
