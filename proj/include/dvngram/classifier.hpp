#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "dvngram/sparse.hpp"

namespace dvngram {

/// Feature vectors with +1 / -1 labels.
struct LabeledDataset {
  std::vector<SparseFeatureVector> features;
  std::vector<int> labels;
  std::size_t feature_dim = 0;

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }
  void add(SparseFeatureVector x, int label);

  /// Throws std::invalid_argument when sizes, labels or ids are inconsistent.
  void validate() const;

  LabeledDataset subset(std::span<const std::size_t> rows) const;

  /// Rows of a row-major dense matrix.
  static LabeledDataset from_dense(std::span<const double> values, std::size_t dim,
                                   std::span<const int> labels);
};

struct LinearModel {
  std::vector<double> weights;
  double intercept = 0.0;
  double c_value = 1.0;

  double decision(const SparseFeatureVector& x) const;

  /// `C`, `intercept`, then one weight per line.
  void save(std::ostream& out) const;
  static LinearModel load(std::istream& in);
};

struct LogregOptions {
  double tol = 1e-4;  // absolute bound on the gradient norm
  int max_iterations = 1000;
};

/// (1/2) w'w + C Σ log(1 + exp(-y (w'x + b))); the intercept is not
/// regularized.
double logreg_objective(const LabeledDataset& data, std::span<const double> weights,
                        double intercept, double c_value);

/// Gradient of logreg_objective; the last element is d/db.
std::vector<double> logreg_gradient(const LabeledDataset& data, std::span<const double> weights,
                                    double intercept, double c_value);

/// Trust-region Newton-CG. Throws std::invalid_argument on single-class data.
LinearModel train_logreg(const LabeledDataset& data, double c_value,
                         const LogregOptions& options = {});

/// sign(w'x + b), ties -> +1. Throws std::invalid_argument on dim mismatch.
int predict(const LinearModel& model, const SparseFeatureVector& x);
int predict(const LinearModel& model, std::span<const double> x);

/// Fraction of correct predictions. Throws on empty data.
double evaluate(const LinearModel& model, const LabeledDataset& data);

/// Seeded stratified split; returns (train rows, dev rows).
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split(
    std::span<const int> labels, double dev_fraction, std::uint64_t seed);

/// 80/20 stratified split, picks the C with the best dev accuracy; ties go to
/// the smaller C.
double dev_split_select(const LabeledDataset& data, std::span<const double> c_grid,
                        std::uint64_t seed, const LogregOptions& options = {});

inline const std::vector<double>& default_c_grid() {
  static const std::vector<double> grid{0.01, 0.1, 1.0, 10.0, 100.0};
  return grid;
}

}  // namespace dvngram
