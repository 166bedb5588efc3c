#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dvngram/corpus.hpp"

namespace dvngram {

/// Hyper-parameters of the document-vector trainer. Defaults are the
/// published optimum for IMDB.
struct TrainConfig {
  int dim = 500;
  double learning_rate = 0.25;
  int mini_batch = 100;
  int epochs = 10;
  int negative_k = 5;
  std::uint64_t seed = 1;
  double noise_exponent = 0.75;
  bool use_bias = false;
  // Linear decay of the learning rate down to 1e-4 * learning_rate.
  bool linear_decay = false;
  int workers = 1;
  double init_range = 0.001;

  /// Throws std::invalid_argument on a violated constraint.
  void validate() const;
};

/// Parameters of the shallow document -> token prediction network.
///
/// Row `d` of the document matrix is the vector of document `d`; row `t` of
/// the token matrix holds the output weights of token `t`. Both are stored
/// row-major, contiguous. Storage precision is `Real`; every reduction over
/// these rows accumulates in double.
template <class Real>
class EmbeddingModel {
 public:
  using value_type = Real;

  EmbeddingModel() = default;
  EmbeddingModel(std::size_t num_docs, std::size_t vocab_size, std::size_t dim, bool use_bias);

  std::size_t dim() const { return dim_; }
  std::size_t num_docs() const { return num_docs_; }
  std::size_t vocab_size() const { return vocab_size_; }
  bool has_bias() const { return !biases_.empty(); }

  std::span<Real> doc_vector(std::size_t doc) { return {docs_.data() + doc * dim_, dim_}; }
  std::span<const Real> doc_vector(std::size_t doc) const { return {docs_.data() + doc * dim_, dim_}; }
  std::span<Real> token_vector(std::size_t token) { return {tokens_.data() + token * dim_, dim_}; }
  std::span<const Real> token_vector(std::size_t token) const {
    return {tokens_.data() + token * dim_, dim_};
  }

  std::span<Real> doc_data() { return docs_; }
  std::span<const Real> doc_data() const { return docs_; }
  std::span<Real> token_data() { return tokens_; }
  std::span<const Real> token_data() const { return tokens_; }
  std::span<Real> biases() { return biases_; }
  std::span<const Real> biases() const { return biases_; }
  double bias(std::size_t token) const { return biases_.empty() ? 0.0 : biases_[token]; }

  bool all_finite() const;

  friend bool operator==(const EmbeddingModel&, const EmbeddingModel&) = default;

 private:
  std::size_t dim_ = 0;
  std::size_t num_docs_ = 0;
  std::size_t vocab_size_ = 0;
  std::vector<Real> docs_;
  std::vector<Real> tokens_;
  std::vector<Real> biases_;
};

/// Every entry i.i.d. uniform on [-init_range, +init_range] from the seeded
/// generator, documents first, then tokens. Biases start at zero.
template <class Real>
EmbeddingModel<Real> init_model(std::size_t num_docs, std::size_t vocab_size,
                                const TrainConfig& config);

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// log(sigmoid(x)) without overflow or underflow to -inf for moderate |x|.
inline double log_sigmoid(double x) {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

template <class Real>
double dot(std::span<const Real> a, std::span<const Real> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return sum;
}

/// x_d . x_t (+ b_t when biases are enabled). Throws std::out_of_range.
template <class Real>
double score(const EmbeddingModel<Real>& model, std::size_t doc, std::size_t token);

// Vector export: first line `<count> <dim>`, then `<name> <v1> ... <vn>`.
// Values are written in shortest round-trip form, so load(save(x)) == x.

template <class Real>
void write_vectors(std::ostream& out, std::span<const Real> data, std::size_t dim,
                   const std::vector<std::string>& names);

struct VectorFile {
  std::vector<std::string> names;
  std::size_t dim = 0;
  std::vector<double> values;  // row-major

  std::size_t rows() const { return names.size(); }
  std::span<const double> row(std::size_t r) const { return {values.data() + r * dim, dim}; }
};

VectorFile read_vectors(std::istream& in);

/// Conventional row name for a document vector.
std::string doc_row_name(DocId doc);

/// Writes doc_vectors.txt, token_vectors.txt and, when enabled, biases.txt.
template <class Real>
void save_model(const EmbeddingModel<Real>& model, const std::vector<std::string>& token_names,
                const std::filesystem::path& dir);

template <class Real>
EmbeddingModel<Real> load_model(const std::filesystem::path& dir);

extern template class EmbeddingModel<float>;
extern template class EmbeddingModel<double>;

}  // namespace dvngram
