#include "dvngram/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dvngram {

SparseFeatureVector bag_of_ngram_features(const EncodedDocument& doc, std::size_t vocab_size,
                                          TermWeighting weighting) {
  std::vector<TokenId> ids = doc.token_ids;
  std::sort(ids.begin(), ids.end());
  SparseFeatureVector out;
  for (auto id : ids) {
    if (id >= vocab_size) throw std::invalid_argument("bag_of_ngram_features: token id >= vocab size");
    if (!out.entries.empty() && out.entries.back().first == id) {
      if (weighting == TermWeighting::term_frequency) out.entries.back().second += 1.0;
    } else {
      out.entries.emplace_back(id, 1.0);
    }
  }
  return out;
}

NbWeights fit_nb_weights(std::span<const SparseFeatureVector> features, std::span<const int> labels,
                         std::size_t feature_dim, double alpha) {
  if (features.size() != labels.size()) throw std::invalid_argument("fit_nb_weights: size mismatch");
  if (!(alpha > 0.0)) throw std::invalid_argument("fit_nb_weights: alpha must be > 0");
  const bool has_pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
  const bool has_neg = std::find(labels.begin(), labels.end(), -1) != labels.end();
  if (!has_pos || !has_neg) throw std::invalid_argument("fit_nb_weights: both classes are required");

  std::vector<double> p(feature_dim, alpha);
  std::vector<double> q(feature_dim, alpha);
  for (std::size_t i = 0; i < features.size(); ++i) {
    auto& target = labels[i] > 0 ? p : q;
    for (const auto& [id, w] : features[i].entries) {
      if (id >= feature_dim) throw std::invalid_argument("fit_nb_weights: feature id >= feature_dim");
      if (w != 0.0) target[id] += 1.0;
    }
  }
  double p_norm = 0.0;
  double q_norm = 0.0;
  for (std::size_t j = 0; j < feature_dim; ++j) {
    p_norm += p[j];
    q_norm += q[j];
  }
  NbWeights out;
  out.alpha = alpha;
  out.r.resize(feature_dim);
  for (std::size_t j = 0; j < feature_dim; ++j) {
    out.r[j] = std::log((p[j] / p_norm) / (q[j] / q_norm));
  }
  return out;
}

SparseFeatureVector nb_weighted_features(const SparseFeatureVector& x, const NbWeights& weights) {
  SparseFeatureVector out;
  out.entries.reserve(x.entries.size());
  for (const auto& [id, w] : x.entries) {
    if (id >= weights.r.size()) throw std::invalid_argument("nb_weighted_features: dim mismatch");
    const double v = weights.r[id] * w;
    if (v != 0.0) out.entries.emplace_back(id, v);
  }
  return out;
}

SparseFeatureVector concat_features(std::span<const double> dense, const SparseFeatureVector& sparse,
                                    double dense_scale) {
  SparseFeatureVector out;
  out.entries.reserve(dense.size() + sparse.nnz());
  for (std::size_t i = 0; i < dense.size(); ++i) {
    const double v = dense_scale * dense[i];
    if (v != 0.0) out.entries.emplace_back(static_cast<FeatureId>(i), v);
  }
  const auto shift = static_cast<FeatureId>(dense.size());
  for (const auto& [id, w] : sparse.entries) out.entries.emplace_back(id + shift, w);
  return out;
}

}  // namespace dvngram
