#pragma once

#include <span>
#include <vector>

#include "dvngram/corpus.hpp"
#include "dvngram/sparse.hpp"

namespace dvngram {

enum class TermWeighting { binary, term_frequency };

/// One-hot bag-of-ngram vector over the unified vocabulary. With binary
/// weighting every distinct token id gets 1.0; term_frequency stores counts.
SparseFeatureVector bag_of_ngram_features(const EncodedDocument& doc, std::size_t vocab_size,
                                          TermWeighting weighting = TermWeighting::binary);

/// Naive Bayes log-count ratios.
struct NbWeights {
  std::vector<double> r;
  double alpha = 1.0;
};

/// p = alpha + Σ_{y=+1} x̂, q = alpha + Σ_{y=-1} x̂ over binarized x̂,
/// r = log((p / |p|_1) / (q / |q|_1)). Labels are +1 / -1.
NbWeights fit_nb_weights(std::span<const SparseFeatureVector> features, std::span<const int> labels,
                         std::size_t feature_dim, double alpha = 1.0);

/// x_i <- r_i * x_i; entries that become zero are dropped.
SparseFeatureVector nb_weighted_features(const SparseFeatureVector& x, const NbWeights& weights);

/// Dense block at ids [0, dense.size()) scaled by dense_scale, followed by the
/// sparse vector shifted by dense.size().
SparseFeatureVector concat_features(std::span<const double> dense, const SparseFeatureVector& sparse,
                                    double dense_scale = 1.0);

}  // namespace dvngram
