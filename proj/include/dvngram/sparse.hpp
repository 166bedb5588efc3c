#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace dvngram {

using FeatureId = std::uint32_t;

/// Sorted (feature id, weight) pairs. Ids strictly increasing, no stored
/// zeros.
struct SparseFeatureVector {
  std::vector<std::pair<FeatureId, double>> entries;

  std::size_t nnz() const { return entries.size(); }
  bool empty() const { return entries.empty(); }

  /// Largest id + 1, or 0 when empty.
  std::size_t extent() const { return entries.empty() ? 0 : entries.back().first + 1; }

  bool is_canonical() const;

  /// Sorts, merges duplicates by summation and drops zeros.
  static SparseFeatureVector from_unsorted(std::vector<std::pair<FeatureId, double>> entries);
  static SparseFeatureVector from_dense(std::span<const double> dense);

  double dot(std::span<const double> weights) const {
    double sum = 0.0;
    for (const auto& [id, w] : entries) sum += w * weights[id];
    return sum;
  }

  friend bool operator==(const SparseFeatureVector&, const SparseFeatureVector&) = default;
};

// Line format `label id:weight id:weight ...` with 1-based ids on disk, as read
// by liblinear/libsvm tools.
void write_sparse_line(std::ostream& out, int label, const SparseFeatureVector& x);
std::pair<int, SparseFeatureVector> parse_sparse_line(std::string_view line);

}  // namespace dvngram
