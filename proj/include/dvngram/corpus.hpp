#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dvngram/random.hpp"

namespace dvngram {

using TokenId = std::uint32_t;
using DocId = std::uint32_t;

enum class Label { positive, negative, unlabeled };

struct RawDocument {
  DocId doc_id = 0;
  std::string text;
  std::optional<Label> label;
};

inline constexpr char kNgramSeparator = '_';

/// Lowercases ASCII letters, splits every ASCII punctuation character into its
/// own token and splits on whitespace. Bytes >= 0x80 are kept as-is.
std::vector<std::string> tokenize(std::string_view text);

/// Returns the words followed by every contiguous n-gram of order
/// 2..max_order, in order of appearance, joined with kNgramSeparator.
std::vector<std::string> extract_ngram_tokens(std::span<const std::string> words, int max_order);

/// Number of tokens extract_ngram_tokens produces for a document of
/// `length` words.
std::size_t ngram_token_count(std::size_t length, int max_order);

/// Unified id space over words and n-gram tokens.
///
/// Ids are contiguous from 0. Vocabularies built by build_vocabulary are
/// ordered by descending frequency, ties broken lexicographically.
class Vocabulary {
 public:
  struct Entry {
    std::string token;
    std::uint64_t count = 0;
    int order = 1;  // 1 for words, n for an n-gram token
  };

  Vocabulary() = default;

  /// Ids are assigned in the given order. Throws on duplicate tokens.
  static Vocabulary from_entries(std::vector<Entry> entries);

  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }

  std::optional<TokenId> find(const std::string& token) const;
  const std::string& token(TokenId id) const { return tokens_.at(id); }
  std::uint64_t frequency(TokenId id) const { return counts_.at(id); }
  int order(TokenId id) const { return orders_.at(id); }
  std::span<const std::uint64_t> frequencies() const { return counts_; }

  /// One line per token: `token<TAB>count<TAB>kind`, kind is `word` or
  /// `ngram<order>`.
  void save(std::ostream& out) const;
  static Vocabulary load(std::istream& in);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_ && a.counts_ == b.counts_ && a.orders_ == b.orders_;
  }

 private:
  std::vector<std::string> tokens_;
  std::vector<std::uint64_t> counts_;
  std::vector<int> orders_;
  std::unordered_map<std::string, TokenId> index_;
};

/// Order tag for a token string: 1 + number of separators; a token made only
/// of separators counts as a word.
int infer_token_order(std::string_view token);

/// Incremental token counter; feed documents one at a time, then finish().
class VocabularyBuilder {
 public:
  void add(std::span<const std::string> tokens);
  Vocabulary finish(std::uint64_t min_count) const;

 private:
  std::unordered_map<std::string, std::uint64_t> counts_;
};

Vocabulary build_vocabulary(std::span<const std::vector<std::string>> documents,
                            std::uint64_t min_count);

struct EncodedDocument {
  DocId doc_id = 0;
  std::vector<TokenId> token_ids;
};

/// Maps the words and their n-gram tokens to ids; out-of-vocabulary tokens
/// are dropped.
EncodedDocument encode(DocId doc_id, std::span<const std::string> words,
                       const Vocabulary& vocabulary, int max_order);

/// Frequency-based negative-sampling distribution: P(t) ∝ frequency(t)^exponent.
class NoiseTable {
 public:
  NoiseTable(std::span<const std::uint64_t> frequencies, double exponent);

  TokenId sample(Rng& rng) const;
  double probability(TokenId id) const;
  std::size_t size() const { return cumulative_.size(); }
  double exponent() const { return exponent_; }
  double total_weight() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }
  std::span<const double> cumulative_weights() const { return cumulative_; }

 private:
  std::vector<double> cumulative_;
  std::vector<double> weights_;
  double exponent_ = 1.0;
};

/// Throws DataError on an empty vocabulary.
NoiseTable build_noise_table(const Vocabulary& vocabulary, double exponent);

inline TokenId sample_negative(const NoiseTable& table, Rng& rng) { return table.sample(rng); }

}  // namespace dvngram
