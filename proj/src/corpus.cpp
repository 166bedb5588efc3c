#include "dvngram/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "dvngram/errors.hpp"

namespace dvngram {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  };
  for (char raw : text) {
    const auto c = static_cast<unsigned char>(raw);
    if (c < 0x80 && std::isspace(c)) {
      flush();
    } else if (c < 0x80 && std::ispunct(c)) {
      flush();
      tokens.emplace_back(1, raw);
    } else {
      current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : raw);
    }
  }
  flush();
  return tokens;
}

std::size_t ngram_token_count(std::size_t length, int max_order) {
  std::size_t total = 0;
  for (int n = 1; n <= max_order; ++n) {
    const auto order = static_cast<std::size_t>(n);
    if (length >= order) total += length - order + 1;
  }
  return total;
}

std::vector<std::string> extract_ngram_tokens(std::span<const std::string> words, int max_order) {
  if (max_order < 1) throw std::invalid_argument("extract_ngram_tokens: max_order must be >= 1");
  std::vector<std::string> out;
  out.reserve(ngram_token_count(words.size(), max_order));
  out.insert(out.end(), words.begin(), words.end());
  for (int n = 2; n <= max_order; ++n) {
    const auto order = static_cast<std::size_t>(n);
    if (words.size() < order) break;
    for (std::size_t start = 0; start + order <= words.size(); ++start) {
      std::string joined = words[start];
      for (std::size_t k = 1; k < order; ++k) {
        joined.push_back(kNgramSeparator);
        joined += words[start + k];
      }
      out.push_back(std::move(joined));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

Vocabulary Vocabulary::from_entries(std::vector<Entry> entries) {
  Vocabulary v;
  v.tokens_.reserve(entries.size());
  v.counts_.reserve(entries.size());
  v.orders_.reserve(entries.size());
  v.index_.reserve(entries.size());
  for (auto& e : entries) {
    const auto id = static_cast<TokenId>(v.tokens_.size());
    if (!v.index_.emplace(e.token, id).second) {
      throw std::invalid_argument("Vocabulary: duplicate token '" + e.token + "'");
    }
    v.tokens_.push_back(std::move(e.token));
    v.counts_.push_back(e.count);
    v.orders_.push_back(e.order);
  }
  return v;
}

std::optional<TokenId> Vocabulary::find(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void Vocabulary::save(std::ostream& out) const {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    out << tokens_[i] << '\t' << counts_[i] << '\t';
    if (orders_[i] == 1) {
      out << "word";
    } else {
      out << "ngram" << orders_[i];
    }
    out << '\n';
  }
}

Vocabulary Vocabulary::load(std::istream& in) {
  std::vector<Entry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) {
      throw DataError("vocabulary line " + std::to_string(line_no) + ": expected 3 tab-separated fields");
    }
    Entry e;
    e.token = line.substr(0, t1);
    try {
      e.count = std::stoull(line.substr(t1 + 1, t2 - t1 - 1));
    } catch (const std::exception&) {
      throw DataError("vocabulary line " + std::to_string(line_no) + ": bad count");
    }
    const std::string kind = line.substr(t2 + 1);
    if (kind == "word") {
      e.order = 1;
    } else if (kind.rfind("ngram", 0) == 0 && kind.size() > 5) {
      e.order = std::stoi(kind.substr(5));
    } else {
      throw DataError("vocabulary line " + std::to_string(line_no) + ": bad kind '" + kind + "'");
    }
    entries.push_back(std::move(e));
  }
  return from_entries(std::move(entries));
}

int infer_token_order(std::string_view token) {
  if (token.find_first_not_of(kNgramSeparator) == std::string_view::npos) return 1;
  return 1 + static_cast<int>(std::count(token.begin(), token.end(), kNgramSeparator));
}

void VocabularyBuilder::add(std::span<const std::string> tokens) {
  for (const auto& t : tokens) ++counts_[t];
}

Vocabulary VocabularyBuilder::finish(std::uint64_t min_count) const {
  if (min_count < 1) throw std::invalid_argument("build_vocabulary: min_count must be >= 1");
  std::vector<Vocabulary::Entry> entries;
  for (const auto& [token, count] : counts_) {
    if (count >= min_count) entries.push_back({token, count, infer_token_order(token)});
  }
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.token < b.token;
  });
  return Vocabulary::from_entries(std::move(entries));
}

Vocabulary build_vocabulary(std::span<const std::vector<std::string>> documents,
                            std::uint64_t min_count) {
  VocabularyBuilder builder;
  for (const auto& doc : documents) builder.add(doc);
  return builder.finish(min_count);
}

EncodedDocument encode(DocId doc_id, std::span<const std::string> words,
                       const Vocabulary& vocabulary, int max_order) {
  EncodedDocument doc;
  doc.doc_id = doc_id;
  for (const auto& token : extract_ngram_tokens(words, max_order)) {
    if (auto id = vocabulary.find(token)) doc.token_ids.push_back(*id);
  }
  return doc;
}

// ---------------------------------------------------------------------------

NoiseTable::NoiseTable(std::span<const std::uint64_t> frequencies, double exponent)
    : exponent_(exponent) {
  if (frequencies.empty()) throw DataError("noise table: empty vocabulary, corpus is unusable");
  if (!(exponent > 0.0)) throw std::invalid_argument("noise table: exponent must be > 0");
  weights_.reserve(frequencies.size());
  cumulative_.reserve(frequencies.size());
  double running = 0.0;
  for (auto f : frequencies) {
    const double w = std::pow(static_cast<double>(f), exponent);
    weights_.push_back(w);
    running += w;
    cumulative_.push_back(running);
  }
  if (!(running > 0.0)) throw DataError("noise table: all token frequencies are zero");
}

TokenId NoiseTable::sample(Rng& rng) const {
  const double u = uniform01(rng) * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) --it;
  return static_cast<TokenId>(it - cumulative_.begin());
}

double NoiseTable::probability(TokenId id) const { return weights_.at(id) / cumulative_.back(); }

NoiseTable build_noise_table(const Vocabulary& vocabulary, double exponent) {
  return NoiseTable(vocabulary.frequencies(), exponent);
}

}  // namespace dvngram
