#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dvngram/classifier.hpp"
#include "dvngram/corpus.hpp"
#include "dvngram/model.hpp"
#include "dvngram/trainer.hpp"

namespace dvngram {

enum class Split { train, test, unsup };

std::string to_string(Split split);
std::string to_string(Label label);

struct ManifestEntry {
  DocId doc_id = 0;
  Split split = Split::train;
  Label label = Label::unlabeled;
  std::filesystem::path path;
};

struct SplitCounts {
  std::size_t train_pos = 0;
  std::size_t train_neg = 0;
  std::size_t unsup = 0;
  std::size_t test_pos = 0;
  std::size_t test_neg = 0;

  std::size_t total() const { return train_pos + train_neg + unsup + test_pos + test_neg; }
  friend bool operator==(const SplitCounts&, const SplitCounts&) = default;
};

struct Manifest {
  std::vector<ManifestEntry> entries;

  SplitCounts counts() const;

  /// TSV: doc_id, split, label, path.
  void save(const std::filesystem::path& file) const;
  static Manifest load(const std::filesystem::path& file);
};

/// Scans an aclImdb-style tree (train/pos, train/neg, train/unsup, test/pos,
/// test/neg). Files within a directory are taken in lexicographic order; doc
/// ids follow that traversal. Throws DataError naming the first missing split
/// directory, or when no document is found.
Manifest ingest_aclimdb(const std::filesystem::path& root);

/// Raises DataError unless the counts are those of the full IMDB release.
void validate_full_imdb(const SplitCounts& counts);

/// Review text with `<br />` markup replaced by spaces.
std::string read_review(const std::filesystem::path& file);

struct ExperimentConfig {
  std::string preset;
  std::filesystem::path dataset_path;
  std::filesystem::path output_dir = "dvngram_out";
  int ngram_order = 3;
  bool use_unlabeled = false;
  std::uint64_t min_count = 1;
  TrainConfig train;
  bool double_precision = false;
  std::vector<double> c_grid = default_c_grid();
  int runs = 5;
  // 0 means every labeled document of the split.
  std::size_t train_limit = 0;
  std::size_t test_limit = 0;
  std::uint64_t subset_seed = 7;
  bool normalize_dense = false;
  double dense_scale = 1.0;
  bool tf_weighting = false;
  double nb_alpha = 1.0;

  void validate() const;
  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);

  /// FNV-1a of the canonical JSON dump, hex.
  std::string hash() const;
};

/// Named experiment rows: dv-uni, dv-bi, dv-tri, dv-tri-unlabd, bo-uni,
/// bo-bi, bo-tri, dv-tri+nbbo-tri. Throws std::invalid_argument on an unknown
/// name.
ExperimentConfig apply_preset(ExperimentConfig base, const std::string& name);
std::vector<std::string> preset_names();

/// Evaluation modes: document vectors, bag-of-ngram, or their
/// concatenation with NB-weighted bag-of-ngram.
enum class EvalMode { dv, bo, dv_nbbo };
std::string to_string(EvalMode mode);
EvalMode parse_eval_mode(const std::string& text);
EvalMode preset_mode(const std::string& preset);

/// The documents an experiment uses, encoded against one vocabulary.
/// Row r of `documents` has doc_id r.
struct PreparedCorpus {
  Vocabulary vocabulary;
  std::vector<EncodedDocument> documents;
  std::vector<Split> splits;
  std::vector<Label> labels;
  std::vector<DocId> source_ids;  // manifest doc ids

  std::vector<std::size_t> rows(Split split) const;
};

/// Selects the documents (seeded stratified subset when limits are set,
/// unlabeled docs only with use_unlabeled), builds the vocabulary and encodes.
PreparedCorpus prepare_corpus(const ExperimentConfig& config, const Manifest& manifest);

/// Same as prepare_corpus, for documents already in memory.
PreparedCorpus prepare_corpus(const ExperimentConfig& config, const std::vector<RawDocument>& docs,
                              const std::vector<Split>& splits);

/// Document vectors (row-major, double) of a trained model.
struct DocMatrix {
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::vector<double> values;

  std::span<const double> row(std::size_t r) const { return {values.data() + r * dim, dim}; }
};

struct EmbeddingResult {
  DocMatrix doc_vectors;
  std::vector<EpochReport> epochs;
};

/// Trains document vectors over every prepared document (labels unused).
/// Writes doc/token vector files and per-epoch checkpoints into `out_dir`
/// when it is non-empty. Throws NumericError on non-finite parameters.
EmbeddingResult train_embeddings(const PreparedCorpus& corpus, const ExperimentConfig& config,
                                 std::uint64_t seed, const std::filesystem::path& out_dir = {});

struct MetricsReport {
  std::string mode;
  std::vector<double> accuracies;
  std::vector<double> selected_c;
  double mean_accuracy = 0.0;
  ExperimentConfig config;
  double wall_seconds = 0.0;

  nlohmann::json to_json() const;
  std::string to_text() const;
  /// Writes metrics_<hash>_<mode>.txt and .json; returns the .json path.
  std::filesystem::path write(const std::filesystem::path& dir) const;
};

/// Runs `config.runs` seeded repetitions of (embed ->) classify -> score.
/// `vectors_file`, when given, supplies document vectors (rows named by
/// doc_row_name over the prepared corpus) instead of training them.
MetricsReport run_evaluation(const PreparedCorpus& corpus, const ExperimentConfig& config,
                             EvalMode mode,
                             const std::optional<std::filesystem::path>& vectors_file = {});

/// Builds the train/test classification sets for one run.
std::pair<LabeledDataset, LabeledDataset> build_datasets(const PreparedCorpus& corpus,
                                                         const ExperimentConfig& config,
                                                         EvalMode mode, const DocMatrix* vectors);

}  // namespace dvngram
