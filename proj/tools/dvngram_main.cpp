// dvngram: document vectors from word and n-gram prediction.
//
//   dvngram ingest   --dataset aclImdb [--manifest out.tsv] [--expect-full]
//   dvngram vocab    --preset dv-tri --dataset aclImdb --output out/
//   dvngram train    --preset dv-tri --dataset aclImdb --output out/
//   dvngram evaluate --preset bo-uni --dataset aclImdb --output out/
//   dvngram combine  --preset dv-tri+nbbo-tri --dataset aclImdb --output out/
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dvngram/errors.hpp"
#include "dvngram/pipeline.hpp"

namespace fs = std::filesystem;
using namespace dvngram;

namespace {

constexpr int kUsageError = 1;
constexpr int kDataError = 2;
constexpr int kNumericError = 3;

struct Overrides {
  std::string config_file;
  std::string preset;
  std::string dataset;
  std::string manifest;
  std::string output;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<int> runs;
  std::optional<int> epochs;
  std::optional<int> dim;
  std::optional<double> learning_rate;
  bool linear_decay = false;
  std::optional<int> ngram_order;
  std::optional<std::size_t> train_limit;
  std::optional<std::size_t> test_limit;
  std::optional<std::uint64_t> min_count;
  bool use_unlabeled = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_file, "JSON experiment config");
  cmd->add_option("--preset", o.preset, "named experiment row");
  cmd->add_option("--dataset", o.dataset, "aclImdb directory");
  cmd->add_option("--manifest", o.manifest, "manifest from `ingest` (instead of --dataset)");
  cmd->add_option("--output", o.output, "output directory");
  cmd->add_option("--seed", o.seed, "base random seed");
  cmd->add_option("--workers", o.workers, "training threads (1 = deterministic)");
  cmd->add_option("--runs", o.runs, "repetitions to average");
  cmd->add_option("--epochs", o.epochs);
  cmd->add_option("--dim", o.dim);
  cmd->add_option("--lr", o.learning_rate, "SGD learning rate");
  cmd->add_flag("--linear-decay", o.linear_decay, "decay the rate linearly to 1e-4 of its start");
  cmd->add_option("--ngram", o.ngram_order, "maximum n-gram order");
  cmd->add_option("--train-limit", o.train_limit, "labeled training docs to sample (0 = all)");
  cmd->add_option("--test-limit", o.test_limit, "labeled test docs to sample (0 = all)");
  cmd->add_option("--min-count", o.min_count);
  cmd->add_flag("--unlabeled", o.use_unlabeled, "also train on train/unsup");
}

ExperimentConfig resolve(const Overrides& o) {
  ExperimentConfig config;
  if (!o.config_file.empty()) {
    std::ifstream in(o.config_file);
    if (!in) throw DataError("cannot read config '" + o.config_file + "'");
    config = ExperimentConfig::from_json(nlohmann::json::parse(in));
  }
  const std::string preset = !o.preset.empty() ? o.preset : config.preset;
  if (!preset.empty()) config = apply_preset(config, preset);
  if (!o.dataset.empty()) config.dataset_path = o.dataset;
  if (!o.output.empty()) config.output_dir = o.output;
  if (o.seed) config.train.seed = *o.seed;
  if (o.workers) config.train.workers = *o.workers;
  if (o.runs) config.runs = *o.runs;
  if (o.epochs) config.train.epochs = *o.epochs;
  if (o.dim) config.train.dim = *o.dim;
  if (o.learning_rate) config.train.learning_rate = *o.learning_rate;
  if (o.linear_decay) config.train.linear_decay = true;
  if (o.ngram_order) config.ngram_order = *o.ngram_order;
  if (o.train_limit) config.train_limit = *o.train_limit;
  if (o.test_limit) config.test_limit = *o.test_limit;
  if (o.min_count) config.min_count = *o.min_count;
  if (o.use_unlabeled) config.use_unlabeled = true;
  config.validate();
  return config;
}

Manifest load_manifest(const Overrides& o, const ExperimentConfig& config) {
  if (!o.manifest.empty()) return Manifest::load(o.manifest);
  if (config.dataset_path.empty()) throw std::invalid_argument("either --dataset or --manifest is required");
  return ingest_aclimdb(config.dataset_path);
}

void print_counts(const SplitCounts& c) {
  std::cout << "train/pos " << c.train_pos << "\ntrain/neg " << c.train_neg << "\ntrain/unsup "
            << c.unsup << "\ntest/pos " << c.test_pos << "\ntest/neg " << c.test_neg << "\ntotal "
            << c.total() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DV-ngram document embeddings and sentiment classification"};
  app.require_subcommand(1);

  std::string ingest_dataset, ingest_out;
  bool expect_full = false;
  auto* ingest = app.add_subcommand("ingest", "scan an aclImdb tree and write a manifest");
  ingest->add_option("--dataset", ingest_dataset, "aclImdb directory")->required();
  ingest->add_option("--manifest", ingest_out, "manifest output path");
  ingest->add_flag("--expect-full", expect_full, "require the full IMDB split sizes");

  Overrides vocab_opts, train_opts, eval_opts, combine_opts;
  auto* vocab = app.add_subcommand("vocab", "build and save the vocabulary");
  add_common(vocab, vocab_opts);
  auto* train_cmd = app.add_subcommand("train", "train document vectors");
  add_common(train_cmd, train_opts);

  std::string mode_text, vectors_file;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "classify and report accuracy");
  add_common(evaluate_cmd, eval_opts);
  evaluate_cmd->add_option("--mode", mode_text, "dv, bo or dv+nbbo (default from preset)");
  evaluate_cmd->add_option("--vectors", vectors_file, "use this doc-vector file instead of training");

  std::string combine_vectors;
  auto* combine = app.add_subcommand("combine", "doc vectors + NB-weighted bag-of-ngram");
  add_common(combine, combine_opts);
  combine->add_option("--vectors", combine_vectors, "use this doc-vector file instead of training");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsageError;
  }

  try {
    if (*ingest) {
      const auto manifest = ingest_aclimdb(ingest_dataset);
      const auto counts = manifest.counts();
      if (expect_full) validate_full_imdb(counts);
      print_counts(counts);
      if (!ingest_out.empty()) manifest.save(ingest_out);
      return 0;
    }
    if (*vocab) {
      const auto config = resolve(vocab_opts);
      const auto corpus = prepare_corpus(config, load_manifest(vocab_opts, config));
      fs::create_directories(config.output_dir);
      std::ofstream out(config.output_dir / "vocab.txt");
      corpus.vocabulary.save(out);
      std::cout << "vocabulary: " << corpus.vocabulary.size() << " tokens over "
                << corpus.documents.size() << " documents\n";
      return 0;
    }
    if (*train_cmd) {
      const auto config = resolve(train_opts);
      const auto corpus = prepare_corpus(config, load_manifest(train_opts, config));
      fs::create_directories(config.output_dir);
      {
        std::ofstream out(config.output_dir / "vocab.txt");
        corpus.vocabulary.save(out);
      }
      const auto result = train_embeddings(corpus, config, config.train.seed, config.output_dir);
      for (const auto& r : result.epochs) {
        std::cout << "epoch " << r.epoch << " objective " << r.mean_objective << " pairs "
                  << r.pairs_processed << " seconds " << r.wall_seconds << '\n';
      }
      std::cout << "wrote " << (config.output_dir / "doc_vectors.txt").string() << '\n';
      return 0;
    }
    if (*evaluate_cmd || *combine) {
      const bool is_combine = static_cast<bool>(*combine);
      const Overrides& o = is_combine ? combine_opts : eval_opts;
      const auto config = resolve(o);
      EvalMode mode = EvalMode::dv_nbbo;
      if (!is_combine) {
        mode = !mode_text.empty() ? parse_eval_mode(mode_text) : preset_mode(config.preset);
      }
      const std::string& vf = is_combine ? combine_vectors : vectors_file;
      const auto corpus = prepare_corpus(config, load_manifest(o, config));
      std::optional<fs::path> vectors;
      if (!vf.empty()) vectors = fs::path(vf);
      const auto report = run_evaluation(corpus, config, mode, vectors);
      const auto path = report.write(config.output_dir);
      std::cout << report.to_text() << "wrote " << path.string() << '\n';
      return 0;
    }
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumericError;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsageError;
}
