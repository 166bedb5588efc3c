#include "dvngram/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>

#include "dvngram/baselines.hpp"
#include "dvngram/errors.hpp"

namespace dvngram {

namespace fs = std::filesystem;

std::string to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::test: return "test";
    case Split::unsup: return "unsup";
  }
  return "?";
}

std::string to_string(Label label) {
  switch (label) {
    case Label::positive: return "pos";
    case Label::negative: return "neg";
    case Label::unlabeled: return "unsup";
  }
  return "?";
}

namespace {

Split parse_split(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "test") return Split::test;
  if (s == "unsup") return Split::unsup;
  throw DataError("manifest: unknown split '" + s + "'");
}

Label parse_label(const std::string& s) {
  if (s == "pos") return Label::positive;
  if (s == "neg") return Label::negative;
  if (s == "unsup") return Label::unlabeled;
  throw DataError("manifest: unknown label '" + s + "'");
}

int label_sign(Label label) { return label == Label::positive ? 1 : -1; }

}  // namespace

SplitCounts Manifest::counts() const {
  SplitCounts c;
  for (const auto& e : entries) {
    if (e.split == Split::unsup) {
      ++c.unsup;
    } else if (e.split == Split::train) {
      (e.label == Label::positive ? c.train_pos : c.train_neg)++;
    } else {
      (e.label == Label::positive ? c.test_pos : c.test_neg)++;
    }
  }
  return c;
}

void Manifest::save(const fs::path& file) const {
  std::ofstream out(file);
  if (!out) throw DataError("cannot write manifest '" + file.string() + "'");
  for (const auto& e : entries) {
    out << e.doc_id << '\t' << to_string(e.split) << '\t' << to_string(e.label) << '\t'
        << e.path.string() << '\n';
  }
}

Manifest Manifest::load(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot read manifest '" + file.string() + "'");
  Manifest m;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string id, split, label, path;
    if (!std::getline(fields, id, '\t') || !std::getline(fields, split, '\t') ||
        !std::getline(fields, label, '\t') || !std::getline(fields, path)) {
      throw DataError("manifest: malformed line '" + line + "'");
    }
    m.entries.push_back({static_cast<DocId>(std::stoul(id)), parse_split(split), parse_label(label), path});
  }
  return m;
}

Manifest ingest_aclimdb(const fs::path& root) {
  struct Part {
    const char* dir;
    Split split;
    Label label;
  };
  static constexpr Part parts[] = {
      {"train/pos", Split::train, Label::positive},  {"train/neg", Split::train, Label::negative},
      {"train/unsup", Split::train, Label::unlabeled}, {"test/pos", Split::test, Label::positive},
      {"test/neg", Split::test, Label::negative},
  };
  if (!fs::is_directory(root)) throw DataError("dataset directory '" + root.string() + "' not found");
  for (const auto& part : parts) {
    if (!fs::is_directory(root / part.dir)) {
      throw DataError("dataset is missing split directory '" + std::string(part.dir) + "'");
    }
  }
  Manifest m;
  for (const auto& part : parts) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(root / part.dir)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    const Split split = part.label == Label::unlabeled ? Split::unsup : part.split;
    for (auto& f : files) {
      m.entries.push_back({static_cast<DocId>(m.entries.size()), split, part.label, std::move(f)});
    }
  }
  if (m.entries.empty()) throw DataError("dataset '" + root.string() + "' contains no documents");
  return m;
}

void validate_full_imdb(const SplitCounts& c) {
  const SplitCounts expected{12500, 12500, 50000, 12500, 12500};
  if (!(c == expected)) {
    std::ostringstream msg;
    msg << "not the full IMDB release: train pos/neg " << c.train_pos << '/' << c.train_neg
        << ", unsup " << c.unsup << ", test pos/neg " << c.test_pos << '/' << c.test_neg;
    throw DataError(msg.str());
  }
}

std::string read_review(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw DataError("cannot read '" + file.string() + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  static const std::string kBreak = "<br />";
  for (auto pos = text.find(kBreak); pos != std::string::npos; pos = text.find(kBreak, pos)) {
    text.replace(pos, kBreak.size(), " ");
  }
  return text;
}

// ---------------------------------------------------------------------------

void ExperimentConfig::validate() const {
  train.validate();
  if (ngram_order < 1 || ngram_order > 3) throw std::invalid_argument("ngram_order must be 1, 2 or 3");
  if (runs < 1) throw std::invalid_argument("runs must be >= 1");
  if (min_count < 1) throw std::invalid_argument("min_count must be >= 1");
  if (c_grid.empty()) throw std::invalid_argument("c_grid must not be empty");
  for (double c : c_grid) {
    if (!(c > 0.0)) throw std::invalid_argument("c_grid values must be > 0");
  }
  if (!(nb_alpha > 0.0)) throw std::invalid_argument("nb_alpha must be > 0");
}

nlohmann::json ExperimentConfig::to_json() const {
  return {
      {"preset", preset},
      {"dataset_path", dataset_path.string()},
      {"output_dir", output_dir.string()},
      {"ngram_order", ngram_order},
      {"use_unlabeled", use_unlabeled},
      {"min_count", min_count},
      {"dim", train.dim},
      {"learning_rate", train.learning_rate},
      {"mini_batch", train.mini_batch},
      {"epochs", train.epochs},
      {"negative_k", train.negative_k},
      {"seed", train.seed},
      {"noise_exponent", train.noise_exponent},
      {"use_bias", train.use_bias},
      {"linear_decay", train.linear_decay},
      {"workers", train.workers},
      {"init_range", train.init_range},
      {"double_precision", double_precision},
      {"c_grid", c_grid},
      {"runs", runs},
      {"train_limit", train_limit},
      {"test_limit", test_limit},
      {"subset_seed", subset_seed},
      {"normalize_dense", normalize_dense},
      {"dense_scale", dense_scale},
      {"tf_weighting", tf_weighting},
      {"nb_alpha", nb_alpha},
  };
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  static const std::vector<std::string> known = {
      "preset",       "dataset_path", "output_dir",     "ngram_order", "use_unlabeled",
      "min_count",    "dim",          "learning_rate",  "mini_batch",  "epochs",
      "negative_k",   "seed",         "noise_exponent", "use_bias",    "linear_decay",
      "workers",      "init_range",   "double_precision", "c_grid",    "runs",
      "train_limit",  "test_limit",   "subset_seed",    "normalize_dense", "dense_scale",
      "tf_weighting", "nb_alpha"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  std::string dataset = c.dataset_path.string();
  std::string output = c.output_dir.string();
  get("preset", c.preset);
  get("dataset_path", dataset);
  get("output_dir", output);
  c.dataset_path = dataset;
  c.output_dir = output;
  get("ngram_order", c.ngram_order);
  get("use_unlabeled", c.use_unlabeled);
  get("min_count", c.min_count);
  get("dim", c.train.dim);
  get("learning_rate", c.train.learning_rate);
  get("mini_batch", c.train.mini_batch);
  get("epochs", c.train.epochs);
  get("negative_k", c.train.negative_k);
  get("seed", c.train.seed);
  get("noise_exponent", c.train.noise_exponent);
  get("use_bias", c.train.use_bias);
  get("linear_decay", c.train.linear_decay);
  get("workers", c.train.workers);
  get("init_range", c.train.init_range);
  get("double_precision", c.double_precision);
  get("c_grid", c.c_grid);
  get("runs", c.runs);
  get("train_limit", c.train_limit);
  get("test_limit", c.test_limit);
  get("subset_seed", c.subset_seed);
  get("normalize_dense", c.normalize_dense);
  get("dense_scale", c.dense_scale);
  get("tf_weighting", c.tf_weighting);
  get("nb_alpha", c.nb_alpha);
  return c;
}

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_json().dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

std::vector<std::string> preset_names() {
  return {"dv-uni", "dv-bi", "dv-tri", "dv-tri-unlabd", "bo-uni", "bo-bi", "bo-tri", "dv-tri+nbbo-tri"};
}

ExperimentConfig apply_preset(ExperimentConfig base, const std::string& name) {
  static const std::map<std::string, std::pair<int, bool>> table = {
      {"dv-uni", {1, false}}, {"dv-bi", {2, false}},  {"dv-tri", {3, false}},
      {"dv-tri-unlabd", {3, true}}, {"bo-uni", {1, false}}, {"bo-bi", {2, false}},
      {"bo-tri", {3, false}}, {"dv-tri+nbbo-tri", {3, false}},
  };
  auto it = table.find(name);
  if (it == table.end()) throw std::invalid_argument("unknown preset '" + name + "'");
  base.preset = name;
  base.ngram_order = it->second.first;
  base.use_unlabeled = it->second.second;
  return base;
}

std::string to_string(EvalMode mode) {
  switch (mode) {
    case EvalMode::dv: return "dv";
    case EvalMode::bo: return "bo";
    case EvalMode::dv_nbbo: return "dv+nbbo";
  }
  return "?";
}

EvalMode parse_eval_mode(const std::string& text) {
  if (text == "dv") return EvalMode::dv;
  if (text == "bo") return EvalMode::bo;
  if (text == "dv+nbbo") return EvalMode::dv_nbbo;
  throw std::invalid_argument("unknown mode '" + text + "' (expected dv, bo or dv+nbbo)");
}

EvalMode preset_mode(const std::string& preset) {
  if (preset.rfind("bo-", 0) == 0) return EvalMode::bo;
  if (preset.find("+nbbo") != std::string::npos) return EvalMode::dv_nbbo;
  return EvalMode::dv;
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> PreparedCorpus::rows(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < splits.size(); ++r) {
    if (splits[r] == split) out.push_back(r);
  }
  return out;
}

namespace {

struct Selected {
  DocId source_id;
  Split split;
  Label label;
};

// Seeded stratified choice of `limit` labeled documents (all when limit is 0).
std::vector<std::size_t> choose_labeled(const std::vector<Selected>& docs, Split split,
                                        std::size_t limit, std::uint64_t seed) {
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (docs[i].split != split) continue;
    (docs[i].label == Label::positive ? pos : neg).push_back(i);
  }
  if (limit > 0 && limit < pos.size() + neg.size()) {
    Rng rng = make_rng(seed, split == Split::train ? 1 : 2);
    std::shuffle(pos.begin(), pos.end(), rng);
    std::shuffle(neg.begin(), neg.end(), rng);
    const double share = static_cast<double>(pos.size()) / static_cast<double>(pos.size() + neg.size());
    std::size_t n_pos = std::min<std::size_t>(pos.size(), std::llround(share * limit));
    std::size_t n_neg = std::min(neg.size(), limit - n_pos);
    pos.resize(n_pos);
    neg.resize(n_neg);
  }
  std::vector<std::size_t> out = pos;
  out.insert(out.end(), neg.begin(), neg.end());
  std::sort(out.begin(), out.end());
  return out;
}

PreparedCorpus prepare_selected(const ExperimentConfig& config, const std::vector<Selected>& docs,
                                const std::function<std::string(std::size_t)>& text_of) {
  config.validate();
  std::vector<std::size_t> chosen = choose_labeled(docs, Split::train, config.train_limit, config.subset_seed);
  auto test = choose_labeled(docs, Split::test, config.test_limit, config.subset_seed);
  chosen.insert(chosen.end(), test.begin(), test.end());
  if (config.use_unlabeled) {
    for (std::size_t i = 0; i < docs.size(); ++i) {
      if (docs[i].split == Split::unsup) chosen.push_back(i);
    }
  }
  if (chosen.empty()) throw DataError("no documents selected for the experiment");

  VocabularyBuilder builder;
  for (auto i : chosen) {
    builder.add(extract_ngram_tokens(tokenize(text_of(i)), config.ngram_order));
  }
  PreparedCorpus corpus;
  corpus.vocabulary = builder.finish(config.min_count);
  for (auto i : chosen) {
    const auto row = static_cast<DocId>(corpus.documents.size());
    corpus.documents.push_back(encode(row, tokenize(text_of(i)), corpus.vocabulary, config.ngram_order));
    corpus.splits.push_back(docs[i].split);
    corpus.labels.push_back(docs[i].label);
    corpus.source_ids.push_back(docs[i].source_id);
  }
  return corpus;
}

}  // namespace

PreparedCorpus prepare_corpus(const ExperimentConfig& config, const Manifest& manifest) {
  std::vector<Selected> docs;
  docs.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) docs.push_back({e.doc_id, e.split, e.label});
  return prepare_selected(config, docs,
                          [&](std::size_t i) { return read_review(manifest.entries[i].path); });
}

PreparedCorpus prepare_corpus(const ExperimentConfig& config, const std::vector<RawDocument>& raw,
                              const std::vector<Split>& splits) {
  if (raw.size() != splits.size()) throw std::invalid_argument("prepare_corpus: size mismatch");
  std::vector<Selected> docs;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    docs.push_back({raw[i].doc_id, splits[i], raw[i].label.value_or(Label::unlabeled)});
  }
  return prepare_selected(config, docs, [&](std::size_t i) { return raw[i].text; });
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> token_names(const Vocabulary& vocab) {
  std::vector<std::string> names;
  names.reserve(vocab.size());
  for (TokenId t = 0; t < vocab.size(); ++t) names.push_back(vocab.token(t));
  return names;
}

template <class Real>
EmbeddingResult train_embeddings_as(const PreparedCorpus& corpus, const ExperimentConfig& config,
                                    std::uint64_t seed, const fs::path& out_dir) {
  TrainConfig cfg = config.train;
  cfg.seed = seed;
  auto model = init_model<Real>(corpus.documents.size(), corpus.vocabulary.size(), cfg);
  const auto noise = build_noise_table(corpus.vocabulary, cfg.noise_exponent);
  const auto names = token_names(corpus.vocabulary);

  TrainOptions options;
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    options.on_epoch = [&](const EpochReport& report, const Rng& rng) {
      const fs::path ckpt = out_dir / "checkpoint";
      save_model(model, names, ckpt);
      std::ofstream header(ckpt / "header.txt");
      header << "epoch " << report.epoch << '\n'
             << "config_hash " << config.hash() << '\n'
             << "seed " << seed << '\n'
             << "rng_state " << rng << '\n';
    };
  }
  EmbeddingResult result;
  result.epochs = train(model, corpus.documents, noise, cfg, options);
  if (!model.all_finite()) throw NumericError("training produced non-finite parameters");
  if (!out_dir.empty()) {
    save_model(model, names, out_dir);
    std::ofstream reports(out_dir / "epochs.tsv");
    reports << "epoch\tmean_objective\tpairs\twall_seconds\n";
    for (const auto& r : result.epochs) {
      reports << r.epoch << '\t' << std::setprecision(17) << r.mean_objective << '\t'
              << r.pairs_processed << '\t' << r.wall_seconds << '\n';
    }
  }
  result.doc_vectors.rows = model.num_docs();
  result.doc_vectors.dim = model.dim();
  result.doc_vectors.values.assign(model.doc_data().begin(), model.doc_data().end());
  return result;
}

}  // namespace

EmbeddingResult train_embeddings(const PreparedCorpus& corpus, const ExperimentConfig& config,
                                 std::uint64_t seed, const fs::path& out_dir) {
  if (config.double_precision) return train_embeddings_as<double>(corpus, config, seed, out_dir);
  return train_embeddings_as<float>(corpus, config, seed, out_dir);
}

std::pair<LabeledDataset, LabeledDataset> build_datasets(const PreparedCorpus& corpus,
                                                         const ExperimentConfig& config,
                                                         EvalMode mode, const DocMatrix* vectors) {
  if (mode != EvalMode::bo && vectors == nullptr) {
    throw DataError("document vectors are required for mode " + to_string(mode));
  }
  if (vectors != nullptr && vectors->rows != corpus.documents.size()) {
    throw DataError("document vectors do not match the prepared corpus");
  }
  const auto train_rows = corpus.rows(Split::train);
  const auto test_rows = corpus.rows(Split::test);
  const auto weighting = config.tf_weighting ? TermWeighting::term_frequency : TermWeighting::binary;
  const std::size_t vocab_size = corpus.vocabulary.size();

  auto dense_row = [&](std::size_t r) {
    std::vector<double> v(vectors->row(r).begin(), vectors->row(r).end());
    if (config.normalize_dense) {
      double n = 0.0;
      for (double x : v) n += x * x;
      n = std::sqrt(n);
      if (n > 0.0) {
        for (double& x : v) x /= n;
      }
    }
    return v;
  };

  std::optional<NbWeights> nb;
  if (mode == EvalMode::dv_nbbo) {
    std::vector<SparseFeatureVector> bo;
    std::vector<int> labels;
    for (auto r : train_rows) {
      bo.push_back(bag_of_ngram_features(corpus.documents[r], vocab_size, weighting));
      labels.push_back(label_sign(corpus.labels[r]));
    }
    nb = fit_nb_weights(bo, labels, vocab_size, config.nb_alpha);
  }

  auto features_of = [&](std::size_t r) -> SparseFeatureVector {
    switch (mode) {
      case EvalMode::dv: return SparseFeatureVector::from_dense(dense_row(r));
      case EvalMode::bo: return bag_of_ngram_features(corpus.documents[r], vocab_size, weighting);
      case EvalMode::dv_nbbo: {
        auto bo = bag_of_ngram_features(corpus.documents[r], vocab_size, weighting);
        return concat_features(dense_row(r), nb_weighted_features(bo, *nb), config.dense_scale);
      }
    }
    return {};
  };
  std::size_t dim = vocab_size;
  if (mode == EvalMode::dv) dim = vectors->dim;
  if (mode == EvalMode::dv_nbbo) dim = vectors->dim + vocab_size;

  auto make = [&](const std::vector<std::size_t>& rows) {
    LabeledDataset d;
    d.feature_dim = dim;
    for (auto r : rows) {
      d.features.push_back(features_of(r));
      d.labels.push_back(label_sign(corpus.labels[r]));
    }
    return d;
  };
  return {make(train_rows), make(test_rows)};
}

namespace {

DocMatrix load_doc_matrix(const fs::path& file, const PreparedCorpus& corpus) {
  std::ifstream in(file);
  if (!in) throw DataError("document vector file '" + file.string() + "' not found");
  auto vf = read_vectors(in);
  DocMatrix m;
  m.rows = corpus.documents.size();
  m.dim = vf.dim;
  m.values.assign(m.rows * m.dim, 0.0);
  std::vector<bool> seen(m.rows, false);
  for (std::size_t r = 0; r < vf.rows(); ++r) {
    const auto& name = vf.names[r];
    if (name.rfind("doc_", 0) != 0) continue;
    const auto id = std::stoull(name.substr(4));
    if (id >= m.rows) continue;
    std::copy(vf.row(r).begin(), vf.row(r).end(), m.values.begin() + id * m.dim);
    seen[id] = true;
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw DataError("document vector file '" + file.string() + "' does not cover every document");
  }
  return m;
}

}  // namespace

MetricsReport run_evaluation(const PreparedCorpus& corpus, const ExperimentConfig& config,
                             EvalMode mode, const std::optional<fs::path>& vectors_file) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  MetricsReport report;
  report.mode = to_string(mode);
  report.config = config;

  std::optional<DocMatrix> fixed;
  if (mode != EvalMode::bo && vectors_file) fixed = load_doc_matrix(*vectors_file, corpus);

  for (int run = 0; run < config.runs; ++run) {
    const std::uint64_t seed = config.train.seed + static_cast<std::uint64_t>(run);
    std::optional<DocMatrix> trained;
    const DocMatrix* vectors = nullptr;
    if (mode != EvalMode::bo) {
      if (fixed) {
        vectors = &*fixed;
      } else {
        trained = train_embeddings(corpus, config, seed).doc_vectors;
        vectors = &*trained;
      }
    }
    auto [train_set, test_set] = build_datasets(corpus, config, mode, vectors);
    if (test_set.empty()) throw DataError("no labeled test documents");
    const double c = dev_split_select(train_set, config.c_grid, seed);
    const auto model = train_logreg(train_set, c);
    report.selected_c.push_back(c);
    report.accuracies.push_back(evaluate(model, test_set));
  }
  report.mean_accuracy = std::accumulate(report.accuracies.begin(), report.accuracies.end(), 0.0) /
                         static_cast<double>(report.accuracies.size());
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

nlohmann::json MetricsReport::to_json() const {
  return {{"mode", mode},
          {"accuracies", accuracies},
          {"selected_c", selected_c},
          {"mean_accuracy", mean_accuracy},
          {"wall_seconds", wall_seconds},
          {"config_hash", config.hash()},
          {"config", config.to_json()}};
}

std::string MetricsReport::to_text() const {
  std::ostringstream out;
  out << std::setprecision(10);
  out << "mode: " << mode << '\n';
  out << "preset: " << (config.preset.empty() ? "-" : config.preset) << '\n';
  out << "config_hash: " << config.hash() << '\n';
  out << "runs: " << accuracies.size() << '\n';
  for (std::size_t i = 0; i < accuracies.size(); ++i) {
    out << "run " << i + 1 << ": accuracy " << accuracies[i] << " C " << selected_c[i] << '\n';
  }
  out << "mean_accuracy: " << mean_accuracy << '\n';
  out << "wall_seconds: " << wall_seconds << '\n';
  out << "config: " << config.to_json().dump() << '\n';
  return out.str();
}

fs::path MetricsReport::write(const fs::path& dir) const {
  fs::create_directories(dir);
  std::string stem = "metrics_" + config.hash() + "_" + mode;
  std::replace(stem.begin(), stem.end(), '+', '_');
  {
    std::ofstream out(dir / (stem + ".txt"));
    out << to_text();
  }
  const auto json_path = dir / (stem + ".json");
  std::ofstream out(json_path);
  out << to_json().dump(2) << '\n';
  return json_path;
}

}  // namespace dvngram
