#include "dvngram/model.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "dvngram/errors.hpp"
#include "dvngram/random.hpp"

namespace dvngram {

void TrainConfig::validate() const {
  if (dim <= 0) throw std::invalid_argument("dim must be > 0");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
  if (mini_batch <= 0) throw std::invalid_argument("mini_batch must be > 0");
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (negative_k < 1) throw std::invalid_argument("negative_k must be >= 1");
  if (!(noise_exponent > 0.0)) throw std::invalid_argument("noise_exponent must be > 0");
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  if (!(init_range >= 0.0)) throw std::invalid_argument("init_range must be >= 0");
}

template <class Real>
EmbeddingModel<Real>::EmbeddingModel(std::size_t num_docs, std::size_t vocab_size,
                                     std::size_t dim, bool use_bias)
    : dim_(dim),
      num_docs_(num_docs),
      vocab_size_(vocab_size),
      docs_(num_docs * dim),
      tokens_(vocab_size * dim),
      biases_(use_bias ? vocab_size : 0) {}

template <class Real>
bool EmbeddingModel<Real>::all_finite() const {
  auto finite = [](std::span<const Real> xs) {
    for (Real x : xs) {
      if (!std::isfinite(x)) return false;
    }
    return true;
  };
  return finite(docs_) && finite(tokens_) && finite(biases_);
}

template <class Real>
EmbeddingModel<Real> init_model(std::size_t num_docs, std::size_t vocab_size,
                                const TrainConfig& config) {
  if (num_docs == 0) throw std::invalid_argument("init_model: corpus has no documents");
  if (vocab_size == 0) throw std::invalid_argument("init_model: vocabulary is empty");
  config.validate();
  EmbeddingModel<Real> model(num_docs, vocab_size, static_cast<std::size_t>(config.dim),
                             config.use_bias);
  Rng rng = make_rng(config.seed, 0x1417);
  const double range = config.init_range;
  for (auto& x : model.doc_data()) x = static_cast<Real>((2.0 * uniform01(rng) - 1.0) * range);
  for (auto& x : model.token_data()) x = static_cast<Real>((2.0 * uniform01(rng) - 1.0) * range);
  return model;
}

template <class Real>
double score(const EmbeddingModel<Real>& model, std::size_t doc, std::size_t token) {
  if (doc >= model.num_docs()) throw std::out_of_range("score: document id out of range");
  if (token >= model.vocab_size()) throw std::out_of_range("score: token id out of range");
  return dot(model.doc_vector(doc), model.token_vector(token)) + model.bias(token);
}

// ---------------------------------------------------------------------------

namespace {

template <class Real>
void append_number(std::string& line, Real value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw std::runtime_error("failed to format number");
  line.append(buf, end);
}

template <class Real>
Real parse_number(std::string_view text, std::size_t line_no) {
  Real value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw DataError("vector file line " + std::to_string(line_no) + ": bad number '" +
                    std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && line[pos] == ' ') ++pos;
    if (pos >= line.size()) break;
    auto end = line.find(' ', pos);
    if (end == std::string_view::npos) end = line.size();
    fields.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return fields;
}

template <class Real>
struct TypedVectorFile {
  std::vector<std::string> names;
  std::size_t dim = 0;
  std::vector<Real> values;
};

template <class Real>
TypedVectorFile<Real> read_typed_vectors(std::istream& in) {
  TypedVectorFile<Real> file;
  std::string line;
  if (!std::getline(in, line)) throw DataError("vector file: missing header");
  auto header = split_spaces(line);
  if (header.size() != 2) throw DataError("vector file: header must be `<count> <dim>`");
  const auto count = parse_number<std::size_t>(header[0], 1);
  file.dim = parse_number<std::size_t>(header[1], 1);
  file.names.reserve(count);
  file.values.reserve(count * file.dim);
  std::size_t line_no = 1;
  while (file.names.size() < count && std::getline(in, line)) {
    ++line_no;
    auto fields = split_spaces(line);
    if (fields.size() != file.dim + 1) {
      throw DataError("vector file line " + std::to_string(line_no) + ": expected " +
                      std::to_string(file.dim + 1) + " fields");
    }
    file.names.emplace_back(fields[0]);
    for (std::size_t i = 1; i < fields.size(); ++i) {
      file.values.push_back(parse_number<Real>(fields[i], line_no));
    }
  }
  if (file.names.size() != count) throw DataError("vector file: fewer rows than the header states");
  return file;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

template <class Real>
void write_vectors(std::ostream& out, std::span<const Real> data, std::size_t dim,
                   const std::vector<std::string>& names) {
  if (dim == 0 || data.size() != names.size() * dim) {
    throw std::invalid_argument("write_vectors: data size does not match names x dim");
  }
  out << names.size() << ' ' << dim << '\n';
  std::string line;
  for (std::size_t r = 0; r < names.size(); ++r) {
    line = names[r];
    for (std::size_t i = 0; i < dim; ++i) {
      line.push_back(' ');
      append_number(line, data[r * dim + i]);
    }
    line.push_back('\n');
    out << line;
  }
}

VectorFile read_vectors(std::istream& in) {
  auto typed = read_typed_vectors<double>(in);
  return {std::move(typed.names), typed.dim, std::move(typed.values)};
}

std::string doc_row_name(DocId doc) { return "doc_" + std::to_string(doc); }

template <class Real>
void save_model(const EmbeddingModel<Real>& model, const std::vector<std::string>& token_names,
                const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> doc_names;
  doc_names.reserve(model.num_docs());
  for (std::size_t d = 0; d < model.num_docs(); ++d) doc_names.push_back(doc_row_name(static_cast<DocId>(d)));
  {
    auto out = open_out(dir / "doc_vectors.txt");
    write_vectors(out, model.doc_data(), model.dim(), doc_names);
  }
  {
    auto out = open_out(dir / "token_vectors.txt");
    write_vectors(out, model.token_data(), model.dim(), token_names);
  }
  if (model.has_bias()) {
    auto out = open_out(dir / "biases.txt");
    write_vectors(out, model.biases(), 1, token_names);
  }
}

template <class Real>
EmbeddingModel<Real> load_model(const std::filesystem::path& dir) {
  auto docs_in = open_in(dir / "doc_vectors.txt");
  auto docs = read_typed_vectors<Real>(docs_in);
  auto tokens_in = open_in(dir / "token_vectors.txt");
  auto tokens = read_typed_vectors<Real>(tokens_in);
  if (docs.dim != tokens.dim) throw DataError("load_model: document and token dims differ");
  const bool has_bias = std::filesystem::exists(dir / "biases.txt");
  EmbeddingModel<Real> model(docs.names.size(), tokens.names.size(), docs.dim, has_bias);
  std::copy(docs.values.begin(), docs.values.end(), model.doc_data().begin());
  std::copy(tokens.values.begin(), tokens.values.end(), model.token_data().begin());
  if (has_bias) {
    auto bias_in = open_in(dir / "biases.txt");
    auto biases = read_typed_vectors<Real>(bias_in);
    if (biases.dim != 1 || biases.values.size() != model.vocab_size()) {
      throw DataError("load_model: biases.txt does not match the token vectors");
    }
    std::copy(biases.values.begin(), biases.values.end(), model.biases().begin());
  }
  return model;
}

#define DVNGRAM_INSTANTIATE_MODEL(Real)                                                          \
  template class EmbeddingModel<Real>;                                                           \
  template EmbeddingModel<Real> init_model<Real>(std::size_t, std::size_t, const TrainConfig&); \
  template double score<Real>(const EmbeddingModel<Real>&, std::size_t, std::size_t);          \
  template void write_vectors<Real>(std::ostream&, std::span<const Real>, std::size_t,          \
                                    const std::vector<std::string>&);                           \
  template void save_model<Real>(const EmbeddingModel<Real>&, const std::vector<std::string>&,  \
                                 const std::filesystem::path&);                                 \
  template EmbeddingModel<Real> load_model<Real>(const std::filesystem::path&);

DVNGRAM_INSTANTIATE_MODEL(float)
DVNGRAM_INSTANTIATE_MODEL(double)

#undef DVNGRAM_INSTANTIATE_MODEL

}  // namespace dvngram
