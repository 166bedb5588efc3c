#include "dvngram/sparse.hpp"

#include <algorithm>
#include <charconv>
#include <ostream>
#include <string>

#include "dvngram/errors.hpp"

namespace dvngram {

bool SparseFeatureVector::is_canonical() const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].second == 0.0) return false;
    if (i > 0 && entries[i - 1].first >= entries[i].first) return false;
  }
  return true;
}

SparseFeatureVector SparseFeatureVector::from_unsorted(
    std::vector<std::pair<FeatureId, double>> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  SparseFeatureVector out;
  out.entries.reserve(entries.size());
  for (const auto& e : entries) {
    if (!out.entries.empty() && out.entries.back().first == e.first) {
      out.entries.back().second += e.second;
    } else {
      out.entries.push_back(e);
    }
  }
  std::erase_if(out.entries, [](const auto& e) { return e.second == 0.0; });
  return out;
}

SparseFeatureVector SparseFeatureVector::from_dense(std::span<const double> dense) {
  SparseFeatureVector out;
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (dense[i] != 0.0) out.entries.emplace_back(static_cast<FeatureId>(i), dense[i]);
  }
  return out;
}

void write_sparse_line(std::ostream& out, int label, const SparseFeatureVector& x) {
  std::string line = label > 0 ? "+1" : "-1";
  char buf[64];
  for (const auto& [id, w] : x.entries) {
    line += ' ';
    line += std::to_string(static_cast<std::uint64_t>(id) + 1);
    line += ':';
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), w);
    line.append(buf, end);
  }
  line += '\n';
  out << line;
}

std::pair<int, SparseFeatureVector> parse_sparse_line(std::string_view line) {
  auto fail = [&](const char* why) {
    return DataError(std::string("sparse line: ") + why + " in '" + std::string(line) + "'");
  };
  std::size_t pos = 0;
  auto next_field = [&]() -> std::string_view {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    const std::size_t start = pos;
    while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t') ++pos;
    return line.substr(start, pos - start);
  };
  auto label_text = next_field();
  if (label_text.empty()) throw fail("missing label");
  if (label_text.front() == '+') label_text.remove_prefix(1);
  int label = 0;
  auto [lp, lec] = std::from_chars(label_text.data(), label_text.data() + label_text.size(), label);
  if (lec != std::errc{} || lp != label_text.data() + label_text.size()) throw fail("bad label");

  std::vector<std::pair<FeatureId, double>> entries;
  for (auto field = next_field(); !field.empty(); field = next_field()) {
    const auto colon = field.find(':');
    if (colon == std::string_view::npos) throw fail("missing ':'");
    std::uint64_t id = 0;
    double w = 0.0;
    auto [ip, iec] = std::from_chars(field.data(), field.data() + colon, id);
    auto [wp, wec] = std::from_chars(field.data() + colon + 1, field.data() + field.size(), w);
    if (iec != std::errc{} || ip != field.data() + colon || id == 0) throw fail("bad feature id");
    if (wec != std::errc{} || wp != field.data() + field.size()) throw fail("bad weight");
    entries.emplace_back(static_cast<FeatureId>(id - 1), w);
  }
  return {label > 0 ? 1 : -1, SparseFeatureVector::from_unsorted(std::move(entries))};
}

}  // namespace dvngram
