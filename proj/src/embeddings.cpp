#include "evpirank/embeddings.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "evpirank/error.hpp"
#include "evpirank/simd/kernels.hpp"
#include "evpirank/text.hpp"

namespace evpirank {
namespace {

bool parse_double(std::string_view s, double& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

}  // namespace

EmbeddingTable EmbeddingTable::load(std::istream& in) {
  EmbeddingTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = whitespace_tokens(line);
    if (fields.empty()) continue;
    const std::size_t width = fields.size() - 1;
    if (table.words_.empty() && table.dim_ == 0) {
      if (width == 0) throw FormatError("embeddings line " + std::to_string(line_no) + ": no vector values");
      table.dim_ = width;
    }
    if (width != table.dim_) {
      throw FormatError("embeddings line " + std::to_string(line_no) + ": expected " +
                        std::to_string(table.dim_) + " values, found " + std::to_string(width));
    }
    Vector values(width);
    for (std::size_t i = 0; i < width; ++i) {
      if (!parse_double(fields[i + 1], values[i])) {
        throw FormatError("embeddings line " + std::to_string(line_no) + ": non-numeric entry '" +
                          fields[i + 1] + "'");
      }
    }
    if (table.index_.count(fields[0]) != 0) continue;
    table.index_.emplace(fields[0], table.words_.size());
    table.words_.push_back(fields[0]);
    table.data_.insert(table.data_.end(), values.begin(), values.end());
  }
  if (table.words_.empty()) throw FormatError("embeddings: no entries");
  return table;
}

EmbeddingTable EmbeddingTable::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open embeddings file: " + path);
  return load(in);
}

EmbeddingTable EmbeddingTable::from_rows(std::size_t dim, const std::vector<std::pair<std::string, Vector>>& rows) {
  if (dim == 0) throw ShapeError("embedding dimension must be positive");
  EmbeddingTable table;
  table.dim_ = dim;
  for (const auto& [word, values] : rows) {
    if (values.size() != dim) throw ShapeError("embedding row for '" + word + "' has wrong width");
    if (table.index_.count(word) != 0) continue;
    table.index_.emplace(word, table.words_.size());
    table.words_.push_back(word);
    table.data_.insert(table.data_.end(), values.begin(), values.end());
  }
  return table;
}

std::span<const double> EmbeddingTable::find(std::string_view word) const {
  const auto it = index_.find(std::string(word));
  if (it == index_.end()) return {};
  return {data_.data() + it->second * dim_, dim_};
}

AvgVector avg_vector(const EmbeddingTable& table, std::span<const std::string> tokens) {
  AvgVector out;
  out.values.assign(table.dim(), 0.0);
  if (tokens.empty()) return out;
  std::vector<const std::string*> found;
  found.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (!table.find(t).empty()) found.push_back(&t);
  }
  if (found.empty()) return out;
  std::sort(found.begin(), found.end(), [](const std::string* a, const std::string* b) { return *a < *b; });
  for (const std::string* t : found) {
    const auto row = table.find(*t);
    for (std::size_t i = 0; i < row.size(); ++i) out.values[i] += row[i];
  }
  const double n = static_cast<double>(found.size());
  for (double& v : out.values) v /= n;
  out.coverage = n / static_cast<double>(tokens.size());
  return out;
}

double cos_sim(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw ShapeError("cos_sim: length mismatch (" + std::to_string(u.size()) + " vs " + std::to_string(v.size()) + ")");
  }
  const double uu = simd::dot(u, u);
  const double vv = simd::dot(v, v);
  if (uu == 0.0 || vv == 0.0) return 0.0;
  const double c = simd::dot(u, v) / (std::sqrt(uu) * std::sqrt(vv));
  return std::clamp(c, -1.0, 1.0);
}

}  // namespace evpirank
