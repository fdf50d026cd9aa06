#pragma once

#include <cstddef>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "evpirank/tensor.hpp"

namespace evpirank {

// Pretrained word vectors loaded from the whitespace-separated text format
// (`word v1 ... vd`, one per line, no header). Immutable after load.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;

  // Throws FormatError naming the 1-based line on inconsistent width or a
  // non-numeric entry. The first occurrence of a duplicate word wins.
  static EmbeddingTable load(std::istream& in);
  static EmbeddingTable load_file(const std::string& path);

  // Programmatic construction (tests, synthetic corpora).
  static EmbeddingTable from_rows(std::size_t dim, const std::vector<std::pair<std::string, Vector>>& rows);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }

  // Row for the word, or an empty span when out of vocabulary.
  std::span<const double> find(std::string_view word) const;

  const std::vector<std::string>& words() const { return words_; }

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> words_;
  std::vector<double> data_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct AvgVector {
  Vector values;
  double coverage = 0.0;  // fraction of tokens found in the table
};

// Mean of in-vocabulary token vectors; OOV tokens are skipped. Vectors are
// summed in token-string order so the result does not depend on token order.
// No in-vocabulary tokens gives the zero vector with coverage 0.
AvgVector avg_vector(const EmbeddingTable& table, std::span<const std::string> tokens);

// Cosine similarity clamped to [-1, 1]; 0 when either vector has zero norm.
// Throws ShapeError on length mismatch.
double cos_sim(std::span<const double> u, std::span<const double> v);

}  // namespace evpirank
