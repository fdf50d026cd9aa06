#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evpirank/embeddings.hpp"
#include "evpirank/lstm.hpp"
#include "evpirank/retrieval.hpp"

namespace evpirank {

// A text tokenized and looked up once. `rows` views into the embedding table
// (in-vocabulary tokens only, in text order), so the table must outlive it.
struct PreparedText {
  std::vector<std::string> tokens;
  TokenSequence rows;
  AvgVector avg;
};

PreparedText prepare_text(const EmbeddingTable& table, std::string_view text);

struct PreparedCandidateSet {
  std::string post_id;
  PreparedText post;
  std::vector<PreparedText> questions;
  std::vector<PreparedText> answers;
  std::size_t original_index = 0;

  std::size_t size() const { return questions.size(); }
};

// Throws UsageError for an empty set or an out-of-range original index.
PreparedCandidateSet prepare_candidate_set(const EmbeddingTable& table, const CandidateSet& set);

std::vector<PreparedCandidateSet> prepare_candidate_sets(const EmbeddingTable& table,
                                                         std::span<const CandidateSet> sets);

}  // namespace evpirank
