#include "evpirank/prepared.hpp"

#include "evpirank/error.hpp"
#include "evpirank/text.hpp"

namespace evpirank {

PreparedText prepare_text(const EmbeddingTable& table, std::string_view text) {
  PreparedText out;
  out.tokens = tokenize(text);
  for (const auto& t : out.tokens) {
    auto row = table.find(t);
    if (!row.empty()) out.rows.push_back(row);
  }
  out.avg = avg_vector(table, out.tokens);
  return out;
}

PreparedCandidateSet prepare_candidate_set(const EmbeddingTable& table, const CandidateSet& set) {
  if (set.questions.empty() || set.questions.size() != set.answers.size()) {
    throw UsageError("candidate set " + set.post_id + ": needs equally many (>0) questions and answers");
  }
  if (set.original_index >= set.questions.size()) {
    throw UsageError("candidate set " + set.post_id + ": original_index out of range");
  }
  PreparedCandidateSet out;
  out.post_id = set.post_id;
  out.post = prepare_text(table, set.post_body);
  out.original_index = set.original_index;
  for (std::size_t j = 0; j < set.questions.size(); ++j) {
    out.questions.push_back(prepare_text(table, set.questions[j]));
    out.answers.push_back(prepare_text(table, set.answers[j]));
  }
  return out;
}

std::vector<PreparedCandidateSet> prepare_candidate_sets(const EmbeddingTable& table,
                                                         std::span<const CandidateSet> sets) {
  std::vector<PreparedCandidateSet> out;
  out.reserve(sets.size());
  for (const auto& s : sets) out.push_back(prepare_candidate_set(table, s));
  return out;
}

}  // namespace evpirank
