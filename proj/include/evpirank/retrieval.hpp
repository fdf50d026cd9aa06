#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "evpirank/corpus.hpp"

namespace evpirank {

struct Document {
  std::string doc_id;
  std::string text;
};

struct Posting {
  std::uint32_t doc = 0;  // position of the doc id in sorted order
  std::uint32_t term_frequency = 0;
  bool operator==(const Posting&) const = default;
};

struct ScoredDoc {
  std::string doc_id;
  double score = 0.0;
  bool padded = false;  // zero-score filler, not an actual match
};

// Inverted TF-IDF index over tokenized documents. Immutable once built, so
// concurrent queries are safe.
//
// score(q, d) = sum over distinct query terms t in d of
//               sqrt(tf(t, d)) * idf(t)^2 / sqrt(|d|),   idf(t) = 1 + ln(N / (df(t) + 1))
class Index {
 public:
  Index() = default;

  // Throws UsageError on a duplicate doc id. An empty document list gives an
  // index with N = 0 whose queries return nothing.
  static Index build(std::span<const Document> docs);

  std::size_t doc_count() const { return doc_ids_.size(); }
  std::size_t vocabulary_size() const { return terms_.size(); }
  const std::vector<std::string>& doc_ids() const { return doc_ids_; }
  const std::vector<std::string>& terms() const { return terms_; }
  const std::vector<std::uint32_t>& doc_lengths() const { return doc_lengths_; }
  const std::vector<std::vector<Posting>>& postings() const { return postings_; }

  std::optional<std::uint32_t> term_id(std::string_view term) const;
  std::optional<std::uint32_t> doc_position(std::string_view doc_id) const;

  double idf(std::uint32_t term) const;

  // Throws UsageError for an unknown doc id.
  double score(std::span<const std::string> query_tokens, std::string_view doc_id) const;

  // Best k docs by descending score, ties by ascending doc id. When fewer than
  // k docs score above zero the rest are filled from the remaining docs in
  // doc id order and flagged as padded.
  std::vector<ScoredDoc> top_k(std::span<const std::string> query_tokens, std::size_t k = 10) const;

  // "EVPIRANK-IDX v1" text serialization; load(save(x)) == x.
  void save(std::ostream& out) const;
  static Index load(std::istream& in);

  bool operator==(const Index&) const = default;

 private:
  std::vector<std::uint32_t> query_terms(std::span<const std::string> query_tokens) const;
  void rebuild_lookup();

  std::vector<std::string> doc_ids_;  // sorted
  std::vector<std::uint32_t> doc_lengths_;
  std::vector<std::string> terms_;  // sorted, term id = position
  std::vector<std::vector<Posting>> postings_;
  std::unordered_map<std::string, std::uint32_t> term_lookup_;
  std::unordered_map<std::string, std::uint32_t> doc_lookup_;
};

// Candidate questions and answers for one post, harvested from its nearest
// neighbours. Slot 0 always holds the post's own question/answer.
struct CandidateSet {
  std::string post_id;
  std::string post_body;
  std::vector<std::string> questions;
  std::vector<std::string> answers;
  std::vector<std::string> source_post_ids;
  std::size_t original_index = 0;
  std::size_t padded = 0;  // neighbours that shared no term with the post

  std::size_t size() const { return questions.size(); }
};

inline constexpr std::size_t kDefaultCandidates = 10;

// Index over post_text() of every triple, keyed by post id.
Index build_post_index(std::span<const Triple> triples);

// Queries the index with the post's own text. The post itself is placed first
// and followed by the best-scoring other posts. Throws UsageError when the
// post has no triple.
CandidateSet generate_candidates(const Index& index, const std::map<std::string, Triple>& triples_by_post,
                                 std::string_view post_id, std::size_t k = kDefaultCandidates);

std::string candidate_set_to_json(const CandidateSet& set);
CandidateSet candidate_set_from_json(std::string_view line);

void write_candidate_sets(std::ostream& out, std::span<const CandidateSet> sets);
std::vector<CandidateSet> read_candidate_sets(std::istream& in);

}  // namespace evpirank
