#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evpirank/embeddings.hpp"

namespace evpirank {

using Timestamp = std::int64_t;  // UTC seconds

struct PostRecord {
  std::string post_id;
  std::string author_id;
  std::string title;
  std::string body;
  Timestamp created_at = 0;
};

struct CommentRecord {
  std::string comment_id;
  std::string post_id;
  std::string author_id;
  std::string text;
  Timestamp created_at = 0;
};

struct EditRecord {
  std::string edit_id;
  std::string post_id;
  std::string author_id;
  std::string new_body;
  Timestamp created_at = 0;
};

enum class AnswerSource { edit, comment };

std::string_view to_string(AnswerSource source);

struct Triple {
  PostRecord post;
  std::string question;
  Timestamp question_time = 0;
  std::string answer;
  AnswerSource answer_source = AnswerSource::edit;
};

// Text the retrieval index and the encoders see for a post: title and body.
std::string post_text(const PostRecord& post);

struct DatasetSplit {
  std::vector<Triple> train;
  std::vector<Triple> tune;
  std::vector<Triple> test;
};

struct ExtractedQuestion {
  std::string text;
  Timestamp time = 0;
};

// Earliest comment (after the post was created) that contains '?', cut just
// after its first '?'. Comments may be given in any order.
std::optional<ExtractedQuestion> extract_question(const PostRecord& post, std::span<const CommentRecord> comments);

const std::vector<std::string>& default_rhetorical_prefixes();

bool is_rhetorical(std::string_view question,
                   std::span<const std::string> prefixes = default_rhetorical_prefixes());

// Whitespace tokens of `new_body` absent from `previous_body`, in order.
std::vector<std::string> added_tokens(std::string_view previous_body, std::string_view new_body);

inline constexpr std::size_t kMinEditTokens = 5;

// Added text of the earliest edit after `question_time` that adds at least
// kMinEditTokens tokens. Each edit is diffed against the version before it.
std::optional<std::string> extract_answer_edit(const PostRecord& post, std::span<const EditRecord> edits,
                                               Timestamp question_time);

// First comment by the post's author after `question_time`.
std::optional<std::string> extract_answer_comment(const PostRecord& post, std::span<const CommentRecord> comments,
                                                  Timestamp question_time);

struct SelectedAnswer {
  std::string text;
  AnswerSource source;
};

// Picks the answer whose average word vector is closer (cosine) to the
// question's; ties go to the edit. Throws UsageError when both are absent.
SelectedAnswer select_answer(const std::optional<std::string>& edit_answer,
                             const std::optional<std::string>& comment_answer, std::string_view question,
                             const EmbeddingTable& table);

struct IngestDiagnostics {
  std::size_t posts_read = 0;
  std::size_t comments_read = 0;
  std::size_t edits_read = 0;
  std::size_t malformed_posts = 0;
  std::size_t malformed_comments = 0;
  std::size_t malformed_edits = 0;
  std::size_t orphan_records = 0;      // comment/edit for an unknown post
  std::size_t invalid_timestamps = 0;  // comment/edit not after its post
  std::size_t no_question = 0;
  std::size_t rhetorical = 0;
  std::size_t no_answer = 0;
  std::size_t emitted = 0;

  std::string to_json() const;
};

struct Dump {
  std::vector<PostRecord> posts;
  std::vector<CommentRecord> comments;
  std::vector<EditRecord> edits;
};

// Parses the three JSONL inputs. Malformed lines (bad JSON, missing or
// mistyped fields, non-positive timestamps, duplicate post ids) are skipped
// and counted in `diagnostics`.
Dump read_dump(std::istream& posts, std::istream& comments, std::istream& history, IngestDiagnostics& diagnostics);

struct IngestOptions {
  std::vector<std::string> rhetorical_prefixes = default_rhetorical_prefixes();
};

// One triple per qualifying post, ordered by post_id.
std::vector<Triple> build_triples(const Dump& dump, const EmbeddingTable& table, const IngestOptions& options,
                                  IngestDiagnostics& diagnostics);

// Bucket in [0, 10) from FNV-1a over the post id bytes.
int split_bucket(std::string_view post_id);

struct SplitBuckets {
  int train = 8;
  int tune = 1;
  int test = 1;
};

// Deterministic partition by post id: buckets [0, train) go to train, the
// next `tune` buckets to tune, the rest to test. Buckets must sum to 10.
DatasetSplit split_dataset(std::span<const Triple> triples, SplitBuckets buckets = {});

std::string triple_to_json(const Triple& triple);

// Parses one triples.jsonl line. Throws FormatError.
Triple triple_from_json(std::string_view line);

void write_triples(std::ostream& out, std::span<const Triple> triples);

// Reads a triples.jsonl stream; errors name the offending line.
std::vector<Triple> read_triples(std::istream& in);

}  // namespace evpirank
