#include "evpirank/corpus.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_set>

#include <json.hpp>

#include "evpirank/error.hpp"
#include "evpirank/rng.hpp"
#include "evpirank/text.hpp"

namespace evpirank {
namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

bool get_string(const json& obj, const char* key, std::string& out) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) return false;
  out = it->get<std::string>();
  return true;
}

bool get_timestamp(const json& obj, const char* key, Timestamp& out) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_number_integer()) return false;
  out = it->get<Timestamp>();
  return out > 0;
}

template <typename Record, typename Parse>
std::vector<Record> read_records(std::istream& in, Parse parse, std::size_t& read, std::size_t& malformed) {
  std::vector<Record> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    Record rec;
    const json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (obj.is_object() && parse(obj, rec)) {
      out.push_back(std::move(rec));
      ++read;
    } else {
      ++malformed;
    }
  }
  return out;
}

template <typename Record>
std::vector<const Record*> sorted_by_time(std::span<const Record> records, const std::string& post_id,
                                          Timestamp after, const std::string Record::*id_field) {
  std::vector<const Record*> out;
  for (const auto& r : records) {
    if (r.post_id == post_id && r.created_at > after) out.push_back(&r);
  }
  std::sort(out.begin(), out.end(), [id_field](const Record* a, const Record* b) {
    if (a->created_at != b->created_at) return a->created_at < b->created_at;
    return a->*id_field < b->*id_field;
  });
  return out;
}

}  // namespace

std::string_view to_string(AnswerSource source) {
  return source == AnswerSource::edit ? "edit" : "comment";
}

std::string post_text(const PostRecord& post) {
  if (post.title.empty()) return post.body;
  return post.title + " " + post.body;
}

std::optional<ExtractedQuestion> extract_question(const PostRecord& post, std::span<const CommentRecord> comments) {
  for (const CommentRecord* c : sorted_by_time(comments, post.post_id, post.created_at, &CommentRecord::comment_id)) {
    const auto mark = c->text.find('?');
    if (mark == std::string::npos) continue;
    const std::string_view cut = trim(std::string_view(c->text).substr(0, mark + 1));
    return ExtractedQuestion{std::string(cut), c->created_at};
  }
  return std::nullopt;
}

const std::vector<std::string>& default_rhetorical_prefixes() {
  static const std::vector<std::string> prefixes = {
      "have you considered", "have you tried", "why don't you", "why not",
      "can't you just",      "have you looked at", "do you mind",
  };
  return prefixes;
}

bool is_rhetorical(std::string_view question, std::span<const std::string> prefixes) {
  const std::string lowered = to_lower_ascii(trim(question));
  return std::any_of(prefixes.begin(), prefixes.end(), [&](const std::string& p) {
    return lowered.starts_with(to_lower_ascii(p));
  });
}

std::vector<std::string> added_tokens(std::string_view previous_body, std::string_view new_body) {
  const auto before = whitespace_tokens(previous_body);
  const std::unordered_set<std::string> seen(before.begin(), before.end());
  std::vector<std::string> added;
  for (auto& t : whitespace_tokens(new_body)) {
    if (seen.count(t) == 0) added.push_back(std::move(t));
  }
  return added;
}

std::optional<std::string> extract_answer_edit(const PostRecord& post, std::span<const EditRecord> edits,
                                               Timestamp question_time) {
  std::string previous = post.body;
  for (const EditRecord* e : sorted_by_time(edits, post.post_id, post.created_at, &EditRecord::edit_id)) {
    const auto added = added_tokens(previous, e->new_body);
    if (e->created_at > question_time && added.size() >= kMinEditTokens) return join(added);
    previous = e->new_body;
  }
  return std::nullopt;
}

std::optional<std::string> extract_answer_comment(const PostRecord& post, std::span<const CommentRecord> comments,
                                                  Timestamp question_time) {
  for (const CommentRecord* c : sorted_by_time(comments, post.post_id, question_time, &CommentRecord::comment_id)) {
    if (c->author_id == post.author_id) return c->text;
  }
  return std::nullopt;
}

SelectedAnswer select_answer(const std::optional<std::string>& edit_answer,
                             const std::optional<std::string>& comment_answer, std::string_view question,
                             const EmbeddingTable& table) {
  if (!edit_answer && !comment_answer) throw UsageError("select_answer: no candidate answer");
  if (!comment_answer) return {*edit_answer, AnswerSource::edit};
  if (!edit_answer) return {*comment_answer, AnswerSource::comment};
  const auto q = avg_vector(table, tokenize(question));
  const double edit_sim = cos_sim(q.values, avg_vector(table, tokenize(*edit_answer)).values);
  const double comment_sim = cos_sim(q.values, avg_vector(table, tokenize(*comment_answer)).values);
  if (comment_sim > edit_sim) return {*comment_answer, AnswerSource::comment};
  return {*edit_answer, AnswerSource::edit};
}

std::string IngestDiagnostics::to_json() const {
  ordered_json j;
  j["posts_read"] = posts_read;
  j["comments_read"] = comments_read;
  j["edits_read"] = edits_read;
  j["malformed_posts"] = malformed_posts;
  j["malformed_comments"] = malformed_comments;
  j["malformed_edits"] = malformed_edits;
  j["orphan_records"] = orphan_records;
  j["invalid_timestamps"] = invalid_timestamps;
  j["no_question"] = no_question;
  j["rhetorical"] = rhetorical;
  j["no_answer"] = no_answer;
  j["emitted"] = emitted;
  return j.dump();
}

Dump read_dump(std::istream& posts, std::istream& comments, std::istream& history, IngestDiagnostics& diagnostics) {
  Dump dump;
  std::unordered_set<std::string> post_ids;
  dump.posts = read_records<PostRecord>(
      posts,
      [&](const json& o, PostRecord& r) {
        if (!(get_string(o, "post_id", r.post_id) && get_string(o, "author_id", r.author_id) &&
              get_string(o, "title", r.title) && get_string(o, "body", r.body) &&
              get_timestamp(o, "created_at", r.created_at))) {
          return false;
        }
        return !r.post_id.empty() && post_ids.insert(r.post_id).second;
      },
      diagnostics.posts_read, diagnostics.malformed_posts);
  dump.comments = read_records<CommentRecord>(
      comments,
      [](const json& o, CommentRecord& r) {
        return get_string(o, "comment_id", r.comment_id) && get_string(o, "post_id", r.post_id) &&
               get_string(o, "author_id", r.author_id) && get_string(o, "text", r.text) &&
               get_timestamp(o, "created_at", r.created_at);
      },
      diagnostics.comments_read, diagnostics.malformed_comments);
  dump.edits = read_records<EditRecord>(
      history,
      [](const json& o, EditRecord& r) {
        return get_string(o, "edit_id", r.edit_id) && get_string(o, "post_id", r.post_id) &&
               get_string(o, "author_id", r.author_id) && get_string(o, "new_body", r.new_body) &&
               get_timestamp(o, "created_at", r.created_at);
      },
      diagnostics.edits_read, diagnostics.malformed_edits);
  return dump;
}

std::vector<Triple> build_triples(const Dump& dump, const EmbeddingTable& table, const IngestOptions& options,
                                  IngestDiagnostics& diagnostics) {
  std::map<std::string, const PostRecord*> posts;
  for (const auto& p : dump.posts) posts.emplace(p.post_id, &p);

  std::map<std::string, std::vector<CommentRecord>> comments_by_post;
  for (const auto& c : dump.comments) {
    const auto it = posts.find(c.post_id);
    if (it == posts.end()) {
      ++diagnostics.orphan_records;
    } else if (c.created_at < it->second->created_at) {
      ++diagnostics.invalid_timestamps;
    } else {
      comments_by_post[c.post_id].push_back(c);
    }
  }
  std::map<std::string, std::vector<EditRecord>> edits_by_post;
  for (const auto& e : dump.edits) {
    const auto it = posts.find(e.post_id);
    if (it == posts.end()) {
      ++diagnostics.orphan_records;
    } else if (e.created_at <= it->second->created_at) {
      ++diagnostics.invalid_timestamps;
    } else {
      edits_by_post[e.post_id].push_back(e);
    }
  }

  static const std::vector<CommentRecord> kNoComments;
  static const std::vector<EditRecord> kNoEdits;
  std::vector<Triple> triples;
  for (const auto& [post_id, post] : posts) {
    const auto cit = comments_by_post.find(post_id);
    const auto& comments = cit == comments_by_post.end() ? kNoComments : cit->second;
    const auto eit = edits_by_post.find(post_id);
    const auto& edits = eit == edits_by_post.end() ? kNoEdits : eit->second;

    const auto question = extract_question(*post, comments);
    if (!question) {
      ++diagnostics.no_question;
      continue;
    }
    if (is_rhetorical(question->text, options.rhetorical_prefixes)) {
      ++diagnostics.rhetorical;
      continue;
    }
    const auto edit_answer = extract_answer_edit(*post, edits, question->time);
    const auto comment_answer = extract_answer_comment(*post, comments, question->time);
    if (!edit_answer && !comment_answer) {
      ++diagnostics.no_answer;
      continue;
    }
    auto selected = select_answer(edit_answer, comment_answer, question->text, table);
    triples.push_back(Triple{*post, question->text, question->time, std::move(selected.text), selected.source});
    ++diagnostics.emitted;
  }
  return triples;
}

int split_bucket(std::string_view post_id) { return static_cast<int>(fnv1a64(post_id) % 10); }

DatasetSplit split_dataset(std::span<const Triple> triples, SplitBuckets buckets) {
  if (buckets.train < 0 || buckets.tune < 0 || buckets.test < 0 || buckets.train + buckets.tune + buckets.test != 10) {
    throw UsageError("split buckets must be non-negative and sum to 10");
  }
  DatasetSplit split;
  for (const auto& t : triples) {
    const int b = split_bucket(t.post.post_id);
    if (b < buckets.train) {
      split.train.push_back(t);
    } else if (b < buckets.train + buckets.tune) {
      split.tune.push_back(t);
    } else {
      split.test.push_back(t);
    }
  }
  return split;
}

std::string triple_to_json(const Triple& t) {
  ordered_json j;
  j["post_id"] = t.post.post_id;
  j["post_title"] = t.post.title;
  j["post_body"] = t.post.body;
  j["question"] = t.question;
  j["question_time"] = t.question_time;
  j["answer"] = t.answer;
  j["answer_source"] = std::string(to_string(t.answer_source));
  return j.dump();
}

Triple triple_from_json(std::string_view line) {
  const json obj = json::parse(line, nullptr, false);
  if (!obj.is_object()) throw FormatError("triple: not a JSON object");
  Triple t;
  std::string source;
  if (!(get_string(obj, "post_id", t.post.post_id) && get_string(obj, "post_title", t.post.title) &&
        get_string(obj, "post_body", t.post.body) && get_string(obj, "question", t.question) &&
        get_timestamp(obj, "question_time", t.question_time) && get_string(obj, "answer", t.answer) &&
        get_string(obj, "answer_source", source))) {
    throw FormatError("triple: missing or mistyped field");
  }
  if (source == "edit") {
    t.answer_source = AnswerSource::edit;
  } else if (source == "comment") {
    t.answer_source = AnswerSource::comment;
  } else {
    throw FormatError("triple: answer_source must be 'edit' or 'comment'");
  }
  return t;
}

void write_triples(std::ostream& out, std::span<const Triple> triples) {
  for (const auto& t : triples) out << triple_to_json(t) << '\n';
}

std::vector<Triple> read_triples(std::istream& in) {
  std::vector<Triple> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      out.push_back(triple_from_json(line));
    } catch (const FormatError& e) {
      throw FormatError("triples line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace evpirank
