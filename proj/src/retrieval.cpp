#include "evpirank/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

#include "evpirank/error.hpp"
#include "evpirank/text.hpp"

namespace evpirank {
namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr std::string_view kIndexHeader = "EVPIRANK-IDX v1";

double contribution(std::uint32_t tf, double idf, std::uint32_t doc_length) {
  return std::sqrt(static_cast<double>(tf)) * idf * idf / std::sqrt(static_cast<double>(doc_length));
}

std::string read_line(std::istream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError(std::string("index: unexpected end of input reading ") + what);
  return line;
}

}  // namespace

Index Index::build(std::span<const Document> docs) {
  std::vector<const Document*> sorted;
  sorted.reserve(docs.size());
  for (const auto& d : docs) sorted.push_back(&d);
  std::sort(sorted.begin(), sorted.end(), [](const Document* a, const Document* b) { return a->doc_id < b->doc_id; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i]->doc_id == sorted[i - 1]->doc_id) throw UsageError("duplicate doc_id: " + sorted[i]->doc_id);
  }

  Index index;
  std::vector<std::map<std::string, std::uint32_t>> doc_terms(sorted.size());
  std::set<std::string> vocabulary;
  for (std::size_t d = 0; d < sorted.size(); ++d) {
    index.doc_ids_.push_back(sorted[d]->doc_id);
    const auto tokens = tokenize(sorted[d]->text);
    index.doc_lengths_.push_back(static_cast<std::uint32_t>(tokens.size()));
    for (const auto& t : tokens) {
      ++doc_terms[d][t];
      vocabulary.insert(t);
    }
  }
  index.terms_.assign(vocabulary.begin(), vocabulary.end());
  index.rebuild_lookup();
  index.postings_.resize(index.terms_.size());
  for (std::size_t d = 0; d < sorted.size(); ++d) {
    for (const auto& [term, tf] : doc_terms[d]) {
      index.postings_[index.term_lookup_.at(term)].push_back(Posting{static_cast<std::uint32_t>(d), tf});
    }
  }
  return index;
}

void Index::rebuild_lookup() {
  term_lookup_.clear();
  doc_lookup_.clear();
  for (std::size_t i = 0; i < terms_.size(); ++i) term_lookup_.emplace(terms_[i], static_cast<std::uint32_t>(i));
  for (std::size_t i = 0; i < doc_ids_.size(); ++i) doc_lookup_.emplace(doc_ids_[i], static_cast<std::uint32_t>(i));
}

std::optional<std::uint32_t> Index::term_id(std::string_view term) const {
  const auto it = term_lookup_.find(std::string(term));
  if (it == term_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::uint32_t> Index::doc_position(std::string_view doc_id) const {
  const auto it = doc_lookup_.find(std::string(doc_id));
  if (it == doc_lookup_.end()) return std::nullopt;
  return it->second;
}

double Index::idf(std::uint32_t term) const {
  const double n = static_cast<double>(doc_count());
  const double df = static_cast<double>(postings_.at(term).size());
  return 1.0 + std::log(n / (df + 1.0));
}

std::vector<std::uint32_t> Index::query_terms(std::span<const std::string> query_tokens) const {
  std::vector<std::uint32_t> ids;
  for (const auto& t : query_tokens) {
    if (auto id = term_id(t)) ids.push_back(*id);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

double Index::score(std::span<const std::string> query_tokens, std::string_view doc_id) const {
  const auto pos = doc_position(doc_id);
  if (!pos) throw UsageError("unknown doc_id: " + std::string(doc_id));
  double total = 0.0;
  for (std::uint32_t term : query_terms(query_tokens)) {
    const auto& list = postings_[term];
    const auto it = std::lower_bound(list.begin(), list.end(), *pos,
                                     [](const Posting& p, std::uint32_t d) { return p.doc < d; });
    if (it != list.end() && it->doc == *pos) {
      total += contribution(it->term_frequency, idf(term), doc_lengths_[*pos]);
    }
  }
  return total;
}

std::vector<ScoredDoc> Index::top_k(std::span<const std::string> query_tokens, std::size_t k) const {
  std::vector<double> acc(doc_count(), 0.0);
  for (std::uint32_t term : query_terms(query_tokens)) {
    const double w = idf(term);
    for (const Posting& p : postings_[term]) acc[p.doc] += contribution(p.term_frequency, w, doc_lengths_[p.doc]);
  }
  std::vector<std::uint32_t> hits;
  for (std::uint32_t d = 0; d < acc.size(); ++d) {
    if (acc[d] > 0.0) hits.push_back(d);
  }
  std::stable_sort(hits.begin(), hits.end(), [&](std::uint32_t a, std::uint32_t b) { return acc[a] > acc[b]; });

  std::vector<ScoredDoc> out;
  const std::size_t want = std::min(k, doc_count());
  for (std::size_t i = 0; i < hits.size() && out.size() < want; ++i) {
    out.push_back(ScoredDoc{doc_ids_[hits[i]], acc[hits[i]], false});
  }
  for (std::uint32_t d = 0; d < acc.size() && out.size() < want; ++d) {
    if (acc[d] <= 0.0) out.push_back(ScoredDoc{doc_ids_[d], 0.0, true});
  }
  return out;
}

void Index::save(std::ostream& out) const {
  out << kIndexHeader << '\n';
  out << "docs " << doc_ids_.size() << '\n';
  for (std::size_t d = 0; d < doc_ids_.size(); ++d) {
    out << doc_lengths_[d] << ' ' << json(doc_ids_[d]).dump() << '\n';
  }
  out << "terms " << terms_.size() << '\n';
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    out << postings_[t].size() << ' ' << json(terms_[t]).dump() << '\n';
    for (std::size_t i = 0; i < postings_[t].size(); ++i) {
      if (i > 0) out << ' ';
      out << postings_[t][i].doc << ' ' << postings_[t][i].term_frequency;
    }
    out << '\n';
  }
  out << "end\n";
}

Index Index::load(std::istream& in) {
  if (read_line(in, "header") != kIndexHeader) throw FormatError("index: bad header, expected 'EVPIRANK-IDX v1'");
  Index index;
  auto read_count = [&](const char* label) {
    const std::string line = read_line(in, label);
    std::istringstream ss(line);
    std::string tag;
    std::size_t n = 0;
    if (!(ss >> tag >> n) || tag != label) throw FormatError(std::string("index: expected '") + label + " <count>'");
    return n;
  };
  auto split_counted = [](const std::string& line, std::size_t& count, std::string& text) {
    const auto space = line.find(' ');
    if (space == std::string::npos) throw FormatError("index: malformed entry line");
    count = std::stoull(line.substr(0, space));
    const json j = json::parse(line.substr(space + 1), nullptr, false);
    if (!j.is_string()) throw FormatError("index: expected JSON string");
    text = j.get<std::string>();
  };

  const std::size_t n_docs = read_count("docs");
  for (std::size_t d = 0; d < n_docs; ++d) {
    std::size_t length = 0;
    std::string id;
    split_counted(read_line(in, "doc"), length, id);
    index.doc_ids_.push_back(std::move(id));
    index.doc_lengths_.push_back(static_cast<std::uint32_t>(length));
  }
  const std::size_t n_terms = read_count("terms");
  index.postings_.resize(n_terms);
  for (std::size_t t = 0; t < n_terms; ++t) {
    std::size_t df = 0;
    std::string term;
    split_counted(read_line(in, "term"), df, term);
    index.terms_.push_back(std::move(term));
    std::istringstream ss(read_line(in, "postings"));
    for (std::size_t i = 0; i < df; ++i) {
      Posting p;
      if (!(ss >> p.doc >> p.term_frequency) || p.doc >= n_docs) throw FormatError("index: bad posting");
      if (!index.postings_[t].empty() && index.postings_[t].back().doc >= p.doc) {
        throw FormatError("index: postings not sorted by doc");
      }
      index.postings_[t].push_back(p);
    }
  }
  if (read_line(in, "trailer") != "end") throw FormatError("index: missing 'end' trailer");
  index.rebuild_lookup();
  return index;
}

Index build_post_index(std::span<const Triple> triples) {
  std::vector<Document> docs;
  docs.reserve(triples.size());
  for (const auto& t : triples) docs.push_back(Document{t.post.post_id, post_text(t.post)});
  return Index::build(docs);
}

CandidateSet generate_candidates(const Index& index, const std::map<std::string, Triple>& triples_by_post,
                                 std::string_view post_id, std::size_t k) {
  const auto self_it = triples_by_post.find(std::string(post_id));
  if (self_it == triples_by_post.end()) throw UsageError("no triple for post " + std::string(post_id));
  if (k == 0) throw UsageError("k must be at least 1");
  const Triple& self = self_it->second;

  CandidateSet set;
  set.post_id = self.post.post_id;
  set.post_body = post_text(self.post);
  set.original_index = 0;
  auto add = [&](const Triple& t) {
    set.questions.push_back(t.question);
    set.answers.push_back(t.answer);
    set.source_post_ids.push_back(t.post.post_id);
  };
  add(self);

  const bool self_indexed = index.doc_position(self.post.post_id).has_value();
  // One extra slot in case the post itself shows up among the neighbours.
  const auto hits = index.top_k(tokenize(set.post_body), self_indexed ? k : k - 1);
  for (const auto& hit : hits) {
    if (set.size() >= k) break;
    if (hit.doc_id == self.post.post_id) continue;
    const auto it = triples_by_post.find(hit.doc_id);
    if (it == triples_by_post.end()) throw UsageError("indexed post without a triple: " + hit.doc_id);
    add(it->second);
    if (hit.padded) ++set.padded;
  }
  return set;
}

std::string candidate_set_to_json(const CandidateSet& set) {
  ordered_json j;
  j["post_id"] = set.post_id;
  j["post_body"] = set.post_body;
  j["questions"] = set.questions;
  j["answers"] = set.answers;
  j["source_post_ids"] = set.source_post_ids;
  j["original_index"] = set.original_index;
  return j.dump();
}

CandidateSet candidate_set_from_json(std::string_view line) {
  const json j = json::parse(line, nullptr, false);
  if (!j.is_object()) throw FormatError("candidates: not a JSON object");
  CandidateSet set;
  try {
    set.post_id = j.at("post_id").get<std::string>();
    set.post_body = j.at("post_body").get<std::string>();
    set.questions = j.at("questions").get<std::vector<std::string>>();
    set.answers = j.at("answers").get<std::vector<std::string>>();
    set.source_post_ids = j.at("source_post_ids").get<std::vector<std::string>>();
    set.original_index = j.at("original_index").get<std::size_t>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("candidates: ") + e.what());
  }
  if (set.questions.empty() || set.answers.size() != set.questions.size() ||
      set.source_post_ids.size() != set.questions.size()) {
    throw FormatError("candidates: questions/answers/source_post_ids must be non-empty and equally long");
  }
  if (set.original_index >= set.questions.size()) throw FormatError("candidates: original_index out of range");
  return set;
}

void write_candidate_sets(std::ostream& out, std::span<const CandidateSet> sets) {
  for (const auto& s : sets) out << candidate_set_to_json(s) << '\n';
}

std::vector<CandidateSet> read_candidate_sets(std::istream& in) {
  std::vector<CandidateSet> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      out.push_back(candidate_set_from_json(line));
    } catch (const FormatError& e) {
      throw FormatError("candidates line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace evpirank
