#include "evpirank/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "evpirank/error.hpp"
#include "evpirank/rng.hpp"

namespace evpirank {

namespace {

constexpr std::size_t kMaxCandidates = 10;

}  // namespace

Annotation annotation_from_json(std::string_view line) {
  Annotation a;
  try {
    const auto j = nlohmann::json::parse(line);
    a.post_id = j.at("post_id").get<std::string>();
    a.annotator_id = j.at("annotator_id").get<std::string>();
    a.best = j.at("best").get<std::size_t>();
    a.valid = j.at("valid").get<std::vector<std::size_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("annotation: ") + e.what());
  }
  std::sort(a.valid.begin(), a.valid.end());
  a.valid.erase(std::unique(a.valid.begin(), a.valid.end()), a.valid.end());
  if (a.best >= kMaxCandidates || (!a.valid.empty() && a.valid.back() >= kMaxCandidates)) {
    throw FormatError("annotation " + a.post_id + ": candidate index outside [0, 9]");
  }
  if (!std::binary_search(a.valid.begin(), a.valid.end(), a.best)) {
    throw FormatError("annotation " + a.post_id + ": best is not marked valid");
  }
  return a;
}

std::string annotation_to_json(const Annotation& a) {
  nlohmann::ordered_json j;
  j["post_id"] = a.post_id;
  j["annotator_id"] = a.annotator_id;
  j["best"] = a.best;
  j["valid"] = a.valid;
  return j.dump();
}

std::vector<Annotation> read_annotations(std::istream& in) {
  std::vector<Annotation> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(annotation_from_json(line));
    } catch (const FormatError& e) {
      throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::string_view to_string(LabelMode mode) {
  switch (mode) {
    case LabelMode::best_union:
      return "best_union";
    case LabelMode::valid_intersection:
      return "valid_intersection";
    case LabelMode::original:
      return "original";
    case LabelMode::exclude_original:
      return "exclude_original";
  }
  return "?";
}

LabelMode label_mode_from_string(std::string_view name) {
  for (auto m : {LabelMode::best_union, LabelMode::valid_intersection, LabelMode::original,
                 LabelMode::exclude_original}) {
    if (to_string(m) == name) return m;
  }
  throw UsageError("unknown label mode '" + std::string(name) +
                   "' (valid: best_union, valid_intersection, original, exclude_original)");
}

std::vector<LabelSet> build_labelsets(std::span<const Annotation> annotations, std::span<const CandidateSet> sets,
                                      LabelMode mode, LabelMode exclude_base, LabelBuildReport* report) {
  LabelBuildReport local;
  LabelBuildReport& rep = report ? *report : local;
  std::map<std::string, const CandidateSet*> by_post;
  for (const auto& s : sets) by_post[s.post_id] = &s;

  std::vector<LabelSet> out;
  if (mode == LabelMode::original) {
    for (const auto& [id, set] : by_post) out.push_back({id, {set->original_index}, mode, std::nullopt});
    return out;
  }
  if (mode == LabelMode::exclude_original && exclude_base != LabelMode::best_union &&
      exclude_base != LabelMode::valid_intersection) {
    throw UsageError("exclude_original needs best_union or valid_intersection as its base");
  }

  std::map<std::string, std::vector<const Annotation*>> grouped;
  for (const auto& a : annotations) grouped[a.post_id].push_back(&a);
  for (const auto& [post_id, group] : grouped) {
    auto it = by_post.find(post_id);
    if (it == by_post.end()) throw UsageError("annotations for post " + post_id + " with no candidate set");
    if (group.size() != 2 || group[0]->annotator_id == group[1]->annotator_id) {
      throw UsageError("post " + post_id + " needs annotations from exactly two annotators");
    }
    const Annotation& a = *group[0];
    const Annotation& b = *group[1];
    const LabelMode base = mode == LabelMode::exclude_original ? exclude_base : mode;
    std::set<std::size_t> rel;
    if (base == LabelMode::best_union) {
      rel = {a.best, b.best};
    } else {
      std::set_intersection(a.valid.begin(), a.valid.end(), b.valid.begin(), b.valid.end(),
                            std::inserter(rel, rel.end()));
    }
    LabelSet ls{post_id, {}, mode, std::nullopt};
    if (mode == LabelMode::exclude_original) {
      ls.excluded = it->second->original_index;
      rel.erase(it->second->original_index);
    }
    for (std::size_t k : rel) {
      if (k >= it->second->size()) throw UsageError("post " + post_id + ": annotated index beyond candidate set");
    }
    ls.relevant.assign(rel.begin(), rel.end());
    if (ls.relevant.empty()) {
      ++rep.dropped_empty;
      continue;
    }
    out.push_back(std::move(ls));
  }
  return out;
}

double precision_at_k(std::span<const std::size_t> order, std::span<const std::size_t> relevant, std::size_t k) {
  if (k == 0) throw UsageError("precision_at_k: k must be positive");
  std::size_t hits = 0;
  for (std::size_t r = 0; r < std::min(k, order.size()); ++r) {
    if (std::find(relevant.begin(), relevant.end(), order[r]) != relevant.end()) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(k);
}

double average_precision(std::span<const std::size_t> order, std::span<const std::size_t> relevant) {
  if (relevant.empty()) throw UsageError("average_precision: empty relevant set");
  double total = 0.0;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (std::find(relevant.begin(), relevant.end(), order[r]) != relevant.end()) {
      ++hits;
      total += static_cast<double>(hits) / static_cast<double>(r + 1);
    }
  }
  return total / static_cast<double>(relevant.size());
}

double mean_average_precision(std::span<const RankingWithLabels> items, std::size_t* skipped) {
  double total = 0.0;
  std::size_t used = 0;
  std::size_t skip = 0;
  for (const auto& it : items) {
    if (it.relevant.empty()) {
      ++skip;
      continue;
    }
    total += average_precision(it.order, it.relevant);
    ++used;
  }
  if (skipped) *skipped = skip;
  return used == 0 ? 0.0 : total / static_cast<double>(used);
}

PostMetrics score_post(std::span<const std::size_t> order, const LabelSet& labels) {
  std::vector<std::size_t> kept;
  kept.reserve(order.size());
  for (std::size_t k : order) {
    if (!labels.excluded || k != *labels.excluded) kept.push_back(k);
  }
  PostMetrics m;
  m.post_id = labels.post_id;
  m.p_at_1 = precision_at_k(kept, labels.relevant, 1);
  m.p_at_3 = precision_at_k(kept, labels.relevant, 3);
  m.p_at_5 = precision_at_k(kept, labels.relevant, 5);
  m.average_precision = average_precision(kept, labels.relevant);
  return m;
}

MetricReport aggregate(std::span<const PostMetrics> posts, std::string model, std::string mode) {
  MetricReport r;
  r.model = std::move(model);
  r.mode = std::move(mode);
  r.n_posts = posts.size();
  for (const auto& p : posts) {
    r.p_at_1 += p.p_at_1;
    r.p_at_3 += p.p_at_3;
    r.p_at_5 += p.p_at_5;
    r.map += p.average_precision;
  }
  if (!posts.empty()) {
    const double n = static_cast<double>(posts.size());
    r.p_at_1 /= n;
    r.p_at_3 /= n;
    r.p_at_5 /= n;
    r.map /= n;
  }
  return r;
}

std::vector<PostMetrics> evaluate_posts(std::span<const RankedList> rankings, std::span<const LabelSet> labels) {
  std::map<std::string, const RankedList*> by_post;
  for (const auto& r : rankings) by_post[r.post_id] = &r;
  std::vector<const LabelSet*> sorted;
  for (const auto& l : labels) sorted.push_back(&l);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->post_id < b->post_id; });
  std::vector<PostMetrics> out;
  for (const LabelSet* l : sorted) {
    auto it = by_post.find(l->post_id);
    if (it == by_post.end()) throw UsageError("no ranking for labeled post " + l->post_id);
    out.push_back(score_post(it->second->order, *l));
  }
  return out;
}

MetricReport evaluate(std::span<const RankedList> rankings, std::span<const LabelSet> labels, std::string model,
                      std::string mode) {
  const auto posts = evaluate_posts(rankings, labels);
  return aggregate(posts, std::move(model), std::move(mode));
}

std::string MetricReport::to_json() const {
  nlohmann::ordered_json j;
  j["model"] = model;
  j["mode"] = mode;
  j["n_posts"] = n_posts;
  j["p_at_1"] = p_at_1;
  j["p_at_3"] = p_at_3;
  j["p_at_5"] = p_at_5;
  j["map"] = map;
  return j.dump();
}

std::string MetricReport::to_table() const {
  char buf[256];
  std::ostringstream out;
  std::snprintf(buf, sizeof buf, "%-12s %-20s %7s %7s %7s %7s %7s\n", "model", "mode", "n", "p@1", "p@3", "p@5",
                "MAP");
  out << buf;
  std::snprintf(buf, sizeof buf, "%-12s %-20s %7zu %7.2f %7.2f %7.2f %7.2f\n", model.c_str(), mode.c_str(), n_posts,
                100.0 * p_at_1, 100.0 * p_at_3, 100.0 * p_at_5, 100.0 * map);
  out << buf;
  return out.str();
}

double cohen_kappa(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw UsageError("cohen_kappa: sequences differ in length");
  if (a.empty()) throw UsageError("cohen_kappa: empty input");
  const double n = static_cast<double>(a.size());
  std::map<int, std::pair<double, double>> marginals;
  double agree = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == b[i]) agree += 1.0;
    marginals[a[i]].first += 1.0;
    marginals[b[i]].second += 1.0;
  }
  const double p_o = agree / n;
  double p_e = 0.0;
  for (const auto& [label, counts] : marginals) p_e += (counts.first / n) * (counts.second / n);
  if (p_e >= 1.0) return 1.0;
  return (p_o - p_e) / (1.0 - p_e);
}

double bootstrap_test(std::span<const double> a, std::span<const double> b, std::size_t n_resamples,
                      std::uint64_t seed) {
  if (a.size() != b.size()) throw UsageError("bootstrap_test: score lists differ in length");
  if (a.size() < 2) throw UsageError("bootstrap_test: needs at least two posts");
  if (n_resamples == 0) throw UsageError("bootstrap_test: needs at least one resample");
  const std::size_t n = a.size();
  std::vector<double> diff(n);
  double observed = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    diff[i] = a[i] - b[i];
    observed += diff[i];
  }
  observed /= static_cast<double>(n);
  if (observed == 0.0) return 1.0;

  Rng rng = Rng(seed).substream("bootstrap");
  std::size_t contrary = 0;
  for (std::size_t r = 0; r < n_resamples; ++r) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += diff[rng.below(n)];
    const double mean = total / static_cast<double>(n);
    if (observed > 0.0 ? mean <= 0.0 : mean >= 0.0) ++contrary;
  }
  return std::min(1.0, 2.0 * static_cast<double>(contrary) / static_cast<double>(n_resamples));
}

}  // namespace evpirank
