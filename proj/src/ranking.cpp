#include "evpirank/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "evpirank/error.hpp"

namespace evpirank {

RankedList rank_by_scores(std::string post_id, std::string model, std::span<const double> scores) {
  for (double s : scores) {
    if (std::isnan(s)) throw NumericError("rank_by_scores: NaN score for post " + post_id);
  }
  RankedList out;
  out.post_id = std::move(post_id);
  out.model = std::move(model);
  out.order.resize(scores.size());
  std::iota(out.order.begin(), out.order.end(), std::size_t{0});
  std::stable_sort(out.order.begin(), out.order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  for (std::size_t k : out.order) out.scores.push_back(scores[k]);
  return out;
}

std::string ranked_list_to_json(const RankedList& list) {
  nlohmann::ordered_json j;
  j["post_id"] = list.post_id;
  j["model"] = list.model;
  j["order"] = list.order;
  j["scores"] = list.scores;
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::strict);
}

RankedList ranked_list_from_json(std::string_view line) {
  RankedList out;
  try {
    const auto j = nlohmann::json::parse(line);
    out.post_id = j.at("post_id").get<std::string>();
    out.model = j.at("model").get<std::string>();
    out.order = j.at("order").get<std::vector<std::size_t>>();
    out.scores = j.at("scores").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("ranking: ") + e.what());
  }
  if (out.order.size() != out.scores.size() || out.order.empty()) {
    throw FormatError("ranking " + out.post_id + ": order and scores must be non-empty and equally long");
  }
  std::vector<bool> seen(out.order.size(), false);
  for (std::size_t k : out.order) {
    if (k >= seen.size() || seen[k]) throw FormatError("ranking " + out.post_id + ": order is not a permutation");
    seen[k] = true;
  }
  for (std::size_t k = 1; k < out.scores.size(); ++k) {
    if (out.scores[k] > out.scores[k - 1]) throw FormatError("ranking " + out.post_id + ": scores increase");
  }
  return out;
}

void write_rankings(std::ostream& out, std::span<const RankedList> lists) {
  for (const auto& l : lists) out << ranked_list_to_json(l) << '\n';
}

std::vector<RankedList> read_rankings(std::istream& in) {
  std::vector<RankedList> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(ranked_list_from_json(line));
    } catch (const FormatError& e) {
      throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

RankedList Ranker::rank(const PreparedCandidateSet& set) const {
  const auto scores = candidate_scores(set);
  return rank_by_scores(set.post_id, name(), scores);
}

std::unique_ptr<TrainableRanker> TrainableRanker::zeroed_clone() const {
  auto copy = clone();
  zero_all(copy->parameters());
  return copy;
}

}  // namespace evpirank
