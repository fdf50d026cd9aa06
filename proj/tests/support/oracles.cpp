#include "oracles.hpp"

#include <cctype>
#include <cmath>

namespace evpirank::testing {

std::vector<std::string> oracle_tokens(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const unsigned char c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<double> oracle_tfidf_scores(const std::vector<std::string>& docs, const std::string& query) {
  std::vector<std::vector<std::string>> tokens;
  for (const auto& d : docs) tokens.push_back(oracle_tokens(d));
  std::vector<std::string> terms;
  for (const auto& t : oracle_tokens(query)) {
    bool seen = false;
    for (const auto& u : terms) seen = seen || u == t;
    if (!seen) terms.push_back(t);
  }
  const double n = static_cast<double>(docs.size());
  std::vector<double> scores(docs.size(), 0.0);
  for (const auto& term : terms) {
    double df = 0.0;
    for (const auto& doc : tokens) {
      bool has = false;
      for (const auto& w : doc) has = has || w == term;
      df += has ? 1.0 : 0.0;
    }
    const double idf = 1.0 + std::log(n / (df + 1.0));
    for (std::size_t d = 0; d < docs.size(); ++d) {
      double tf = 0.0;
      for (const auto& w : tokens[d]) tf += w == term ? 1.0 : 0.0;
      if (tf > 0.0) scores[d] += std::sqrt(tf) * idf * idf / std::sqrt(static_cast<double>(tokens[d].size()));
    }
  }
  return scores;
}

namespace {
bool contains(const std::vector<std::size_t>& v, std::size_t x) {
  for (std::size_t y : v) {
    if (y == x) return true;
  }
  return false;
}
}  // namespace

double oracle_precision_at_k(const std::vector<std::size_t>& order, const std::vector<std::size_t>& relevant,
                             std::size_t k) {
  double hits = 0.0;
  for (std::size_t r = 0; r < k && r < order.size(); ++r) hits += contains(relevant, order[r]) ? 1.0 : 0.0;
  return hits / static_cast<double>(k);
}

double oracle_average_precision(const std::vector<std::size_t>& order, const std::vector<std::size_t>& relevant) {
  double sum = 0.0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (contains(relevant, order[r])) sum += oracle_precision_at_k(order, relevant, r + 1);
  }
  return sum / static_cast<double>(relevant.size());
}

}  // namespace evpirank::testing
