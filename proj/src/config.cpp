#include "evpirank/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "evpirank/error.hpp"
#include "evpirank/text.hpp"

namespace evpirank {

const std::vector<ConfigKey>& Config::keys() {
  using T = ConfigType;
  static const std::vector<ConfigKey> k = {
      {"hidden_dim", T::integer, "100", {}, "LSTM hidden size"},
      {"ff_hidden_dim", T::integer, "100", {}, "width of feedforward hidden layers"},
      {"ff_layers", T::integer, "5", {}, "hidden layers in each EVPI feedforward net"},
      {"baseline_ff_layers", T::integer, "10", {}, "hidden layers in the neural baselines"},
      {"ff_init", T::choice, "glorot", {"uniform", "glorot"}, "feedforward weight init"},
      {"lr", T::real, "0.001", {}, "Adam learning rate"},
      {"batch_size", T::integer, "32", {}, "posts per mini-batch"},
      {"epochs", T::integer, "30", {}, "maximum training epochs"},
      {"patience", T::integer, "5", {}, "early-stopping patience in epochs (0 = off)"},
      {"seed", T::integer, "13", {}, "root random seed (--seed overrides)"},
      {"clamp_negative_sim", T::boolean, "true", {}, "treat negative question similarity as 0"},
      {"ngram_epochs", T::integer, "10", {}, "bag-of-ngrams hinge epochs"},
      {"ngram_lr", T::real, "0.1", {}, "bag-of-ngrams step size"},
      {"cqa_epochs", T::integer, "200", {}, "logistic regression epochs"},
      {"cqa_lr", T::real, "0.1", {}, "logistic regression step size"},
      {"n_perm", T::integer, "1000", {}, "random-baseline permutations per post"},
      {"bootstrap_samples", T::integer, "10000", {}, "bootstrap resamples"},
      {"candidates", T::integer, "10", {}, "candidates per post"},
      {"exclude_base", T::choice, "best_union", {"best_union", "valid_intersection"},
       "annotation labels used by exclude_original"},
  };
  return k;
}

namespace {

const ConfigKey* find_key(std::string_view name) {
  for (const auto& k : Config::keys()) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

std::string valid_key_list() {
  std::string out;
  for (const auto& k : Config::keys()) {
    if (!out.empty()) out += ", ";
    out += k.name;
  }
  return out;
}

bool parse_int(std::string_view s, std::int64_t& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_real(std::string_view s, double& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

void validate(const ConfigKey& k, std::string_view value) {
  const std::string where = "config key " + k.name + ": ";
  switch (k.type) {
    case ConfigType::integer: {
      std::int64_t v = 0;
      if (!parse_int(value, v) || v < 0) throw UsageError(where + "expected a non-negative integer, got '" +
                                                          std::string(value) + "'");
      break;
    }
    case ConfigType::real: {
      double v = 0;
      if (!parse_real(value, v) || v < 0) throw UsageError(where + "expected a non-negative number, got '" +
                                                           std::string(value) + "'");
      break;
    }
    case ConfigType::boolean:
      if (value != "true" && value != "false") throw UsageError(where + "expected true or false");
      break;
    case ConfigType::choice:
      if (std::find(k.choices.begin(), k.choices.end(), value) == k.choices.end()) {
        std::string list;
        for (const auto& c : k.choices) list += (list.empty() ? "" : ", ") + c;
        throw UsageError(where + "expected one of " + list);
      }
      break;
  }
}

}  // namespace

Config::Config() {
  for (const auto& k : keys()) values_[k.name] = k.default_value;
}

void Config::set(std::string_view key, std::string_view value) {
  const ConfigKey* k = find_key(key);
  if (!k) throw UsageError("unknown config key '" + std::string(key) + "' (valid keys: " + valid_key_list() + ")");
  validate(*k, value);
  values_[k->name] = std::string(value);
}

void Config::set_assignment(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw UsageError("expected key=value, got '" + std::string(assignment) + "'");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void Config::load(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view body = line;
    if (auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
    body = trim(body);
    if (body.empty()) continue;
    try {
      if (body.find('=') == std::string_view::npos) throw UsageError("expected 'key = value'");
      set_assignment(body);
    } catch (const UsageError& e) {
      throw UsageError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void Config::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path);
  load(in, path);
}

const std::string& Config::get_string(std::string_view key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw UsageError("unknown config key '" + std::string(key) + "'");
  return it->second;
}

std::int64_t Config::get_int(std::string_view key) const {
  std::int64_t v = 0;
  if (!parse_int(get_string(key), v)) throw UsageError("config key " + std::string(key) + " is not an integer");
  return v;
}

std::size_t Config::get_size(std::string_view key) const { return static_cast<std::size_t>(get_int(key)); }

double Config::get_double(std::string_view key) const {
  double v = 0;
  if (!parse_real(get_string(key), v)) throw UsageError("config key " + std::string(key) + " is not a number");
  return v;
}

bool Config::get_bool(std::string_view key) const {
  const auto& v = get_string(key);
  if (v == "true") return true;
  if (v == "false") return false;
  throw UsageError("config key " + std::string(key) + " is not a boolean");
}

std::string Config::resolved() const {
  std::ostringstream out;
  for (const auto& k : keys()) out << k.name << " = " << values_.at(k.name) << '\n';
  return out.str();
}

}  // namespace evpirank
