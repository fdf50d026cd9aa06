#pragma once

// Small helpers shared by the model implementations. Not installed.

#include <charconv>
#include <initializer_list>
#include <map>
#include <span>
#include <string>

#include "evpirank/error.hpp"
#include "evpirank/tensor.hpp"

namespace evpirank::detail {

inline Vector concat(std::initializer_list<std::span<const double>> parts) {
  Vector out;
  for (auto p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

// out[k] += in[offset + k]
inline void add_slice(std::span<const double> in, std::size_t offset, std::span<double> out) {
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += in[offset + k];
}

inline std::size_t meta_size(const std::map<std::string, std::string>& meta, const std::string& key) {
  auto it = meta.find(key);
  if (it == meta.end()) throw FormatError("checkpoint: missing meta entry " + key);
  std::size_t value = 0;
  const auto& s = it->second;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw FormatError("checkpoint: bad meta value for " + key);
  return value;
}

inline bool meta_bool(const std::map<std::string, std::string>& meta, const std::string& key) {
  auto it = meta.find(key);
  if (it == meta.end()) throw FormatError("checkpoint: missing meta entry " + key);
  if (it->second == "true") return true;
  if (it->second == "false") return false;
  throw FormatError("checkpoint: bad meta value for " + key);
}

}  // namespace evpirank::detail
