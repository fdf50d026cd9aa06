#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace evpirank {

enum class ConfigType { integer, real, boolean, choice };

struct ConfigKey {
  std::string name;
  ConfigType type;
  std::string default_value;
  std::vector<std::string> choices;  // for ConfigType::choice
  std::string help;
};

// Run configuration: documented defaults, overridden by a `key = value` file
// (blank lines and `#` comments allowed) and then by single assignments.
// Unknown keys and ill-typed values throw UsageError.
class Config {
 public:
  Config();

  static const std::vector<ConfigKey>& keys();

  // `source` names the input in error messages.
  void load(std::istream& in, const std::string& source);
  void load_file(const std::string& path);

  void set(std::string_view key, std::string_view value);

  // "key=value"
  void set_assignment(std::string_view assignment);

  const std::string& get_string(std::string_view key) const;
  std::int64_t get_int(std::string_view key) const;
  std::size_t get_size(std::string_view key) const;
  double get_double(std::string_view key) const;
  bool get_bool(std::string_view key) const;

  // Every key with its resolved value, one `key = value` line each.
  std::string resolved() const;

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

}  // namespace evpirank
