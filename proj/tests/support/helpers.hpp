#pragma once

// File and process helpers shared by the tests.

#include <filesystem>
#include <string>
#include <vector>

namespace evpirank::testing {

std::string fixture_path(const std::string& name);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

// Runs the command-line entry point in process.
CliResult run(const std::vector<std::string>& args);

}  // namespace evpirank::testing
