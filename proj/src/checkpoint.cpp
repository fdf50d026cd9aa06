#include "evpirank/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <sstream>

#include "evpirank/error.hpp"

namespace evpirank {
namespace {

constexpr const char* kHeader = "EVPIRANK-CKPT v1";

void write_le(std::ostream& out, double value) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(value);
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
  out.write(bytes, 8);
}

double read_le(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw FormatError("checkpoint: truncated tensor data");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

bool has_space(const std::string& s) { return s.empty() || s.find_first_of(" \t\r\n") != std::string::npos; }

std::string expect_line(std::istream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError(std::string("checkpoint: missing ") + what);
  return line;
}

std::size_t parse_count(const std::string& line, const std::string& keyword) {
  std::istringstream ss(line);
  std::string word;
  long long n = -1;
  if (!(ss >> word >> n) || word != keyword || n < 0) {
    throw FormatError("checkpoint: expected '" + keyword + " <count>', got '" + line + "'");
  }
  return static_cast<std::size_t>(n);
}

}  // namespace

void save_checkpoint(std::ostream& out, const std::string& model, const std::map<std::string, std::string>& meta,
                     const TensorList& params) {
  if (has_space(model)) throw UsageError("checkpoint: model name must be a single word");
  out << kHeader << '\n' << "model " << model << '\n' << "meta " << meta.size() << '\n';
  for (const auto& [key, value] : meta) {
    if (has_space(key) || has_space(value)) throw UsageError("checkpoint: meta entries must be single words");
    out << key << ' ' << value << '\n';
  }
  out << "tensors " << params.size() << '\n';
  for (const auto& p : params) {
    if (has_space(p.name)) throw UsageError("checkpoint: tensor name must be a single word");
    out << p.name << ' ' << p.tensor->rows() << ' ' << p.tensor->cols() << '\n';
  }
  out << "data\n";
  for (const auto& p : params) {
    for (double v : p.tensor->values()) write_le(out, v);
  }
}

Checkpoint load_checkpoint(std::istream& in) {
  if (expect_line(in, "header") != kHeader) throw FormatError("checkpoint: bad header (expected EVPIRANK-CKPT v1)");
  Checkpoint ckpt;
  {
    const std::string line = expect_line(in, "model line");
    if (line.rfind("model ", 0) != 0 || line.size() <= 6) throw FormatError("checkpoint: bad model line");
    ckpt.model = line.substr(6);
  }
  const std::size_t n_meta = parse_count(expect_line(in, "meta count"), "meta");
  for (std::size_t i = 0; i < n_meta; ++i) {
    std::istringstream ss(expect_line(in, "meta entry"));
    std::string key, value;
    if (!(ss >> key >> value)) throw FormatError("checkpoint: bad meta entry");
    ckpt.meta[key] = value;
  }
  const std::size_t n_tensors = parse_count(expect_line(in, "tensor count"), "tensors");
  for (std::size_t i = 0; i < n_tensors; ++i) {
    std::istringstream ss(expect_line(in, "manifest entry"));
    std::string name;
    long long rows = -1, cols = -1;
    if (!(ss >> name >> rows >> cols) || rows < 0 || cols < 0) throw FormatError("checkpoint: bad manifest entry");
    ckpt.tensors.emplace_back(name, DenseMatrix(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols)));
  }
  if (expect_line(in, "data marker") != "data") throw FormatError("checkpoint: missing data marker");
  for (auto& [name, tensor] : ckpt.tensors) {
    for (double& v : tensor.values()) v = read_le(in);
  }
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("checkpoint: trailing bytes after tensor data");
  return ckpt;
}

void Checkpoint::restore_into(const TensorList& params) const {
  if (params.size() != tensors.size()) {
    throw FormatError("checkpoint: holds " + std::to_string(tensors.size()) + " tensors, model expects " +
                      std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& [name, tensor] = tensors[i];
    if (name != params[i].name || !tensor.same_shape(*params[i].tensor)) {
      throw FormatError("checkpoint: tensor " + name + " does not match model tensor " + params[i].name);
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) *params[i].tensor = tensors[i].second;
}

const std::string& Checkpoint::meta_value(const std::string& key) const {
  auto it = meta.find(key);
  if (it == meta.end()) throw FormatError("checkpoint: missing meta entry " + key);
  return it->second;
}

}  // namespace evpirank
