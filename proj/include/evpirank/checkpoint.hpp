#pragma once

#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "evpirank/tensor.hpp"

namespace evpirank {

// On-disk layout:
//
//   EVPIRANK-CKPT v1
//   model <name>
//   meta <count>
//   <key> <value>            (count lines)
//   tensors <count>
//   <name> <rows> <cols>     (count lines)
//   data
//   <raw little-endian float64 values, row-major, manifest order>
//
// Meta entries carry whatever the model needs to rebuild its shapes.
struct Checkpoint {
  std::string model;
  std::map<std::string, std::string> meta;
  std::vector<std::pair<std::string, DenseMatrix>> tensors;

  // Copies the stored tensors into `params`. Names, order and shapes must
  // match exactly; throws FormatError otherwise.
  void restore_into(const TensorList& params) const;

  const std::string& meta_value(const std::string& key) const;
};

void save_checkpoint(std::ostream& out, const std::string& model, const std::map<std::string, std::string>& meta,
                     const TensorList& params);

// Throws FormatError on a bad header, manifest or truncated data.
Checkpoint load_checkpoint(std::istream& in);

}  // namespace evpirank
