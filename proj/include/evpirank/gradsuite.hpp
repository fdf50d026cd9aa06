#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace evpirank {

inline constexpr double kGradTolerance = 1e-4;

struct GradSuiteEntry {
  std::string component;
  std::size_t draws = 0;
  double max_relative_error = 0.0;

  bool passed() const { return max_relative_error < kGradTolerance; }
};

// Finite-difference checks of every trainable component on small random
// models and toy candidate sets: the LSTM encoder, both EVPI feedforward nets,
// the answer loss, the utility BCE, the joint loss and the three neural
// baselines. Each component is checked on `draws` independent parameter
// draws with `probes` coordinates each.
std::vector<GradSuiteEntry> run_gradient_suite(std::uint64_t seed, std::size_t draws = 10, std::size_t probes = 25);

}  // namespace evpirank
