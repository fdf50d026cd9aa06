#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "evpirank/optim.hpp"
#include "evpirank/prepared.hpp"
#include "evpirank/ranking.hpp"

namespace evpirank {

struct TrainConfig {
  AdamConfig adam;
  std::size_t batch_size = 32;
  std::size_t epochs = 30;
  std::size_t patience = 5;  // epochs without tune MAP improvement; 0 disables
  std::uint64_t seed = 13;
  std::size_t threads = 1;
};

struct EpochRecord {
  std::size_t epoch = 0;     // 0 = before any update
  double train_loss = 0.0;   // mean per-post loss seen during the epoch
  double tune_map = 0.0;     // original-question labels
  double tune_p_at_1 = 0.0;

  std::string to_json() const;
};

struct TrainResult {
  std::unique_ptr<TrainableRanker> best;  // snapshot with the best tune MAP
  std::size_t best_epoch = 0;
  std::vector<EpochRecord> log;
};

struct OriginalModeMetrics {
  double map = 0.0;
  double p_at_1 = 0.0;
};

// MAP and p@1 with each post's original question as the only relevant one.
OriginalModeMetrics original_mode_metrics(const Ranker& ranker, std::span<const PreparedCandidateSet> sets);

// Mini-batch Adam on the sum of per-post losses. Each post's gradient goes to
// its own buffer and buffers are summed in batch order, so the result does not
// depend on the thread count. Writes one JSON line per epoch to `log` when
// given. Throws NumericError when a loss is not finite and UsageError when
// either split is empty.
TrainResult train_ranker(const TrainableRanker& initial, std::span<const PreparedCandidateSet> train,
                         std::span<const PreparedCandidateSet> tune, const TrainConfig& config,
                         std::ostream* log = nullptr);

}  // namespace evpirank
