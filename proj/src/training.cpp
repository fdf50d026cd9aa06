#include "evpirank/training.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "evpirank/error.hpp"
#include "evpirank/metrics.hpp"

namespace evpirank {

std::string EpochRecord::to_json() const {
  nlohmann::ordered_json j;
  j["epoch"] = epoch;
  j["train_loss"] = train_loss;
  j["tune_map"] = tune_map;
  j["tune_p_at_1"] = tune_p_at_1;
  return j.dump();
}

OriginalModeMetrics original_mode_metrics(const Ranker& ranker, std::span<const PreparedCandidateSet> sets) {
  OriginalModeMetrics m;
  if (sets.empty()) return m;
  for (const auto& s : sets) {
    const RankedList r = ranker.rank(s);
    const std::size_t rel[1] = {s.original_index};
    m.map += average_precision(r.order, rel);
    m.p_at_1 += precision_at_k(r.order, rel, 1);
  }
  m.map /= static_cast<double>(sets.size());
  m.p_at_1 /= static_cast<double>(sets.size());
  return m;
}

namespace {

// Per-example losses and gradients for one batch, possibly on several threads.
void batch_gradients(const TrainableRanker& model, std::span<const PreparedCandidateSet> train,
                     std::span<const std::size_t> batch, std::vector<std::unique_ptr<TrainableRanker>>& buffers,
                     std::vector<double>& losses, std::size_t threads) {
  const std::size_t n = batch.size();
  auto work = [&](std::size_t worker, std::size_t stride) {
    for (std::size_t i = worker; i < n; i += stride) {
      zero_all(buffers[i]->parameters());
      losses[i] = model.example_loss(train[batch[i]], buffers[i].get());
    }
  };
  const std::size_t workers = std::min(threads, n);
  if (workers <= 1) {
    work(0, 1);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          work(w, workers);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

TrainResult train_ranker(const TrainableRanker& initial, std::span<const PreparedCandidateSet> train,
                         std::span<const PreparedCandidateSet> tune, const TrainConfig& config, std::ostream* log) {
  if (train.empty() || tune.empty()) throw UsageError("train_ranker: train and tune sets must be non-empty");
  if (config.batch_size == 0) throw UsageError("train_ranker: batch_size must be positive");

  auto model = initial.clone();
  TensorList params = model->parameters();
  AdamState state = AdamState::for_params(params);
  auto batch_grad = model->zeroed_clone();
  TensorList grads = batch_grad->parameters();
  std::vector<std::unique_ptr<TrainableRanker>> buffers;
  for (std::size_t i = 0; i < std::min(config.batch_size, train.size()); ++i) buffers.push_back(model->zeroed_clone());

  TrainResult result;
  auto record = [&](std::size_t epoch, double loss) {
    const auto m = original_mode_metrics(*model, tune);
    EpochRecord r{epoch, loss, m.map, m.p_at_1};
    if (log) *log << r.to_json() << '\n' << std::flush;
    result.log.push_back(r);
    return r;
  };
  auto check_finite = [&](double loss, std::size_t epoch, const PreparedCandidateSet& set) {
    if (!std::isfinite(loss)) {
      throw NumericError("training diverged: non-finite loss at epoch " + std::to_string(epoch) + " on post " +
                         set.post_id);
    }
  };

  double initial_loss = 0.0;
  for (const auto& s : train) {
    const double l = model->example_loss(s, nullptr);
    check_finite(l, 0, s);
    initial_loss += l;
  }
  const EpochRecord first = record(0, initial_loss / static_cast<double>(train.size()));
  double best_map = first.tune_map;
  result.best = model->clone();
  result.best_epoch = 0;

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> losses(buffers.size());
  const Rng root(config.seed);
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    Rng rng = root.substream("epoch", epoch);
    rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const std::span<const std::size_t> batch(order.data() + start, end - start);
      batch_gradients(*model, train, batch, buffers, losses, std::max<std::size_t>(1, config.threads));
      zero_all(grads);
      for (std::size_t i = 0; i < batch.size(); ++i) {
        check_finite(losses[i], epoch, train[batch[i]]);
        epoch_loss += losses[i];
        const TensorList g = buffers[i]->parameters();
        for (std::size_t t = 0; t < g.size(); ++t) add_into(*g[t].tensor, *grads[t].tensor);
      }
      adam_step(params, grads, state, config.adam);
    }
    const EpochRecord r = record(epoch, epoch_loss / static_cast<double>(train.size()));
    if (r.tune_map > best_map) {
      best_map = r.tune_map;
      result.best = model->clone();
      result.best_epoch = epoch;
      since_best = 0;
    } else if (config.patience > 0 && ++since_best >= config.patience) {
      break;
    }
  }
  return result;
}

}  // namespace evpirank
