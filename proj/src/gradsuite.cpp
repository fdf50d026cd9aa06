#include "evpirank/gradsuite.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "evpirank/baselines.hpp"
#include "evpirank/evpi.hpp"
#include "evpirank/gradcheck.hpp"

namespace evpirank {
namespace {

constexpr std::size_t kEmbedDim = 4;
constexpr std::size_t kHidden = 3;
constexpr std::size_t kFfHidden = 4;
constexpr std::size_t kVocab = 16;
// Wider than the training init so gradients stay well above finite-difference
// noise. Feedforward weights get Glorot-scaled draws; at a fixed small scale
// the signal fades over ten narrow layers.
constexpr double kDrawScale = 0.5;

bool is_feedforward_weight(const std::string& name) {
  return name.size() >= 2 && name.compare(name.size() - 2, 2, ".W") == 0;
}

void randomize(const TensorList& tensors, Rng& rng) {
  for (const auto& t : tensors) {
    double scale = kDrawScale;
    if (is_feedforward_weight(t.name)) {
      scale = 1.5 * std::sqrt(6.0 / static_cast<double>(t.tensor->rows() + t.tensor->cols()));
    }
    for (double& v : t.tensor->values()) v = rng.uniform(-scale, scale);
  }
}

void accumulate(TensorList from, const TensorList* into) {
  if (!into) return;
  for (std::size_t i = 0; i < from.size(); ++i) add_into(*from[i].tensor, *(*into)[i].tensor);
}

struct ToyData {
  EmbeddingTable table;
  std::vector<PreparedCandidateSet> sets;
};

std::string random_text(Rng& rng, std::size_t words) {
  std::string out;
  for (std::size_t k = 0; k < words; ++k) {
    if (k) out += ' ';
    out += "w" + std::to_string(rng.below(kVocab + 2));  // w16, w17 are out of vocabulary
  }
  return out;
}

// The returned sets view into `data.table`, so ToyData is built in place.
void make_toy_data(ToyData& data, Rng& rng) {
  std::vector<std::pair<std::string, Vector>> rows;
  for (std::size_t w = 0; w < kVocab; ++w) {
    Vector v(kEmbedDim);
    for (double& x : v) x = rng.normal();
    rows.emplace_back("w" + std::to_string(w), v);
  }
  data.table = EmbeddingTable::from_rows(kEmbedDim, rows);
  for (std::size_t s = 0; s < 2; ++s) {
    CandidateSet cs;
    cs.post_id = "toy" + std::to_string(s);
    cs.post_body = random_text(rng, 5);
    for (std::size_t j = 0; j < 4; ++j) {
      cs.questions.push_back(random_text(rng, 3));
      cs.answers.push_back(random_text(rng, 4));
      cs.source_post_ids.push_back(cs.post_id + "_" + std::to_string(j));
    }
    cs.original_index = s;  // exercise a non-zero original slot too
    data.sets.push_back(prepare_candidate_set(data.table, cs));
  }
}

Vector random_vector(Rng& rng, std::size_t n) {
  Vector v(n);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

double check_lstm(Rng& rng, std::size_t probes) {
  LstmParams p = LstmParams::zeros(kEmbedDim, kHidden);
  TensorList params;
  p.collect("lstm", params);
  randomize(params, rng);
  std::vector<Vector> storage;
  for (int t = 0; t < 5; ++t) storage.push_back(random_vector(rng, kEmbedDim));
  TokenSequence inputs(storage.begin(), storage.end());
  const Vector weights = random_vector(rng, kHidden);
  LossFunction loss = [&](const TensorList* grads) {
    LstmTrace trace;
    const Vector h = encode_sequence(p, inputs, grads ? &trace : nullptr);
    double total = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k) total += weights[k] * h[k];
    if (grads) {
      LstmParams g = LstmParams::zeros(kEmbedDim, kHidden);
      encode_sequence_backward(p, trace, weights, g);
      TensorList gl;
      g.collect("lstm", gl);
      accumulate(gl, grads);
    }
    return total;
  };
  return grad_check(loss, params, probes, rng).max_relative_error;
}

double check_feedforward(Rng& rng, std::size_t probes, std::size_t in, std::size_t layers, std::size_t out) {
  FeedForwardParams p = FeedForwardParams::zeros(in, kFfHidden, layers, out);
  TensorList params;
  p.collect("ff", params);
  randomize(params, rng);
  const Vector x = random_vector(rng, in);
  const Vector weights = random_vector(rng, out);
  LossFunction loss = [&](const TensorList* grads) {
    FeedForwardTrace trace;
    const Vector y = feedforward(p, x, grads ? &trace : nullptr);
    double total = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) total += weights[k] * y[k];
    if (grads) {
      FeedForwardParams g = FeedForwardParams::zeros(in, kFfHidden, layers, out);
      feedforward_backward(p, trace, weights, g);
      TensorList gl;
      g.collect("ff", gl);
      accumulate(gl, grads);
    }
    return total;
  };
  return grad_check(loss, params, probes, rng).max_relative_error;
}

using EvpiLoss = std::function<double(const EvpiParams&, std::span<const PreparedCandidateSet>, EvpiParams*)>;

double check_evpi(Rng& rng, std::size_t probes, const EvpiLoss& fn) {
  ToyData data;
  make_toy_data(data, rng);
  const EvpiShape shape{kEmbedDim, kHidden, kFfHidden, 5};
  EvpiParams p = EvpiParams::zeros(shape);
  const TensorList params = p.tensors();
  randomize(params, rng);
  LossFunction loss = [&](const TensorList* grads) {
    if (!grads) return fn(p, data.sets, nullptr);
    EvpiParams g = EvpiParams::zeros(shape);
    const double value = fn(p, data.sets, &g);
    accumulate(g.tensors(), grads);
    return value;
  };
  return grad_check(loss, params, probes, rng).max_relative_error;
}

double check_neural_baseline(Rng& rng, std::size_t probes, NeuralVariant variant) {
  ToyData data;
  make_toy_data(data, rng);
  const NeuralShape shape{kEmbedDim, kHidden, kFfHidden, 10};
  NeuralBaselineParams p = NeuralBaselineParams::zeros(variant, shape);
  const TensorList params = p.tensors();
  randomize(params, rng);
  LossFunction loss = [&](const TensorList* grads) {
    double total = 0.0;
    if (!grads) {
      for (const auto& s : data.sets) total += neural_baseline_loss(p, s);
      return total;
    }
    NeuralBaselineParams g = NeuralBaselineParams::zeros(variant, shape);
    for (const auto& s : data.sets) total += neural_baseline_loss(p, s, &g);
    accumulate(g.tensors(), grads);
    return total;
  };
  return grad_check(loss, params, probes, rng).max_relative_error;
}

}  // namespace

std::vector<GradSuiteEntry> run_gradient_suite(std::uint64_t seed, std::size_t draws, std::size_t probes) {
  const Rng root(seed);
  using Check = std::function<double(Rng&)>;
  const std::vector<std::pair<std::string, Check>> checks = {
      {"lstm_encoder", [&](Rng& r) { return check_lstm(r, probes); }},
      {"answer_net", [&](Rng& r) { return check_feedforward(r, probes, 2 * kHidden, 5, kEmbedDim); }},
      {"utility_net", [&](Rng& r) { return check_feedforward(r, probes, 3 * kHidden, 5, 1); }},
      {"baseline_net", [&](Rng& r) { return check_feedforward(r, probes, 3 * kHidden, 10, 1); }},
      {"loss_ans",
       [&](Rng& r) {
         return check_evpi(r, probes, [](const EvpiParams& p, std::span<const PreparedCandidateSet> sets,
                                         EvpiParams* g) { return loss_ans(p, sets[0], {}, g); });
       }},
      {"loss_ans_unclamped",
       [&](Rng& r) {
         return check_evpi(r, probes, [](const EvpiParams& p, std::span<const PreparedCandidateSet> sets,
                                         EvpiParams* g) { return loss_ans(p, sets[1], {false}, g); });
       }},
      {"loss_util",
       [&](Rng& r) {
         return check_evpi(r, probes, [](const EvpiParams& p, std::span<const PreparedCandidateSet> sets,
                                         EvpiParams* g) { return utility_loss(p, sets[0], g); });
       }},
      {"joint_loss",
       [&](Rng& r) {
         return check_evpi(r, probes, [](const EvpiParams& p, std::span<const PreparedCandidateSet> sets,
                                         EvpiParams* g) { return joint_loss(p, sets, {}, g); });
       }},
      {"neural_pq", [&](Rng& r) { return check_neural_baseline(r, probes, NeuralVariant::pq); }},
      {"neural_pa", [&](Rng& r) { return check_neural_baseline(r, probes, NeuralVariant::pa); }},
      {"neural_pqa", [&](Rng& r) { return check_neural_baseline(r, probes, NeuralVariant::pqa); }},
  };
  std::vector<GradSuiteEntry> out;
  for (const auto& [name, check] : checks) {
    GradSuiteEntry e{name, draws, 0.0};
    for (std::size_t d = 0; d < draws; ++d) {
      Rng rng = root.substream(name, d);
      e.max_relative_error = std::max(e.max_relative_error, check(rng));
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace evpirank
