#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "evpirank/feedforward.hpp"
#include "evpirank/lstm.hpp"
#include "evpirank/prepared.hpp"
#include "evpirank/ranking.hpp"
#include "evpirank/rng.hpp"

namespace evpirank {

enum class FfInit { uniform, glorot };

struct EvpiShape {
  std::size_t embed_dim = 50;
  std::size_t hidden_dim = 100;     // LSTM state width
  std::size_t ff_hidden_dim = 100;  // width of the feedforward hidden layers
  std::size_t ff_layers = 5;        // hidden layers per feedforward net
};

struct EvpiOptions {
  // Negative question similarities count as 0 in answer probabilities and in
  // the answer loss weights.
  bool clamp_negative_sim = true;
};

// Three LSTM encoders (post, question, answer) plus the answer-representation
// net (post+question -> embedding space) and the utility net
// (post+question+answer -> logit).
struct EvpiParams {
  EvpiShape shape;
  LstmParams post_encoder;
  LstmParams question_encoder;
  LstmParams answer_encoder;
  FeedForwardParams answer_net;
  FeedForwardParams utility_net;

  static EvpiParams zeros(const EvpiShape& shape);
  static EvpiParams initialized(const EvpiShape& shape, Rng& rng, FfInit ff_init = FfInit::glorot);

  TensorList tensors();
};

// 1 - cos_sim(rep, a_hat), in [0, 2].
double dist(std::span<const double> rep, std::span<const double> a_hat);

// d dist / d rep; zero when either vector has zero norm.
Vector dist_gradient(std::span<const double> rep, std::span<const double> a_hat);

double similarity_weight(double cosine, bool clamp_negative);

// exp(-distance) * weight(question_similarity)
double answer_prob_value(double distance, double question_similarity, bool clamp_negative = true);

// Two-term binary cross-entropy with u clamped to [1e-12, 1 - 1e-12].
double loss_util(int y, double u);

// Sum of probs[j] * utils[j].
double expected_value(std::span<const double> probs, std::span<const double> utils);

Vector answer_representation(const EvpiParams& params, const PreparedText& post, const PreparedText& question);

double answer_prob(const EvpiParams& params, const PreparedText& post, const PreparedText& question_i,
                   const PreparedText& answer_j, const PreparedText& question_j, const EvpiOptions& options = {});

double utility(const EvpiParams& params, const PreparedText& post, const PreparedText& question_j,
               const PreparedText& answer_j);

// Answer loss of a post against its candidate set: distance to its own
// answer plus similarity-weighted distances to the other candidates' answers.
double loss_ans(const EvpiParams& params, const PreparedCandidateSet& set, const EvpiOptions& options = {},
                EvpiParams* grads = nullptr);

// Utility BCE summed over the set; the original candidate is the only
// positive.
double utility_loss(const EvpiParams& params, const PreparedCandidateSet& set, EvpiParams* grads = nullptr);

// loss_ans + utility_loss for one post.
double post_loss(const EvpiParams& params, const PreparedCandidateSet& set, const EvpiOptions& options = {},
                 EvpiParams* grads = nullptr);

double joint_loss(const EvpiParams& params, std::span<const PreparedCandidateSet> batch,
                  const EvpiOptions& options = {}, EvpiParams* grads = nullptr);

// Expected utility of asking each candidate question.
std::vector<double> evpi_scores(const EvpiParams& params, const PreparedCandidateSet& set,
                                const EvpiOptions& options = {});

double evpi_score(const EvpiParams& params, const PreparedCandidateSet& set, std::size_t question,
                  const EvpiOptions& options = {});

RankedList rank_questions(const EvpiParams& params, const PreparedCandidateSet& set, const EvpiOptions& options = {});

class EvpiRanker : public TrainableRanker {
 public:
  EvpiRanker(EvpiParams params, EvpiOptions options) : params_(std::move(params)), options_(options) {}

  static std::unique_ptr<EvpiRanker> from_meta(const std::map<std::string, std::string>& meta);

  std::string name() const override { return "evpi"; }
  std::vector<double> candidate_scores(const PreparedCandidateSet& set) const override;
  std::unique_ptr<TrainableRanker> clone() const override;
  TensorList parameters() override { return params_.tensors(); }
  double example_loss(const PreparedCandidateSet& set, TrainableRanker* grads) const override;
  std::map<std::string, std::string> checkpoint_meta() const override;

  const EvpiParams& params() const { return params_; }
  EvpiParams& params() { return params_; }
  const EvpiOptions& options() const { return options_; }

 private:
  EvpiParams params_;
  EvpiOptions options_;
};

}  // namespace evpirank
