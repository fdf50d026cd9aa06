#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "evpirank/evpi.hpp"
#include "evpirank/metrics.hpp"
#include "evpirank/prepared.hpp"
#include "evpirank/ranking.hpp"

namespace evpirank {

// ---- Random ---------------------------------------------------------------

// Metrics of uniformly random orderings, averaged over n_perm permutations
// per post. Each post draws from its own stream (seed, post id), so results
// do not depend on input order.
std::vector<PostMetrics> random_rank_post_metrics(std::span<const CandidateSet> sets, std::span<const LabelSet> labels,
                                                  std::size_t n_perm, std::uint64_t seed);

MetricReport random_rank_metrics(std::span<const CandidateSet> sets, std::span<const LabelSet> labels,
                                 std::size_t n_perm, std::uint64_t seed);

// One random permutation per post, reproducible from (seed, post id).
class RandomRanker : public Ranker {
 public:
  explicit RandomRanker(std::uint64_t seed) : seed_(seed) {}
  std::string name() const override { return "random"; }
  std::vector<double> candidate_scores(const PreparedCandidateSet& set) const override;

 private:
  std::uint64_t seed_;
};

// ---- Bag of n-grams -------------------------------------------------------

inline constexpr std::size_t kNgramHashBits = 20;
inline constexpr std::size_t kNgramHashSize = std::size_t{1} << kNgramHashBits;
inline constexpr std::size_t kNgramBiasFeature = kNgramHashSize;  // always-on feature
inline constexpr std::size_t kNgramWeightCount = kNgramHashSize + 1;

// Sparse feature vector sorted by feature id; values are counts.
using SparseFeatures = std::vector<std::pair<std::uint32_t, double>>;

// Hashed cross-product features: every n-gram (n <= max_n) of one text paired
// with every n-gram of another, for (post, question), (question, answer) and
// (post, answer), plus the bias feature.
SparseFeatures ngram_features(std::span<const std::string> post, std::span<const std::string> question,
                              std::span<const std::string> answer, std::size_t max_n = 3);

double sparse_dot(std::span<const double> weights, const SparseFeatures& x);

struct HingeConfig {
  std::size_t epochs = 10;
  double lr = 0.1;
  std::uint64_t seed = 0;
};

// Sub-gradient descent on max(0, 1 - y w.x) with y in {-1, +1}, visiting the
// examples in a fresh shuffled order every epoch. Throws UsageError unless
// both classes are present.
std::vector<double> train_hinge(std::span<const SparseFeatures> xs, std::span<const int> ys, const HingeConfig& config);

double hinge_loss(std::span<const double> weights, std::span<const SparseFeatures> xs, std::span<const int> ys);

class NgramRanker : public Ranker {
 public:
  NgramRanker() : weights_(kNgramWeightCount, 1, 0.0) {}
  explicit NgramRanker(DenseMatrix weights);

  std::string name() const override { return "ngrams"; }
  std::vector<double> candidate_scores(const PreparedCandidateSet& set) const override;

  TensorList parameters() { return {{"ngram.w", &weights_}}; }
  const DenseMatrix& weights() const { return weights_; }

 private:
  DenseMatrix weights_;
};

// Positive: each post's original (q, a); negatives: the other candidates.
NgramRanker ngram_train(std::span<const PreparedCandidateSet> sets, const HingeConfig& config);

// ---- Community QA style logistic regression -------------------------------

inline constexpr std::size_t kCqaFeatureCount = 6;
using CqaFeatures = std::array<double, kCqaFeatureCount>;

// [cos(post avg, question avg), question-token overlap with the post,
//  question-bigram overlap, |q| / |p|, question-word count, contains "you"]
CqaFeatures cqa_features(const PreparedText& post, const PreparedText& question);

const std::vector<std::string>& question_words();

struct LogisticConfig {
  std::size_t epochs = 200;
  double lr = 0.1;
};

// Full-batch gradient descent on mean log loss. Returns kCqaFeatureCount
// weights followed by the bias. Constant features add a message to
// `warnings`; a single class throws UsageError.
std::vector<double> train_logistic(std::span<const CqaFeatures> xs, std::span<const int> ys,
                                   const LogisticConfig& config, std::vector<std::string>* warnings = nullptr);

double logistic_score(std::span<const double> weights, const CqaFeatures& x);

class CqaRanker : public Ranker {
 public:
  CqaRanker() : weights_(kCqaFeatureCount + 1, 1, 0.0) {}
  explicit CqaRanker(DenseMatrix weights);

  std::string name() const override { return "cqa"; }
  std::vector<double> candidate_scores(const PreparedCandidateSet& set) const override;

  TensorList parameters() { return {{"cqa.w", &weights_}}; }
  const DenseMatrix& weights() const { return weights_; }

 private:
  DenseMatrix weights_;
};

// Trained on (post, question) pairs only; answers are ignored.
CqaRanker cqa_train(std::span<const PreparedCandidateSet> sets, const LogisticConfig& config,
                    std::vector<std::string>* warnings = nullptr);

// ---- Neural baselines -----------------------------------------------------

enum class NeuralVariant { pq, pa, pqa };

std::string_view to_string(NeuralVariant variant);

struct NeuralShape {
  std::size_t embed_dim = 50;
  std::size_t hidden_dim = 100;
  std::size_t ff_hidden_dim = 100;
  std::size_t ff_layers = 10;
};

// LSTM encoders for the inputs the variant uses, feeding one feedforward net
// with a scalar logit output.
struct NeuralBaselineParams {
  NeuralVariant variant = NeuralVariant::pqa;
  NeuralShape shape;
  LstmParams post_encoder;
  LstmParams question_encoder;  // unused (empty) for pa
  LstmParams answer_encoder;    // unused (empty) for pq
  FeedForwardParams net;

  bool uses_question() const { return variant != NeuralVariant::pa; }
  bool uses_answer() const { return variant != NeuralVariant::pq; }

  static NeuralBaselineParams zeros(NeuralVariant variant, const NeuralShape& shape);
  static NeuralBaselineParams initialized(NeuralVariant variant, const NeuralShape& shape, Rng& rng,
                                          FfInit ff_init = FfInit::glorot);

  TensorList tensors();
};

// BCE over the set with the original candidate as the only positive.
double neural_baseline_loss(const NeuralBaselineParams& params, const PreparedCandidateSet& set,
                            NeuralBaselineParams* grads = nullptr);

// Predicted probability that each candidate is the positive one.
std::vector<double> neural_baseline_scores(const NeuralBaselineParams& params, const PreparedCandidateSet& set);

class NeuralBaselineRanker : public TrainableRanker {
 public:
  explicit NeuralBaselineRanker(NeuralBaselineParams params) : params_(std::move(params)) {}

  static std::unique_ptr<NeuralBaselineRanker> from_meta(NeuralVariant variant,
                                                         const std::map<std::string, std::string>& meta);

  std::string name() const override;
  std::vector<double> candidate_scores(const PreparedCandidateSet& set) const override;
  std::unique_ptr<TrainableRanker> clone() const override;
  TensorList parameters() override { return params_.tensors(); }
  double example_loss(const PreparedCandidateSet& set, TrainableRanker* grads) const override;
  std::map<std::string, std::string> checkpoint_meta() const override;

  const NeuralBaselineParams& params() const { return params_; }
  NeuralBaselineParams& params() { return params_; }

 private:
  NeuralBaselineParams params_;
};

}  // namespace evpirank
