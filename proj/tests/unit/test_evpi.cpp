#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "evpirank/error.hpp"
#include "evpirank/evpi.hpp"
#include "evpirank/optim.hpp"

namespace evpirank {
namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

// Two-dimensional word vectors chosen so every similarity below is a round
// number: cos(qa, qb) = 1/sqrt2, cos(qa, qneg) = -1.
EmbeddingTable toy_table() {
  return EmbeddingTable::from_rows(2, {{"post", {0.3, 0.4}},
                                       {"qa", {1.0, 0.0}},
                                       {"qb", {1.0, 1.0}},
                                       {"qneg", {-1.0, 0.0}},
                                       {"ax", {1.0, 1.0}},
                                       {"ay", {-1.0, 0.0}},
                                       {"az", {0.0, 1.0}}});
}

CandidateSet toy_set(const std::string& id = "t") {
  CandidateSet s;
  s.post_id = id;
  s.post_body = "post";
  s.questions = {"qa?", "qb?", "qneg?"};
  s.answers = {"ax", "ay", "az"};
  s.source_post_ids = {id + "0", id + "1", id + "2"};
  s.original_index = 0;
  return s;
}

const EvpiShape kToyShape{2, 2, 3, 1};

// With every weight zero the answer net outputs its final bias and the
// utility net outputs sigmoid(final bias), whatever the texts.
EvpiParams fixed_output_params(const Vector& answer_rep, double utility_logit) {
  EvpiParams p = EvpiParams::zeros(kToyShape);
  for (std::size_t k = 0; k < answer_rep.size(); ++k) p.answer_net.biases.back()(k, 0) = answer_rep[k];
  p.utility_net.biases.back()(0, 0) = utility_logit;
  return p;
}

// ---- scalar pieces --------------------------------------------------------

TEST(Dist, Directions) {
  EXPECT_NEAR(dist(Vector{2.0, 1.0}, Vector{4.0, 2.0}), 0.0, 1e-15);
  EXPECT_EQ(dist(Vector{1.0, 0.0}, Vector{0.0, 3.0}), 1.0);
  EXPECT_NEAR(dist(Vector{1.0, 2.0}, Vector{-1.0, -2.0}), 2.0, 1e-15);
  EXPECT_EQ(dist(Vector{0.0, 0.0}, Vector{1.0, 2.0}), 1.0);
  EXPECT_THROW(dist(Vector{1.0}, Vector{1.0, 2.0}), ShapeError);
}

TEST(Dist, GradientMatchesFiniteDifferences) {
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    Vector r(4), a(4);
    for (double& x : r) x = rng.uniform(-1, 1);
    for (double& x : a) x = rng.uniform(-1, 1);
    const Vector g = dist_gradient(r, a);
    for (std::size_t k = 0; k < 4; ++k) {
      Vector hi = r, lo = r;
      hi[k] += 1e-6;
      lo[k] -= 1e-6;
      EXPECT_NEAR(g[k], (dist(hi, a) - dist(lo, a)) / 2e-6, 1e-7);
    }
  }
  EXPECT_EQ(dist_gradient(Vector{0.0, 0.0}, Vector{1.0, 1.0}), Vector(2, 0.0));
}

TEST(AnswerProb, ScalarCases) {
  EXPECT_EQ(answer_prob_value(0.0, 1.0), 1.0);
  EXPECT_EQ(answer_prob_value(0.3, 0.0), 0.0);
  EXPECT_EQ(answer_prob_value(0.3, -0.7), 0.0);
  EXPECT_NEAR(answer_prob_value(1.0, 1.0), 0.36788, 1e-5);
  EXPECT_NEAR(answer_prob_value(0.0, -0.5, false), -0.5, 1e-15);
  EXPECT_EQ(similarity_weight(-0.2, true), 0.0);
  EXPECT_EQ(similarity_weight(-0.2, false), -0.2);
}

TEST(AnswerProb, StaysInUnitIntervalUnderFuzzing) {
  Rng rng(12);
  for (int trial = 0; trial < 100000; ++trial) {
    const double p = answer_prob_value(rng.uniform(0.0, 2.0), rng.uniform(-1.0, 1.0));
    ASSERT_GE(p, 0.0);
    ASSERT_LE(p, 1.0);
  }
}

TEST(LossUtil, BinaryCrossEntropy) {
  EXPECT_NEAR(loss_util(1, 1.0), 0.0, 1e-11);
  EXPECT_NEAR(loss_util(0, 0.5), 0.69315, 1e-5);
  EXPECT_NEAR(loss_util(1, 0.5), std::log(2.0), 1e-15);
  EXPECT_NEAR(loss_util(1, 0.0), -std::log(1e-12), 1e-9);
  EXPECT_NEAR(loss_util(0, 1.0), -std::log(1e-12), 1e-3);
}

TEST(ExpectedValue, HandExample) {
  const Vector probs{0.3, 0.2, 0, 0, 0, 0, 0, 0, 0, 0};
  const Vector utils{0.5, 1.0, 0.9, 0.1, 0.7, 0.3, 0.2, 0.8, 0.6, 0.4};
  EXPECT_NEAR(expected_value(probs, utils), 0.35, 1e-9);
}

TEST(ExpectedValue, ArgsortInvariantUnderPositiveScaling) {
  Rng rng(21);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 10;
    std::vector<Vector> probs(n, Vector(n));
    Vector utils(n);
    for (auto& row : probs) {
      for (double& x : row) x = rng.uniform();
    }
    for (double& u : utils) u = rng.uniform();
    const double c = std::exp(rng.uniform(-5.0, 5.0));
    Vector scaled = utils;
    for (double& u : scaled) u *= c;
    Vector base_scores(n), util_scores(n), prob_scores(n);
    for (std::size_t i = 0; i < n; ++i) {
      base_scores[i] = expected_value(probs[i], utils);
      util_scores[i] = expected_value(probs[i], scaled);
      Vector p = probs[i];
      for (double& x : p) x *= c;
      prob_scores[i] = expected_value(p, utils);
    }
    const auto base = rank_by_scores("p", "m", base_scores).order;
    EXPECT_EQ(rank_by_scores("p", "m", util_scores).order, base);
    EXPECT_EQ(rank_by_scores("p", "m", prob_scores).order, base);
  }
}

// ---- model pieces on the hand toy -----------------------------------------

TEST(EvpiParams, ShapesFollowTheEncoders) {
  Rng rng(1);
  EvpiParams p = EvpiParams::initialized(EvpiShape{7, 5, 6, 5}, rng);
  EXPECT_EQ(p.answer_net.input_dim(), 10u);
  EXPECT_EQ(p.answer_net.output_dim(), 7u);
  EXPECT_EQ(p.answer_net.hidden_layers(), 5u);
  EXPECT_EQ(p.utility_net.input_dim(), 15u);
  EXPECT_EQ(p.utility_net.output_dim(), 1u);
  EXPECT_EQ(p.utility_net.hidden_layers(), 5u);
  for (const auto& t : p.tensors()) {
    const bool known = t.name.starts_with("post_lstm.") || t.name.starts_with("question_lstm.") ||
                       t.name.starts_with("answer_lstm.") || t.name.starts_with("answer_net.") ||
                       t.name.starts_with("utility_net.");
    EXPECT_TRUE(known) << t.name;
  }
}

TEST(EvpiModel, ZeroParamsGiveBiasOutputs) {
  const auto table = toy_table();
  const auto set = prepare_candidate_set(table, toy_set());
  const EvpiParams p = fixed_output_params({0.25, -0.5}, 0.0);
  EXPECT_EQ(answer_representation(p, set.post, set.questions[1]), (Vector{0.25, -0.5}));
  EXPECT_EQ(utility(p, set.post, set.questions[0], set.answers[0]), 0.5);
  EXPECT_EQ(answer_representation(p, set.post, set.questions[2]),
            answer_representation(p, set.post, set.questions[2]));
}

TEST(EvpiModel, UtilityIncreasesWithFinalBias) {
  const auto table = toy_table();
  const auto set = prepare_candidate_set(table, toy_set());
  double previous = 0.0;
  for (double b : {-3.0, -1.0, 0.0, 0.5, 2.0}) {
    const double u = utility(fixed_output_params({1.0, 0.0}, b), set.post, set.questions[1], set.answers[1]);
    EXPECT_GT(u, previous);
    previous = u;
  }
}

TEST(EvpiModel, AnswerLossHandValue) {
  const auto table = toy_table();
  const auto set = prepare_candidate_set(table, toy_set());
  const EvpiParams p = fixed_output_params({1.0, 0.0}, 0.0);
  // own answer: dist 1 - 1/sqrt2; "ay" weighted 1/sqrt2 at dist 2; "az" weight 0
  EXPECT_NEAR(loss_ans(p, set), 1.0 + kInvSqrt2, 1e-12);
  // unclamped, "az" adds weight -1 at dist 1
  EXPECT_NEAR(loss_ans(p, set, {false}), kInvSqrt2, 1e-12);
  EXPECT_NEAR(answer_prob(p, set.post, set.questions[0], set.answers[1], set.questions[1]),
              std::exp(-2.0) * kInvSqrt2, 1e-12);
}

TEST(EvpiModel, AnswerLossCollapsesToDoubleOwnTermForDuplicateCandidate) {
  const auto table = toy_table();
  CandidateSet s = toy_set();
  s.questions = {"qa?", "qa?"};
  s.answers = {"ax", "ax"};
  s.source_post_ids = {"a", "b"};
  const auto set = prepare_candidate_set(table, s);
  const EvpiParams p = fixed_output_params({1.0, 0.0}, 0.0);
  EXPECT_NEAR(loss_ans(p, set), 2.0 * (1.0 - kInvSqrt2), 1e-12);
}

TEST(EvpiModel, OrthogonalCandidatesLeaveOnlyTheOwnTerm) {
  const auto table = toy_table();
  CandidateSet s = toy_set();
  s.questions = {"qa?", "qneg?", "az?"};
  const auto set = prepare_candidate_set(table, s);
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const EvpiParams p = EvpiParams::initialized(kToyShape, rng);
    const Vector rep = answer_representation(p, set.post, set.questions[0]);
    const double own = dist(rep, set.answers[0].avg.values);
    EXPECT_NEAR(loss_ans(p, set), own, 1e-12);
    EXPECT_GE(loss_ans(p, set), 0.0);
  }
}

TEST(EvpiModel, UtilityLossAndPostLoss) {
  const auto table = toy_table();
  const auto set = prepare_candidate_set(table, toy_set());
  const EvpiParams zero = fixed_output_params({1.0, 0.0}, 0.0);
  EXPECT_NEAR(utility_loss(zero, set), 3.0 * std::log(2.0), 1e-12);
  const EvpiParams biased = fixed_output_params({1.0, 0.0}, 1.3);
  const double u = 1.0 / (1.0 + std::exp(-1.3));
  const double bce = -std::log(u) - 2.0 * std::log(1.0 - u);
  EXPECT_NEAR(utility_loss(biased, set), bce, 1e-12);
  EXPECT_NEAR(post_loss(biased, set), 1.0 + kInvSqrt2 + bce, 1e-12);
}

TEST(EvpiModel, JointLossIsAdditive) {
  const auto table = toy_table();
  CandidateSet second = toy_set("u");
  second.original_index = 1;
  const std::vector<PreparedCandidateSet> batch{prepare_candidate_set(table, toy_set()),
                                                prepare_candidate_set(table, second)};
  Rng rng(4);
  const EvpiParams p = EvpiParams::initialized(kToyShape, rng);
  EXPECT_EQ(joint_loss(p, {}), 0.0);
  EXPECT_NEAR(joint_loss(p, batch), post_loss(p, batch[0]) + post_loss(p, batch[1]), 1e-12);
}

TEST(EvpiModel, ScoresAreExpectedUtilities) {
  const auto table = toy_table();
  const auto set = prepare_candidate_set(table, toy_set());
  const EvpiParams p = fixed_output_params({1.0, 0.0}, 0.4);
  const double u = 1.0 / (1.0 + std::exp(-0.4));
  // question 0: own answer at weight 1, "ay" at weight 1/sqrt2, "az" at weight 0
  const double expected0 = u * (std::exp(-(1.0 - kInvSqrt2)) + kInvSqrt2 * std::exp(-2.0));
  EXPECT_NEAR(evpi_score(p, set, 0), expected0, 1e-12);
  const auto scores = evpi_scores(p, set);
  ASSERT_EQ(scores.size(), 3u);
  EXPECT_EQ(scores[0], evpi_score(p, set, 0));
  for (double s : scores) EXPECT_GE(s, 0.0);
  EXPECT_THROW(evpi_score(p, set, 3), UsageError);
}

TEST(EvpiModel, TinyUtilitiesGiveTinyScores) {
  const auto table = toy_table();
  const auto set = prepare_candidate_set(table, toy_set());
  for (double s : evpi_scores(fixed_output_params({1.0, 0.0}, -40.0), set)) EXPECT_LT(s, 1e-15);
}

TEST(EvpiModel, AnswerProbabilitiesStayInUnitInterval) {
  const auto table = toy_table();
  const auto set = prepare_candidate_set(table, toy_set());
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    EvpiParams p = EvpiParams::zeros(kToyShape);
    for (const auto& t : p.tensors()) {
      for (double& v : t.tensor->values()) v = rng.uniform(-2.0, 2.0);
    }
    for (std::size_t i = 0; i < set.size(); ++i) {
      for (std::size_t j = 0; j < set.size(); ++j) {
        const double prob = answer_prob(p, set.post, set.questions[i], set.answers[j], set.questions[j]);
        EXPECT_GE(prob, 0.0);
        EXPECT_LE(prob, 1.0);
      }
    }
  }
}

// ---- ranking --------------------------------------------------------------

TEST(RankQuestions, EqualScoresKeepIndexOrder) {
  const auto table = toy_table();
  CandidateSet s = toy_set();
  s.questions = {"qa?", "qa?", "qa?"};
  s.answers = {"ax", "ax", "ax"};
  const auto set = prepare_candidate_set(table, s);
  Rng rng(5);
  const auto list = rank_questions(EvpiParams::initialized(kToyShape, rng), set);
  EXPECT_EQ(list.order, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(list.post_id, "t");
}

TEST(RankQuestions, MatchesBruteForceArgsort) {
  Rng rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> scores(10);
    for (double& s : scores) s = rng.uniform(-1.0, 1.0);
    const auto order = rank_by_scores("p", "m", scores).order;
    std::vector<bool> used(10, false);
    for (std::size_t r = 0; r < 10; ++r) {
      std::size_t best = 10;
      for (std::size_t i = 0; i < 10; ++i) {
        if (!used[i] && (best == 10 || scores[i] > scores[best])) best = i;
      }
      used[best] = true;
      EXPECT_EQ(order[r], best);
    }
  }
}

TEST(RankQuestions, DeterministicAndScoresNonIncreasing) {
  const auto table = toy_table();
  const auto set = prepare_candidate_set(table, toy_set());
  Rng rng(8);
  const EvpiParams p = EvpiParams::initialized(kToyShape, rng);
  const auto a = rank_questions(p, set);
  const auto b = rank_questions(p, set);
  EXPECT_EQ(a.order, b.order);
  EXPECT_EQ(a.scores, b.scores);
  for (std::size_t r = 1; r < a.scores.size(); ++r) EXPECT_LE(a.scores[r], a.scores[r - 1]);
}

TEST(RankByScores, NanThrows) {
  const std::vector<double> scores{0.1, std::nan("")};
  EXPECT_THROW(rank_by_scores("p", "m", scores), NumericError);
}

// ---- optimisation sanity --------------------------------------------------

TEST(EvpiTraining, FiftyAdamStepsReduceTheJointLoss) {
  const auto table = toy_table();
  CandidateSet second = toy_set("u");
  second.original_index = 2;
  const std::vector<PreparedCandidateSet> batch{prepare_candidate_set(table, toy_set()),
                                                prepare_candidate_set(table, second)};
  Rng rng(10);
  EvpiParams p = EvpiParams::initialized(kToyShape, rng);
  const double start = joint_loss(p, batch);
  const TensorList params = p.tensors();
  AdamState state = AdamState::for_params(params);
  for (int step = 0; step < 50; ++step) {
    EvpiParams g = EvpiParams::zeros(kToyShape);
    joint_loss(p, batch, {}, &g);
    adam_step(params, g.tensors(), state, AdamConfig{0.01});
  }
  EXPECT_LT(joint_loss(p, batch), start);
}

// ---- ranker wrapper -------------------------------------------------------

TEST(EvpiRanker, MetaRoundTripRebuildsShapes) {
  Rng rng(11);
  EvpiRanker r(EvpiParams::initialized(EvpiShape{3, 4, 5, 2}, rng), EvpiOptions{false});
  const auto meta = r.checkpoint_meta();
  const auto rebuilt = EvpiRanker::from_meta(meta);
  EXPECT_EQ(rebuilt->options().clamp_negative_sim, false);
  EXPECT_EQ(rebuilt->params().shape.ff_layers, 2u);
  const auto a = r.parameters();
  const auto b = rebuilt->parameters();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].name, b[i].name);
    EXPECT_TRUE(a[i].tensor->same_shape(*b[i].tensor));
  }
  auto bad = meta;
  bad.erase("hidden_dim");
  EXPECT_THROW(EvpiRanker::from_meta(bad), FormatError);
}

}  // namespace
}  // namespace evpirank
