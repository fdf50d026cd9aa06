#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "evpirank/error.hpp"
#include "evpirank/metrics.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

namespace evpirank {
namespace {

using Idx = std::vector<std::size_t>;

// ---- p@k and AP -----------------------------------------------------------

TEST(PrecisionAtK, HandCases) {
  const Idx order{4, 2, 7, 0, 1};
  EXPECT_EQ(precision_at_k(order, Idx{4}, 1), 1.0);
  EXPECT_DOUBLE_EQ(precision_at_k(order, Idx{2, 7}, 3), 2.0 / 3.0);
  EXPECT_EQ(precision_at_k(order, Idx{0, 1}, 3), 0.0);
  EXPECT_DOUBLE_EQ(precision_at_k(order, Idx{4}, 5), 0.2);
}

TEST(AveragePrecision, HandCases) {
  const Idx order{4, 2, 7, 0, 1};
  EXPECT_EQ(average_precision(order, Idx{4}), 1.0);
  EXPECT_EQ(average_precision(order, Idx{2}), 0.5);
  EXPECT_NEAR(average_precision(order, Idx{4, 7}), 0.8333333333, 1e-9);
  EXPECT_THROW(average_precision(order, Idx{}), UsageError);
}

TEST(MeanAveragePrecision, SkipsEmptyLabelSets) {
  const Idx order{0, 1, 2};
  const Idx rel_a{0}, rel_b{1}, none{};
  const std::vector<RankingWithLabels> items{{order, rel_a}, {order, none}, {order, rel_b}};
  std::size_t skipped = 0;
  EXPECT_DOUBLE_EQ(mean_average_precision(items, &skipped), 0.75);
  EXPECT_EQ(skipped, 1u);
}

TEST(Metrics, AgreeWithBruteForceOnRandomInstances) {
  Rng rng(31);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto inst = testing::random_ranking_instance(rng);
    for (std::size_t k = 1; k <= 10; ++k) {
      ASSERT_NEAR(precision_at_k(inst.order, inst.relevant, k),
                  testing::oracle_precision_at_k(inst.order, inst.relevant, k), 1e-12);
    }
    ASSERT_NEAR(average_precision(inst.order, inst.relevant),
                testing::oracle_average_precision(inst.order, inst.relevant), 1e-12);
    const double ap = average_precision(inst.order, inst.relevant);
    EXPECT_GE(ap, 0.0);
    EXPECT_LE(ap, 1.0);
  }
}

TEST(Metrics, MapIsOneExactlyWhenRelevantItemsLead) {
  Rng rng(32);
  for (int trial = 0; trial < 500; ++trial) {
    const auto inst = testing::random_ranking_instance(rng);
    bool leading = true;
    for (std::size_t r = 0; r < inst.relevant.size(); ++r) {
      leading = leading && std::find(inst.relevant.begin(), inst.relevant.end(), inst.order[r]) != inst.relevant.end();
    }
    EXPECT_EQ(average_precision(inst.order, inst.relevant) == 1.0, leading);
  }
}

// ---- label sets -----------------------------------------------------------

Annotation ann(const std::string& post, const std::string& who, std::size_t best, Idx valid) {
  return Annotation{post, who, best, std::move(valid)};
}

TEST(LabelSets, AnnotationModes) {
  auto sets = testing::eval_candidate_sets(2, 1);
  sets[0].original_index = 2;
  sets[1].original_index = 4;
  const std::vector<Annotation> anns{
      ann(sets[0].post_id, "a", 2, {1, 2, 3}), ann(sets[0].post_id, "b", 7, {2, 3, 5, 7}),
      ann(sets[1].post_id, "a", 4, {4}),       ann(sets[1].post_id, "b", 4, {0, 4}),
  };
  const auto best = build_labelsets(anns, sets, LabelMode::best_union, LabelMode::best_union);
  ASSERT_EQ(best.size(), 2u);
  EXPECT_EQ(best[0].relevant, (Idx{2, 7}));
  EXPECT_EQ(best[1].relevant, (Idx{4}));

  const auto valid = build_labelsets(anns, sets, LabelMode::valid_intersection, LabelMode::best_union);
  EXPECT_EQ(valid[0].relevant, (Idx{2, 3}));

  LabelBuildReport report;
  const auto excl = build_labelsets(anns, sets, LabelMode::exclude_original, LabelMode::best_union, &report);
  ASSERT_EQ(excl.size(), 1u);
  EXPECT_EQ(excl[0].relevant, (Idx{7}));
  EXPECT_EQ(excl[0].excluded, 2u);
  EXPECT_EQ(report.dropped_empty, 1u);

  const auto orig = build_labelsets({}, sets, LabelMode::original, LabelMode::best_union);
  EXPECT_EQ(orig[1].relevant, (Idx{4}));
}

TEST(LabelSets, EmptyIntersectionIsDroppedAndCounted) {
  const auto sets = testing::eval_candidate_sets(1, 2);
  const std::vector<Annotation> anns{ann(sets[0].post_id, "a", 1, {1}), ann(sets[0].post_id, "b", 2, {2})};
  LabelBuildReport report;
  EXPECT_TRUE(build_labelsets(anns, sets, LabelMode::valid_intersection, LabelMode::best_union, &report).empty());
  EXPECT_EQ(report.dropped_empty, 1u);
}

TEST(LabelSets, NeedExactlyTwoAnnotators) {
  const auto sets = testing::eval_candidate_sets(1, 3);
  const std::vector<Annotation> one{ann(sets[0].post_id, "a", 1, {1})};
  EXPECT_THROW(build_labelsets(one, sets, LabelMode::best_union, LabelMode::best_union), UsageError);
  EXPECT_THROW(build_labelsets(one, sets, LabelMode::exclude_original, LabelMode::original), UsageError);
}

TEST(LabelSets, UnionNeverLowersPrecisionAtOne) {
  Rng rng(33);
  const auto sets = testing::eval_candidate_sets(50, 4);
  std::vector<Annotation> anns, first_only;
  std::vector<RankedList> rankings;
  for (const auto& s : sets) {
    const std::size_t b1 = rng.below(10), b2 = rng.below(10);
    anns.push_back(ann(s.post_id, "a", b1, {b1}));
    anns.push_back(ann(s.post_id, "b", b2, {b2}));
    first_only.push_back(ann(s.post_id, "a", b1, {b1}));
    first_only.push_back(ann(s.post_id, "b", b1, {b1}));
    std::vector<double> scores(10);
    for (double& x : scores) x = rng.uniform();
    rankings.push_back(rank_by_scores(s.post_id, "r", scores));
  }
  const auto u = evaluate(rankings, build_labelsets(anns, sets, LabelMode::best_union, LabelMode::best_union), "r", "u");
  const auto one =
      evaluate(rankings, build_labelsets(first_only, sets, LabelMode::best_union, LabelMode::best_union), "r", "1");
  EXPECT_GE(u.p_at_1, one.p_at_1);
}

TEST(Annotations, JsonValidation) {
  const auto a = annotation_from_json(R"({"post_id":"p","annotator_id":"x","best":3,"valid":[5,3]})");
  EXPECT_EQ(a.valid, (Idx{3, 5}));
  EXPECT_EQ(annotation_from_json(annotation_to_json(a)).best, 3u);
  EXPECT_THROW(annotation_from_json(R"({"post_id":"p","annotator_id":"x","best":3,"valid":[5]})"), FormatError);
  EXPECT_THROW(annotation_from_json(R"({"post_id":"p","annotator_id":"x","best":10,"valid":[10]})"), FormatError);
  EXPECT_THROW(annotation_from_json("not json"), FormatError);
}

TEST(LabelMode, NamesRoundTrip) {
  for (auto m : {LabelMode::best_union, LabelMode::valid_intersection, LabelMode::original,
                 LabelMode::exclude_original}) {
    EXPECT_EQ(label_mode_from_string(to_string(m)), m);
  }
  EXPECT_THROW(label_mode_from_string("bogus"), UsageError);
}

// ---- evaluation -----------------------------------------------------------

TEST(Evaluate, HandFixtureReport) {
  const auto f = testing::hand_eval_fixture();
  const auto labels = build_labelsets(f.annotations, f.sets, LabelMode::valid_intersection, LabelMode::best_union);
  ASSERT_EQ(labels.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(labels[i].relevant, f.relevant[i]);
  const auto r = evaluate(f.rankings, labels, "hand", "valid_intersection");
  EXPECT_EQ(r.n_posts, 5u);
  EXPECT_NEAR(r.p_at_1, 0.4, 1e-12);
  EXPECT_NEAR(r.p_at_3, 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(r.p_at_5, 0.32, 1e-12);
  EXPECT_NEAR(r.map, 77.0 / 120.0, 1e-12);
  EXPECT_EQ(r.to_table(),
            "model        mode                       n     p@1     p@3     p@5     MAP\n"
            "hand         valid_intersection         5   40.00   33.33   32.00   64.17\n");
  EXPECT_EQ(r.to_json().rfind(R"({"model":"hand","mode":"valid_intersection","n_posts":5,"p_at_1":0.4)", 0), 0u)
      << r.to_json();
}

TEST(Evaluate, PerfectRankerScoresOne) {
  const auto sets = testing::eval_candidate_sets(10, 5);
  const auto labels = testing::original_labels(sets);
  std::vector<RankedList> rankings;
  for (const auto& s : sets) {
    std::vector<double> scores(10, 0.0);
    scores[s.original_index] = 1.0;
    rankings.push_back(rank_by_scores(s.post_id, "perfect", scores));
  }
  const auto r = evaluate(rankings, labels, "perfect", "original");
  EXPECT_EQ(r.p_at_1, 1.0);
  EXPECT_EQ(r.map, 1.0);
}

TEST(Evaluate, InvariantToInputOrderAndMissingRankingThrows) {
  const auto f = testing::hand_eval_fixture();
  auto labels = build_labelsets(f.annotations, f.sets, LabelMode::valid_intersection, LabelMode::best_union);
  const auto a = evaluate(f.rankings, labels, "hand", "v");
  auto rankings = f.rankings;
  std::reverse(rankings.begin(), rankings.end());
  std::reverse(labels.begin(), labels.end());
  EXPECT_EQ(evaluate(rankings, labels, "hand", "v").to_json(), a.to_json());
  rankings.pop_back();
  EXPECT_THROW(evaluate(rankings, labels, "hand", "v"), UsageError);
}

TEST(Evaluate, ExcludedCandidateIsDroppedBeforeScoring) {
  LabelSet l{"p", {3}, LabelMode::exclude_original, 5};
  const auto m = score_post(Idx{5, 3, 1, 0, 2, 4, 6, 7, 8, 9}, l);
  EXPECT_EQ(m.p_at_1, 1.0);
  EXPECT_EQ(m.average_precision, 1.0);
}

// ---- agreement and significance -------------------------------------------

TEST(Kappa, HandTable) {
  const std::vector<int> a{1, 1, 1, 1, 0, 0, 0, 0, 1, 0};
  const std::vector<int> b{1, 1, 1, 1, 0, 0, 0, 0, 0, 1};
  EXPECT_NEAR(cohen_kappa(a, b), 0.6, 1e-15);
  EXPECT_EQ(cohen_kappa(a, a), 1.0);
  EXPECT_EQ(cohen_kappa(std::vector<int>{1, 1, 1}, std::vector<int>{1, 1, 1}), 1.0);
  EXPECT_EQ(cohen_kappa(std::vector<int>{1, 0, 1, 0}, std::vector<int>{1, 1, 0, 0}), 0.0);
}

TEST(Kappa, Errors) {
  EXPECT_THROW(cohen_kappa(std::vector<int>{1}, std::vector<int>{1, 0}), UsageError);
  EXPECT_THROW(cohen_kappa(std::vector<int>{}, std::vector<int>{}), UsageError);
}

TEST(Bootstrap, IdenticalDominatedAndReproducible) {
  Rng rng(34);
  std::vector<double> a(100), b(100);
  for (std::size_t i = 0; i < 100; ++i) {
    b[i] = rng.uniform();
    a[i] = b[i] + 10.0;
  }
  EXPECT_EQ(bootstrap_test(b, b, 10000, 1), 1.0);
  EXPECT_LT(bootstrap_test(a, b, 10000, 1), 0.001);
  std::vector<double> noisy(100);
  for (std::size_t i = 0; i < 100; ++i) noisy[i] = b[i] + rng.uniform(-0.5, 0.5);
  const double p = bootstrap_test(noisy, b, 2000, 3);
  EXPECT_EQ(p, bootstrap_test(noisy, b, 2000, 3));
  EXPECT_GT(p, 0.0);
  EXPECT_LE(p, 1.0);
  EXPECT_EQ(bootstrap_test(noisy, b, 2000, 3), bootstrap_test(b, noisy, 2000, 3));
}

TEST(Bootstrap, Errors) {
  EXPECT_THROW(bootstrap_test(std::vector<double>{1.0}, std::vector<double>{1.0}, 10, 1), UsageError);
  EXPECT_THROW(bootstrap_test(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0}, 10, 1), UsageError);
}

// ---- rankings file --------------------------------------------------------

TEST(Rankings, JsonValidation) {
  const auto f = testing::hand_eval_fixture();
  std::stringstream io;
  write_rankings(io, f.rankings);
  const auto back = read_rankings(io);
  ASSERT_EQ(back.size(), 5u);
  EXPECT_EQ(back[3].order, f.rankings[3].order);
  EXPECT_THROW(ranked_list_from_json(R"({"post_id":"p","model":"m","order":[0,0],"scores":[1,0]})"), FormatError);
  EXPECT_THROW(ranked_list_from_json(R"({"post_id":"p","model":"m","order":[0,1],"scores":[0,1]})"), FormatError);
  std::istringstream bad(ranked_list_to_json(f.rankings[0]) + "\n{}\n");
  try {
    read_rankings(bad);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

}  // namespace
}  // namespace evpirank
