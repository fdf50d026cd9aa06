#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evpirank/ranking.hpp"
#include "evpirank/retrieval.hpp"

namespace evpirank {

struct Annotation {
  std::string post_id;
  std::string annotator_id;
  std::size_t best = 0;
  std::vector<std::size_t> valid;  // sorted, unique, contains best
};

// Throws FormatError when best is not in valid or an index is outside [0, 9].
Annotation annotation_from_json(std::string_view line);
std::string annotation_to_json(const Annotation& a);
std::vector<Annotation> read_annotations(std::istream& in);

enum class LabelMode { best_union, valid_intersection, original, exclude_original };

std::string_view to_string(LabelMode mode);
// Throws UsageError listing the valid names.
LabelMode label_mode_from_string(std::string_view name);

struct LabelSet {
  std::string post_id;
  std::vector<std::size_t> relevant;  // sorted candidate indices
  LabelMode mode = LabelMode::original;
  // Candidate removed from the ranking before scoring (exclude_original).
  std::optional<std::size_t> excluded;
};

struct LabelBuildReport {
  std::size_t dropped_empty = 0;  // posts whose label set came out empty
};

// Label sets for `mode`. Annotation modes cover the posts that have
// annotations and require exactly two annotators per post; `exclude_base`
// picks the annotation labels used in exclude_original mode (best_union or
// valid_intersection). Posts with an empty label set are dropped and counted.
std::vector<LabelSet> build_labelsets(std::span<const Annotation> annotations, std::span<const CandidateSet> sets,
                                      LabelMode mode, LabelMode exclude_base, LabelBuildReport* report = nullptr);

// |top-k of order ∩ relevant| / k
double precision_at_k(std::span<const std::size_t> order, std::span<const std::size_t> relevant, std::size_t k);

// Sum of precision at each rank holding a relevant item, over |relevant|.
// Throws UsageError on an empty relevant set.
double average_precision(std::span<const std::size_t> order, std::span<const std::size_t> relevant);

struct RankingWithLabels {
  std::span<const std::size_t> order;
  std::span<const std::size_t> relevant;
};

// Mean AP; posts with an empty relevant set are skipped and counted in
// `skipped`.
double mean_average_precision(std::span<const RankingWithLabels> items, std::size_t* skipped = nullptr);

struct PostMetrics {
  std::string post_id;
  double p_at_1 = 0.0;
  double p_at_3 = 0.0;
  double p_at_5 = 0.0;
  double average_precision = 0.0;
};

struct MetricReport {
  std::string model;
  std::string mode;
  std::size_t n_posts = 0;
  double p_at_1 = 0.0;
  double p_at_3 = 0.0;
  double p_at_5 = 0.0;
  double map = 0.0;

  std::string to_json() const;
  std::string to_table() const;
};

// Per-post metrics of `order` against `labels`, after dropping the excluded
// candidate from the order.
PostMetrics score_post(std::span<const std::size_t> order, const LabelSet& labels);

MetricReport aggregate(std::span<const PostMetrics> posts, std::string model, std::string mode);

// Scores every labeled post, in label-set order sorted by post id. Throws
// UsageError when a labeled post has no ranking.
std::vector<PostMetrics> evaluate_posts(std::span<const RankedList> rankings, std::span<const LabelSet> labels);

MetricReport evaluate(std::span<const RankedList> rankings, std::span<const LabelSet> labels, std::string model,
                      std::string mode);

// Chance-corrected agreement of two categorical label sequences. 1.0 when
// chance agreement is total. Throws UsageError on a length mismatch or empty
// input.
double cohen_kappa(std::span<const int> a, std::span<const int> b);

// Paired bootstrap over posts. Returns the two-sided p-value: twice the share
// of resamples whose mean difference does not keep the observed sign, capped
// at 1; 1.0 when the observed difference is zero. Throws UsageError for
// fewer than two posts or unequal lengths.
double bootstrap_test(std::span<const double> a, std::span<const double> b, std::size_t n_resamples,
                      std::uint64_t seed);

}  // namespace evpirank
