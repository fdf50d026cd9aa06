#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evpirank/prepared.hpp"
#include "evpirank/tensor.hpp"

namespace evpirank {

struct RankedList {
  std::string post_id;
  std::string model;
  std::vector<std::size_t> order;  // candidate indices, best first
  std::vector<double> scores;      // scores[k] belongs to candidate order[k]
};

// Orders candidates by descending score; equal scores keep ascending index.
// Throws NumericError on a NaN score.
RankedList rank_by_scores(std::string post_id, std::string model, std::span<const double> scores);

std::string ranked_list_to_json(const RankedList& list);

// Validates that order is a permutation and scores are non-increasing.
RankedList ranked_list_from_json(std::string_view line);

void write_rankings(std::ostream& out, std::span<const RankedList> lists);
std::vector<RankedList> read_rankings(std::istream& in);

// Anything that scores the candidates of a post (higher = ask first).
class Ranker {
 public:
  virtual ~Ranker() = default;
  virtual std::string name() const = 0;
  virtual std::vector<double> candidate_scores(const PreparedCandidateSet& set) const = 0;

  RankedList rank(const PreparedCandidateSet& set) const;
};

// A ranker with dense parameters trained by minimizing a per-post loss.
class TrainableRanker : public Ranker {
 public:
  virtual std::unique_ptr<TrainableRanker> clone() const = 0;

  // Parameter tensors in a fixed order. Pointers stay valid for the object's
  // lifetime.
  virtual TensorList parameters() = 0;

  // Loss of one post's candidate set. When `grads` is non-null it must be a
  // ranker of the same type and shape; dLoss/dparams is added to its
  // parameters.
  virtual double example_loss(const PreparedCandidateSet& set, TrainableRanker* grads) const = 0;

  // Shape and option entries stored in checkpoints.
  virtual std::map<std::string, std::string> checkpoint_meta() const = 0;

  // Copy of this ranker with every parameter set to zero.
  std::unique_ptr<TrainableRanker> zeroed_clone() const;
};

}  // namespace evpirank
