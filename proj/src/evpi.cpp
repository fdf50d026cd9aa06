#include "evpirank/evpi.hpp"

#include <algorithm>
#include <cmath>

#include "evpirank/embeddings.hpp"
#include "evpirank/error.hpp"
#include "model_util.hpp"

namespace evpirank {

EvpiParams EvpiParams::zeros(const EvpiShape& shape) {
  if (shape.embed_dim == 0 || shape.hidden_dim == 0 || shape.ff_hidden_dim == 0) {
    throw UsageError("EvpiParams: dimensions must be positive");
  }
  EvpiParams p;
  p.shape = shape;
  p.post_encoder = LstmParams::zeros(shape.embed_dim, shape.hidden_dim);
  p.question_encoder = LstmParams::zeros(shape.embed_dim, shape.hidden_dim);
  p.answer_encoder = LstmParams::zeros(shape.embed_dim, shape.hidden_dim);
  p.answer_net = FeedForwardParams::zeros(2 * shape.hidden_dim, shape.ff_hidden_dim, shape.ff_layers, shape.embed_dim);
  p.utility_net = FeedForwardParams::zeros(3 * shape.hidden_dim, shape.ff_hidden_dim, shape.ff_layers, 1);
  return p;
}

EvpiParams EvpiParams::initialized(const EvpiShape& shape, Rng& rng, FfInit ff_init) {
  EvpiParams p = zeros(shape);
  p.post_encoder.init_uniform(rng);
  p.question_encoder.init_uniform(rng);
  p.answer_encoder.init_uniform(rng);
  for (auto* net : {&p.answer_net, &p.utility_net}) {
    if (ff_init == FfInit::glorot) {
      net->init_glorot(rng);
    } else {
      net->init_uniform(rng);
    }
  }
  return p;
}

TensorList EvpiParams::tensors() {
  TensorList out;
  post_encoder.collect("post_lstm", out);
  question_encoder.collect("question_lstm", out);
  answer_encoder.collect("answer_lstm", out);
  answer_net.collect("answer_net", out);
  utility_net.collect("utility_net", out);
  return out;
}

double dist(std::span<const double> rep, std::span<const double> a_hat) { return 1.0 - cos_sim(rep, a_hat); }

Vector dist_gradient(std::span<const double> rep, std::span<const double> a_hat) {
  if (rep.size() != a_hat.size()) throw ShapeError("dist_gradient: length mismatch");
  Vector g(rep.size(), 0.0);
  const double nr = norm(rep);
  const double na = norm(a_hat);
  if (nr == 0.0 || na == 0.0) return g;
  const double c = cos_sim(rep, a_hat);
  for (std::size_t k = 0; k < rep.size(); ++k) {
    g[k] = -(a_hat[k] / (nr * na) - c * rep[k] / (nr * nr));
  }
  return g;
}

double similarity_weight(double cosine, bool clamp_negative) {
  return clamp_negative ? std::max(0.0, cosine) : cosine;
}

double answer_prob_value(double distance, double question_similarity, bool clamp_negative) {
  return std::exp(-distance) * similarity_weight(question_similarity, clamp_negative);
}

namespace {

constexpr double kProbFloor = 1e-12;

double clamp_prob(double u) { return std::clamp(u, kProbFloor, 1.0 - kProbFloor); }

// d loss_util / d logit, for u = sigmoid(logit).
double loss_util_logit_gradient(int y, double u) {
  if (u < kProbFloor || u > 1.0 - kProbFloor) return 0.0;
  return u - static_cast<double>(y);
}

struct EncodedSet {
  Vector post;
  LstmTrace post_trace;
  std::vector<Vector> questions, answers;
  std::vector<LstmTrace> question_traces, answer_traces;
};

EncodedSet encode_set(const EvpiParams& p, const PreparedCandidateSet& set, bool keep_traces) {
  EncodedSet e;
  const std::size_t n = set.size();
  e.questions.resize(n);
  e.answers.resize(n);
  if (keep_traces) {
    e.question_traces.resize(n);
    e.answer_traces.resize(n);
  }
  e.post = encode_sequence(p.post_encoder, set.post.rows, keep_traces ? &e.post_trace : nullptr);
  for (std::size_t j = 0; j < n; ++j) {
    e.questions[j] =
        encode_sequence(p.question_encoder, set.questions[j].rows, keep_traces ? &e.question_traces[j] : nullptr);
    e.answers[j] = encode_sequence(p.answer_encoder, set.answers[j].rows, keep_traces ? &e.answer_traces[j] : nullptr);
  }
  return e;
}

// Gradients flowing into the encoder outputs, pushed through the LSTMs once.
struct EncoderGrads {
  Vector post;
  std::vector<Vector> questions, answers;

  EncoderGrads(std::size_t hidden, std::size_t n)
      : post(hidden, 0.0), questions(n, Vector(hidden, 0.0)), answers(n, Vector(hidden, 0.0)) {}

  void backward(const EvpiParams& p, const EncodedSet& e, EvpiParams& g) const {
    encode_sequence_backward(p.post_encoder, e.post_trace, post, g.post_encoder);
    for (std::size_t j = 0; j < questions.size(); ++j) {
      encode_sequence_backward(p.question_encoder, e.question_traces[j], questions[j], g.question_encoder);
      encode_sequence_backward(p.answer_encoder, e.answer_traces[j], answers[j], g.answer_encoder);
    }
  }
};

void check_set(const PreparedCandidateSet& set) {
  if (set.size() == 0 || set.answers.size() != set.size() || set.original_index >= set.size()) {
    throw UsageError("candidate set " + set.post_id + " is empty or inconsistent");
  }
}

double answer_term(const EvpiParams& p, const PreparedCandidateSet& set, const EncodedSet& e, const EvpiOptions& opt,
                   EvpiParams* g, EncoderGrads* eg) {
  const std::size_t o = set.original_index;
  const std::size_t h = p.shape.hidden_dim;
  FeedForwardTrace trace;
  const Vector input = detail::concat({e.post, e.questions[o]});
  const Vector rep = feedforward(p.answer_net, input, g ? &trace : nullptr);

  double loss = dist(rep, set.answers[o].avg.values);
  Vector d_rep;
  if (g) d_rep = dist_gradient(rep, set.answers[o].avg.values);
  const auto& q_own = set.questions[o].avg.values;
  for (std::size_t j = 0; j < set.size(); ++j) {
    if (j == o) continue;
    const double w = similarity_weight(cos_sim(q_own, set.questions[j].avg.values), opt.clamp_negative_sim);
    if (w == 0.0) continue;
    loss += w * dist(rep, set.answers[j].avg.values);
    if (g) {
      const Vector dj = dist_gradient(rep, set.answers[j].avg.values);
      for (std::size_t k = 0; k < d_rep.size(); ++k) d_rep[k] += w * dj[k];
    }
  }
  if (g) {
    const Vector d_in = feedforward_backward(p.answer_net, trace, d_rep, g->answer_net);
    detail::add_slice(d_in, 0, eg->post);
    detail::add_slice(d_in, h, eg->questions[o]);
  }
  return loss;
}

double utility_term(const EvpiParams& p, const PreparedCandidateSet& set, const EncodedSet& e, EvpiParams* g,
                    EncoderGrads* eg) {
  const std::size_t h = p.shape.hidden_dim;
  double loss = 0.0;
  FeedForwardTrace trace;
  for (std::size_t j = 0; j < set.size(); ++j) {
    const int y = j == set.original_index ? 1 : 0;
    const Vector input = detail::concat({e.post, e.questions[j], e.answers[j]});
    const double logit = feedforward(p.utility_net, input, g ? &trace : nullptr)[0];
    const double u = sigmoid(logit);
    loss += loss_util(y, u);
    if (g) {
      const double d_logit = loss_util_logit_gradient(y, u);
      const Vector d_in = feedforward_backward(p.utility_net, trace, std::span<const double>(&d_logit, 1),
                                               g->utility_net);
      detail::add_slice(d_in, 0, eg->post);
      detail::add_slice(d_in, h, eg->questions[j]);
      detail::add_slice(d_in, 2 * h, eg->answers[j]);
    }
  }
  return loss;
}

double set_loss(const EvpiParams& p, const PreparedCandidateSet& set, const EvpiOptions& opt, EvpiParams* g,
                bool with_answer, bool with_utility) {
  check_set(set);
  const EncodedSet e = encode_set(p, set, g != nullptr);
  EncoderGrads eg(g ? p.shape.hidden_dim : 0, g ? set.size() : 0);
  double loss = 0.0;
  if (with_answer) loss += answer_term(p, set, e, opt, g, &eg);
  if (with_utility) loss += utility_term(p, set, e, g, &eg);
  if (g) eg.backward(p, e, *g);
  return loss;
}

}  // namespace

double loss_util(int y, double u) {
  const double c = clamp_prob(u);
  return -(static_cast<double>(y) * std::log(c) + (1.0 - static_cast<double>(y)) * std::log(1.0 - c));
}

double expected_value(std::span<const double> probs, std::span<const double> utils) {
  if (probs.size() != utils.size()) throw ShapeError("expected_value: length mismatch");
  double total = 0.0;
  for (std::size_t j = 0; j < probs.size(); ++j) total += probs[j] * utils[j];
  return total;
}

Vector answer_representation(const EvpiParams& p, const PreparedText& post, const PreparedText& question) {
  const Vector pv = encode_sequence(p.post_encoder, post.rows);
  const Vector qv = encode_sequence(p.question_encoder, question.rows);
  return feedforward(p.answer_net, detail::concat({pv, qv}));
}

double answer_prob(const EvpiParams& p, const PreparedText& post, const PreparedText& question_i,
                   const PreparedText& answer_j, const PreparedText& question_j, const EvpiOptions& opt) {
  const Vector rep = answer_representation(p, post, question_i);
  return answer_prob_value(dist(rep, answer_j.avg.values), cos_sim(question_i.avg.values, question_j.avg.values),
                           opt.clamp_negative_sim);
}

double utility(const EvpiParams& p, const PreparedText& post, const PreparedText& question_j,
               const PreparedText& answer_j) {
  const Vector pv = encode_sequence(p.post_encoder, post.rows);
  const Vector qv = encode_sequence(p.question_encoder, question_j.rows);
  const Vector av = encode_sequence(p.answer_encoder, answer_j.rows);
  return sigmoid(feedforward(p.utility_net, detail::concat({pv, qv, av}))[0]);
}

double loss_ans(const EvpiParams& p, const PreparedCandidateSet& set, const EvpiOptions& opt, EvpiParams* g) {
  return set_loss(p, set, opt, g, true, false);
}

double utility_loss(const EvpiParams& p, const PreparedCandidateSet& set, EvpiParams* g) {
  return set_loss(p, set, EvpiOptions{}, g, false, true);
}

double post_loss(const EvpiParams& p, const PreparedCandidateSet& set, const EvpiOptions& opt, EvpiParams* g) {
  return set_loss(p, set, opt, g, true, true);
}

double joint_loss(const EvpiParams& p, std::span<const PreparedCandidateSet> batch, const EvpiOptions& opt,
                  EvpiParams* g) {
  double total = 0.0;
  for (const auto& set : batch) total += post_loss(p, set, opt, g);
  return total;
}

std::vector<double> evpi_scores(const EvpiParams& p, const PreparedCandidateSet& set, const EvpiOptions& opt) {
  check_set(set);
  const EncodedSet e = encode_set(p, set, false);
  const std::size_t n = set.size();
  std::vector<double> utils(n);
  for (std::size_t j = 0; j < n; ++j) {
    utils[j] = sigmoid(feedforward(p.utility_net, detail::concat({e.post, e.questions[j], e.answers[j]}))[0]);
  }
  std::vector<double> scores(n);
  std::vector<double> probs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vector rep = feedforward(p.answer_net, detail::concat({e.post, e.questions[i]}));
    for (std::size_t j = 0; j < n; ++j) {
      probs[j] = answer_prob_value(dist(rep, set.answers[j].avg.values),
                                   cos_sim(set.questions[i].avg.values, set.questions[j].avg.values),
                                   opt.clamp_negative_sim);
    }
    scores[i] = expected_value(probs, utils);
  }
  return scores;
}

double evpi_score(const EvpiParams& p, const PreparedCandidateSet& set, std::size_t question, const EvpiOptions& opt) {
  if (question >= set.size()) throw UsageError("evpi_score: question index out of range");
  return evpi_scores(p, set, opt)[question];
}

RankedList rank_questions(const EvpiParams& p, const PreparedCandidateSet& set, const EvpiOptions& opt) {
  const auto scores = evpi_scores(p, set, opt);
  return rank_by_scores(set.post_id, "evpi", scores);
}

std::unique_ptr<EvpiRanker> EvpiRanker::from_meta(const std::map<std::string, std::string>& meta) {
  EvpiShape shape;
  shape.embed_dim = detail::meta_size(meta, "embed_dim");
  shape.hidden_dim = detail::meta_size(meta, "hidden_dim");
  shape.ff_hidden_dim = detail::meta_size(meta, "ff_hidden_dim");
  shape.ff_layers = detail::meta_size(meta, "ff_layers");
  EvpiOptions opt;
  opt.clamp_negative_sim = detail::meta_bool(meta, "clamp_negative_sim");
  return std::make_unique<EvpiRanker>(EvpiParams::zeros(shape), opt);
}

std::vector<double> EvpiRanker::candidate_scores(const PreparedCandidateSet& set) const {
  return evpi_scores(params_, set, options_);
}

std::unique_ptr<TrainableRanker> EvpiRanker::clone() const { return std::make_unique<EvpiRanker>(*this); }

double EvpiRanker::example_loss(const PreparedCandidateSet& set, TrainableRanker* grads) const {
  EvpiParams* g = nullptr;
  if (grads) {
    auto* other = dynamic_cast<EvpiRanker*>(grads);
    if (!other) throw UsageError("EvpiRanker::example_loss: gradient sink has a different type");
    g = &other->params_;
  }
  return post_loss(params_, set, options_, g);
}

std::map<std::string, std::string> EvpiRanker::checkpoint_meta() const {
  return {{"embed_dim", std::to_string(params_.shape.embed_dim)},
          {"hidden_dim", std::to_string(params_.shape.hidden_dim)},
          {"ff_hidden_dim", std::to_string(params_.shape.ff_hidden_dim)},
          {"ff_layers", std::to_string(params_.shape.ff_layers)},
          {"clamp_negative_sim", options_.clamp_negative_sim ? "true" : "false"}};
}

}  // namespace evpirank
