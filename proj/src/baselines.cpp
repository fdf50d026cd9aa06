#include "evpirank/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_map>

#include "evpirank/error.hpp"
#include "evpirank/rng.hpp"
#include "model_util.hpp"

namespace evpirank {

// ---- Random ---------------------------------------------------------------

std::vector<PostMetrics> random_rank_post_metrics(std::span<const CandidateSet> sets, std::span<const LabelSet> labels,
                                                  std::size_t n_perm, std::uint64_t seed) {
  if (n_perm == 0) throw UsageError("random_rank_metrics: n_perm must be at least 1");
  std::map<std::string, std::size_t> sizes;
  for (const auto& s : sets) sizes[s.post_id] = s.size();
  std::vector<const LabelSet*> sorted;
  for (const auto& l : labels) sorted.push_back(&l);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->post_id < b->post_id; });

  const Rng root(seed);
  std::vector<PostMetrics> out;
  for (const LabelSet* l : sorted) {
    auto it = sizes.find(l->post_id);
    if (it == sizes.end()) throw UsageError("no candidate set for labeled post " + l->post_id);
    Rng rng = root.substream("random_rank", fnv1a64(l->post_id));
    std::vector<std::size_t> order(it->second);
    PostMetrics mean;
    mean.post_id = l->post_id;
    for (std::size_t t = 0; t < n_perm; ++t) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      rng.shuffle(std::span<std::size_t>(order));
      const PostMetrics m = score_post(order, *l);
      mean.p_at_1 += m.p_at_1;
      mean.p_at_3 += m.p_at_3;
      mean.p_at_5 += m.p_at_5;
      mean.average_precision += m.average_precision;
    }
    const double n = static_cast<double>(n_perm);
    mean.p_at_1 /= n;
    mean.p_at_3 /= n;
    mean.p_at_5 /= n;
    mean.average_precision /= n;
    out.push_back(mean);
  }
  return out;
}

MetricReport random_rank_metrics(std::span<const CandidateSet> sets, std::span<const LabelSet> labels,
                                 std::size_t n_perm, std::uint64_t seed) {
  const auto posts = random_rank_post_metrics(sets, labels, n_perm, seed);
  const std::string mode = labels.empty() ? "" : std::string(to_string(labels.front().mode));
  return aggregate(posts, "random", mode);
}

std::vector<double> RandomRanker::candidate_scores(const PreparedCandidateSet& set) const {
  Rng rng = Rng(seed_).substream("random_ranker", fnv1a64(set.post_id));
  std::vector<std::size_t> order(set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<double> scores(set.size());
  for (std::size_t r = 0; r < order.size(); ++r) scores[order[r]] = static_cast<double>(order.size() - r);
  return scores;
}

// ---- Bag of n-grams -------------------------------------------------------

namespace {

constexpr std::uint64_t kNgramSeed = fnv1a64("evpirank-ngram-features");

std::vector<std::uint64_t> ngram_hashes(std::span<const std::string> tokens, std::size_t max_n) {
  std::vector<std::uint64_t> out;
  for (std::size_t n = 1; n <= max_n; ++n) {
    for (std::size_t s = 0; s + n <= tokens.size(); ++s) {
      std::uint64_t h = fnv1a64(std::string_view("\x01", 1), kNgramSeed + n);
      for (std::size_t k = s; k < s + n; ++k) {
        h = fnv1a64(tokens[k], h);
        h = fnv1a64(std::string_view("\x1f", 1), h);
      }
      out.push_back(h);
    }
  }
  return out;
}

void add_cross(std::uint64_t tag, const std::vector<std::uint64_t>& xs, const std::vector<std::uint64_t>& ys,
               std::unordered_map<std::uint32_t, double>& counts) {
  for (std::uint64_t x : xs) {
    const std::uint64_t hx = splitmix64(x + tag);
    for (std::uint64_t y : ys) {
      const auto id = static_cast<std::uint32_t>(splitmix64(hx ^ y) & (kNgramHashSize - 1));
      counts[id] += 1.0;
    }
  }
}

}  // namespace

SparseFeatures ngram_features(std::span<const std::string> post, std::span<const std::string> question,
                              std::span<const std::string> answer, std::size_t max_n) {
  const auto p = ngram_hashes(post, max_n);
  const auto q = ngram_hashes(question, max_n);
  const auto a = ngram_hashes(answer, max_n);
  std::unordered_map<std::uint32_t, double> counts;
  add_cross(1, p, q, counts);
  add_cross(2, q, a, counts);
  add_cross(3, p, a, counts);
  SparseFeatures out(counts.begin(), counts.end());
  out.emplace_back(static_cast<std::uint32_t>(kNgramBiasFeature), 1.0);
  std::sort(out.begin(), out.end());
  return out;
}

double sparse_dot(std::span<const double> weights, const SparseFeatures& x) {
  double total = 0.0;
  for (const auto& [id, v] : x) {
    if (id >= weights.size()) throw ShapeError("sparse_dot: feature id beyond weight vector");
    total += weights[id] * v;
  }
  return total;
}

namespace {

void check_binary_classes(std::span<const int> ys, int negative, const char* who) {
  bool pos = false, neg = false;
  for (int y : ys) {
    if (y == 1) {
      pos = true;
    } else if (y == negative) {
      neg = true;
    } else {
      throw UsageError(std::string(who) + ": unexpected label " + std::to_string(y));
    }
  }
  if (!pos || !neg) throw UsageError(std::string(who) + ": training data must contain both classes");
}

}  // namespace

std::vector<double> train_hinge(std::span<const SparseFeatures> xs, std::span<const int> ys,
                                const HingeConfig& config) {
  if (xs.size() != ys.size()) throw ShapeError("train_hinge: features and labels differ in length");
  check_binary_classes(ys, -1, "train_hinge");
  std::vector<double> w(kNgramWeightCount, 0.0);
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = Rng(config.seed).substream("hinge");
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t i : order) {
      const double y = static_cast<double>(ys[i]);
      if (y * sparse_dot(w, xs[i]) < 1.0) {
        for (const auto& [id, v] : xs[i]) w[id] += config.lr * y * v;
      }
    }
  }
  return w;
}

double hinge_loss(std::span<const double> weights, std::span<const SparseFeatures> xs, std::span<const int> ys) {
  double total = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    total += std::max(0.0, 1.0 - static_cast<double>(ys[i]) * sparse_dot(weights, xs[i]));
  }
  return total;
}

NgramRanker::NgramRanker(DenseMatrix weights) : weights_(std::move(weights)) {
  if (weights_.rows() != kNgramWeightCount || weights_.cols() != 1) throw ShapeError("NgramRanker: bad weight shape");
}

std::vector<double> NgramRanker::candidate_scores(const PreparedCandidateSet& set) const {
  std::vector<double> scores;
  for (std::size_t j = 0; j < set.size(); ++j) {
    scores.push_back(sparse_dot(weights_.values(),
                                ngram_features(set.post.tokens, set.questions[j].tokens, set.answers[j].tokens)));
  }
  return scores;
}

NgramRanker ngram_train(std::span<const PreparedCandidateSet> sets, const HingeConfig& config) {
  std::vector<SparseFeatures> xs;
  std::vector<int> ys;
  for (const auto& s : sets) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      xs.push_back(ngram_features(s.post.tokens, s.questions[j].tokens, s.answers[j].tokens));
      ys.push_back(j == s.original_index ? 1 : -1);
    }
  }
  const auto w = train_hinge(xs, ys, config);
  DenseMatrix m(kNgramWeightCount, 1);
  std::copy(w.begin(), w.end(), m.values().begin());
  return NgramRanker(std::move(m));
}

// ---- Community QA style logistic regression -------------------------------

const std::vector<std::string>& question_words() {
  static const std::vector<std::string> words = {"what", "which", "who",  "whom", "whose",
                                                 "when", "where", "why", "how"};
  return words;
}

namespace {

std::set<std::string> bigrams(std::span<const std::string> tokens) {
  std::set<std::string> out;
  for (std::size_t k = 0; k + 1 < tokens.size(); ++k) out.insert(tokens[k] + ' ' + tokens[k + 1]);
  return out;
}

double overlap(const std::set<std::string>& q, const std::set<std::string>& p) {
  if (q.empty()) return 0.0;
  std::size_t shared = 0;
  for (const auto& t : q) shared += p.count(t);
  return static_cast<double>(shared) / static_cast<double>(q.size());
}

double sigmoid_stable(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

CqaFeatures cqa_features(const PreparedText& post, const PreparedText& question) {
  const std::set<std::string> q_tokens(question.tokens.begin(), question.tokens.end());
  const std::set<std::string> p_tokens(post.tokens.begin(), post.tokens.end());
  CqaFeatures f{};
  f[0] = cos_sim(post.avg.values, question.avg.values);
  f[1] = overlap(q_tokens, p_tokens);
  f[2] = overlap(bigrams(question.tokens), bigrams(post.tokens));
  f[3] = post.tokens.empty() ? 0.0
                             : static_cast<double>(question.tokens.size()) / static_cast<double>(post.tokens.size());
  double wh = 0.0;
  for (const auto& t : question.tokens) {
    if (std::find(question_words().begin(), question_words().end(), t) != question_words().end()) wh += 1.0;
  }
  f[4] = wh;
  f[5] = q_tokens.count("you") ? 1.0 : 0.0;
  return f;
}

double logistic_score(std::span<const double> w, const CqaFeatures& x) {
  if (w.size() != kCqaFeatureCount + 1) throw ShapeError("logistic_score: expected 7 weights");
  double z = w[kCqaFeatureCount];
  for (std::size_t k = 0; k < kCqaFeatureCount; ++k) z += w[k] * x[k];
  return sigmoid_stable(z);
}

std::vector<double> train_logistic(std::span<const CqaFeatures> xs, std::span<const int> ys,
                                   const LogisticConfig& config, std::vector<std::string>* warnings) {
  if (xs.size() != ys.size()) throw ShapeError("train_logistic: features and labels differ in length");
  check_binary_classes(ys, 0, "train_logistic");
  if (warnings) {
    for (std::size_t k = 0; k < kCqaFeatureCount; ++k) {
      const bool constant =
          std::all_of(xs.begin(), xs.end(), [&](const CqaFeatures& x) { return x[k] == xs.front()[k]; });
      if (constant) warnings->push_back("cqa feature " + std::to_string(k) + " is constant over the training data");
    }
  }
  std::vector<double> w(kCqaFeatureCount + 1, 0.0);
  std::vector<double> grad(w.size());
  const double inv_n = 1.0 / static_cast<double>(xs.size());
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double err = logistic_score(w, xs[i]) - static_cast<double>(ys[i]);
      for (std::size_t k = 0; k < kCqaFeatureCount; ++k) grad[k] += err * xs[i][k];
      grad[kCqaFeatureCount] += err;
    }
    for (std::size_t k = 0; k < w.size(); ++k) w[k] -= config.lr * grad[k] * inv_n;
  }
  return w;
}

CqaRanker::CqaRanker(DenseMatrix weights) : weights_(std::move(weights)) {
  if (weights_.rows() != kCqaFeatureCount + 1 || weights_.cols() != 1) throw ShapeError("CqaRanker: bad weight shape");
}

std::vector<double> CqaRanker::candidate_scores(const PreparedCandidateSet& set) const {
  std::vector<double> scores;
  for (std::size_t j = 0; j < set.size(); ++j) {
    scores.push_back(logistic_score(weights_.values(), cqa_features(set.post, set.questions[j])));
  }
  return scores;
}

CqaRanker cqa_train(std::span<const PreparedCandidateSet> sets, const LogisticConfig& config,
                    std::vector<std::string>* warnings) {
  std::vector<CqaFeatures> xs;
  std::vector<int> ys;
  for (const auto& s : sets) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      xs.push_back(cqa_features(s.post, s.questions[j]));
      ys.push_back(j == s.original_index ? 1 : 0);
    }
  }
  const auto w = train_logistic(xs, ys, config, warnings);
  DenseMatrix m(kCqaFeatureCount + 1, 1);
  std::copy(w.begin(), w.end(), m.values().begin());
  return CqaRanker(std::move(m));
}

// ---- Neural baselines -----------------------------------------------------

std::string_view to_string(NeuralVariant variant) {
  switch (variant) {
    case NeuralVariant::pq:
      return "pq";
    case NeuralVariant::pa:
      return "pa";
    case NeuralVariant::pqa:
      return "pqa";
  }
  return "?";
}

NeuralBaselineParams NeuralBaselineParams::zeros(NeuralVariant variant, const NeuralShape& shape) {
  if (shape.embed_dim == 0 || shape.hidden_dim == 0 || shape.ff_hidden_dim == 0) {
    throw UsageError("NeuralBaselineParams: dimensions must be positive");
  }
  NeuralBaselineParams p;
  p.variant = variant;
  p.shape = shape;
  p.post_encoder = LstmParams::zeros(shape.embed_dim, shape.hidden_dim);
  std::size_t inputs = 1;
  if (p.uses_question()) {
    p.question_encoder = LstmParams::zeros(shape.embed_dim, shape.hidden_dim);
    ++inputs;
  }
  if (p.uses_answer()) {
    p.answer_encoder = LstmParams::zeros(shape.embed_dim, shape.hidden_dim);
    ++inputs;
  }
  p.net = FeedForwardParams::zeros(inputs * shape.hidden_dim, shape.ff_hidden_dim, shape.ff_layers, 1);
  return p;
}

NeuralBaselineParams NeuralBaselineParams::initialized(NeuralVariant variant, const NeuralShape& shape, Rng& rng,
                                                       FfInit ff_init) {
  NeuralBaselineParams p = zeros(variant, shape);
  p.post_encoder.init_uniform(rng);
  if (p.uses_question()) p.question_encoder.init_uniform(rng);
  if (p.uses_answer()) p.answer_encoder.init_uniform(rng);
  if (ff_init == FfInit::glorot) {
    p.net.init_glorot(rng);
  } else {
    p.net.init_uniform(rng);
  }
  return p;
}

TensorList NeuralBaselineParams::tensors() {
  TensorList out;
  post_encoder.collect("post_lstm", out);
  if (uses_question()) question_encoder.collect("question_lstm", out);
  if (uses_answer()) answer_encoder.collect("answer_lstm", out);
  net.collect("net", out);
  return out;
}

namespace {

struct EncodedInputs {
  Vector post;
  LstmTrace post_trace;
  std::vector<Vector> questions, answers;
  std::vector<LstmTrace> question_traces, answer_traces;
};

EncodedInputs encode_inputs(const NeuralBaselineParams& p, const PreparedCandidateSet& set, bool traces) {
  EncodedInputs e;
  const std::size_t n = set.size();
  e.post = encode_sequence(p.post_encoder, set.post.rows, traces ? &e.post_trace : nullptr);
  if (traces) {
    e.question_traces.resize(n);
    e.answer_traces.resize(n);
  }
  e.questions.resize(n);
  e.answers.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (p.uses_question()) {
      e.questions[j] =
          encode_sequence(p.question_encoder, set.questions[j].rows, traces ? &e.question_traces[j] : nullptr);
    }
    if (p.uses_answer()) {
      e.answers[j] = encode_sequence(p.answer_encoder, set.answers[j].rows, traces ? &e.answer_traces[j] : nullptr);
    }
  }
  return e;
}

Vector net_input(const NeuralBaselineParams& p, const EncodedInputs& e, std::size_t j) {
  Vector in = e.post;
  if (p.uses_question()) in.insert(in.end(), e.questions[j].begin(), e.questions[j].end());
  if (p.uses_answer()) in.insert(in.end(), e.answers[j].begin(), e.answers[j].end());
  return in;
}

}  // namespace

double neural_baseline_loss(const NeuralBaselineParams& p, const PreparedCandidateSet& set,
                            NeuralBaselineParams* g) {
  if (set.size() == 0 || set.original_index >= set.size()) {
    throw UsageError("candidate set " + set.post_id + " is empty or inconsistent");
  }
  const std::size_t h = p.shape.hidden_dim;
  const EncodedInputs e = encode_inputs(p, set, g != nullptr);
  Vector d_post(h, 0.0);
  double loss = 0.0;
  FeedForwardTrace trace;
  for (std::size_t j = 0; j < set.size(); ++j) {
    const int y = j == set.original_index ? 1 : 0;
    const double u = sigmoid(feedforward(p.net, net_input(p, e, j), g ? &trace : nullptr)[0]);
    loss += loss_util(y, u);
    if (!g) continue;
    const double d_logit = (u < 1e-12 || u > 1.0 - 1e-12) ? 0.0 : u - static_cast<double>(y);
    const Vector d_in = feedforward_backward(p.net, trace, std::span<const double>(&d_logit, 1), g->net);
    detail::add_slice(d_in, 0, d_post);
    std::size_t offset = h;
    if (p.uses_question()) {
      encode_sequence_backward(p.question_encoder, e.question_traces[j],
                               std::span<const double>(d_in).subspan(offset, h), g->question_encoder);
      offset += h;
    }
    if (p.uses_answer()) {
      encode_sequence_backward(p.answer_encoder, e.answer_traces[j], std::span<const double>(d_in).subspan(offset, h),
                               g->answer_encoder);
    }
  }
  if (g) encode_sequence_backward(p.post_encoder, e.post_trace, d_post, g->post_encoder);
  return loss;
}

std::vector<double> neural_baseline_scores(const NeuralBaselineParams& p, const PreparedCandidateSet& set) {
  const EncodedInputs e = encode_inputs(p, set, false);
  std::vector<double> scores;
  for (std::size_t j = 0; j < set.size(); ++j) scores.push_back(sigmoid(feedforward(p.net, net_input(p, e, j))[0]));
  return scores;
}

std::unique_ptr<NeuralBaselineRanker> NeuralBaselineRanker::from_meta(NeuralVariant variant,
                                                                      const std::map<std::string, std::string>& meta) {
  NeuralShape shape;
  shape.embed_dim = detail::meta_size(meta, "embed_dim");
  shape.hidden_dim = detail::meta_size(meta, "hidden_dim");
  shape.ff_hidden_dim = detail::meta_size(meta, "ff_hidden_dim");
  shape.ff_layers = detail::meta_size(meta, "ff_layers");
  return std::make_unique<NeuralBaselineRanker>(NeuralBaselineParams::zeros(variant, shape));
}

std::string NeuralBaselineRanker::name() const { return "neural-" + std::string(to_string(params_.variant)); }

std::vector<double> NeuralBaselineRanker::candidate_scores(const PreparedCandidateSet& set) const {
  return neural_baseline_scores(params_, set);
}

std::unique_ptr<TrainableRanker> NeuralBaselineRanker::clone() const {
  return std::make_unique<NeuralBaselineRanker>(*this);
}

double NeuralBaselineRanker::example_loss(const PreparedCandidateSet& set, TrainableRanker* grads) const {
  NeuralBaselineParams* g = nullptr;
  if (grads) {
    auto* other = dynamic_cast<NeuralBaselineRanker*>(grads);
    if (!other || other->params_.variant != params_.variant) {
      throw UsageError("NeuralBaselineRanker::example_loss: gradient sink has a different type");
    }
    g = &other->params_;
  }
  return neural_baseline_loss(params_, set, g);
}

std::map<std::string, std::string> NeuralBaselineRanker::checkpoint_meta() const {
  return {{"embed_dim", std::to_string(params_.shape.embed_dim)},
          {"hidden_dim", std::to_string(params_.shape.hidden_dim)},
          {"ff_hidden_dim", std::to_string(params_.shape.ff_hidden_dim)},
          {"ff_layers", std::to_string(params_.shape.ff_layers)}};
}

}  // namespace evpirank
