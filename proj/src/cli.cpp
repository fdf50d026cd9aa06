#include "evpirank/cli.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "evpirank/baselines.hpp"
#include "evpirank/checkpoint.hpp"
#include "evpirank/config.hpp"
#include "evpirank/corpus.hpp"
#include "evpirank/error.hpp"
#include "evpirank/evpi.hpp"
#include "evpirank/gradsuite.hpp"
#include "evpirank/metrics.hpp"
#include "evpirank/retrieval.hpp"
#include "evpirank/text.hpp"
#include "evpirank/training.hpp"

namespace evpirank {
namespace {

const std::vector<std::string> kModelNames = {"random", "ngrams", "cqa", "neural-pq", "neural-pa", "neural-pqa",
                                              "evpi"};

std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw UsageError("cannot open input file " + path);
  return in;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw Error("cannot open output file " + path);
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw Error("failed writing " + path);
}

std::string model_list() {
  std::string s;
  for (const auto& m : kModelNames) s += (s.empty() ? "" : ", ") + m;
  return s;
}

void check_model_name(const std::string& name) {
  if (std::find(kModelNames.begin(), kModelNames.end(), name) == kModelNames.end()) {
    throw UsageError("unknown model '" + name + "' (valid: " + model_list() + ")");
  }
}

std::optional<NeuralVariant> neural_variant(const std::string& model) {
  if (model == "neural-pq") return NeuralVariant::pq;
  if (model == "neural-pa") return NeuralVariant::pa;
  if (model == "neural-pqa") return NeuralVariant::pqa;
  return std::nullopt;
}

struct Globals {
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
  std::string config_path;
  std::vector<std::string> assignments;
};

Config resolve_config(const Globals& g, std::ostream& err) {
  Config c;
  if (!g.config_path.empty()) c.load_file(g.config_path);
  for (const auto& a : g.assignments) c.set_assignment(a);
  if (g.seed) c.set("seed", std::to_string(*g.seed));
  std::istringstream lines(c.resolved());
  std::string line;
  err << "# resolved config\n";
  while (std::getline(lines, line)) err << "#   " << line << '\n';
  err << "#   threads = " << g.threads << '\n';
  return c;
}

std::vector<CandidateSet> load_candidates(const std::string& path) {
  auto in = open_in(path);
  try {
    return read_candidate_sets(in);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

EmbeddingTable load_table(const std::string& path) {
  open_in(path);
  return EmbeddingTable::load_file(path);
}

// ---- ingest ---------------------------------------------------------------

struct IngestArgs {
  std::string posts, comments, history, embeddings, out, rhetorical, split_dir;
};

int cmd_ingest(const IngestArgs& a, std::ostream& err) {
  auto posts = open_in(a.posts);
  auto comments = open_in(a.comments);
  auto history = open_in(a.history);
  EmbeddingTable table;
  if (!a.embeddings.empty()) table = load_table(a.embeddings);
  IngestOptions options;
  if (!a.rhetorical.empty()) {
    auto in = open_in(a.rhetorical);
    options.rhetorical_prefixes.clear();
    std::string line;
    while (std::getline(in, line)) {
      const auto t = trim(line);
      if (!t.empty() && t.front() != '#') options.rhetorical_prefixes.push_back(to_lower_ascii(t));
    }
  }
  IngestDiagnostics diag;
  const Dump dump = read_dump(posts, comments, history, diag);
  const auto triples = build_triples(dump, table, options, diag);
  auto out = open_out(a.out, std::ios::out | std::ios::binary);
  write_triples(out, triples);
  finish(out, a.out);
  if (!a.split_dir.empty()) {
    const DatasetSplit split = split_dataset(triples);
    const std::pair<const char*, const std::vector<Triple>*> parts[] = {
        {"train.jsonl", &split.train}, {"tune.jsonl", &split.tune}, {"test.jsonl", &split.test}};
    for (const auto& [name, list] : parts) {
      const std::string path = a.split_dir + "/" + name;
      auto f = open_out(path, std::ios::out | std::ios::binary);
      write_triples(f, *list);
      finish(f, path);
    }
  }
  err << diag.to_json() << '\n';
  return kExitOk;
}

// ---- candidates -------------------------------------------------------------

struct CandidatesArgs {
  std::string triples, out, index_out;
  std::optional<std::size_t> k;
};

int cmd_candidates(const CandidatesArgs& a, const Config& config, std::ostream& err) {
  const std::size_t k = a.k.value_or(config.get_size("candidates"));
  if (k == 0) throw UsageError("--k must be at least 1");
  auto in = open_in(a.triples);
  const auto triples = read_triples(in);
  std::map<std::string, Triple> by_post;
  for (const auto& t : triples) {
    if (!by_post.emplace(t.post.post_id, t).second) throw FormatError("duplicate post id " + t.post.post_id);
  }
  const Index index = build_post_index(triples);
  std::vector<CandidateSet> sets;
  std::size_t padded = 0, short_sets = 0;
  for (const auto& [id, t] : by_post) {
    sets.push_back(generate_candidates(index, by_post, id, k));
    if (sets.back().padded > 0) ++padded;
    if (sets.back().size() < k) ++short_sets;
  }
  if (short_sets > 0) {
    err << "warning: corpus has fewer than k=" << k << " posts; " << short_sets << " candidate sets are smaller\n";
  }
  if (padded > 0) err << "warning: " << padded << " candidate sets include zero-score padding\n";
  auto out = open_out(a.out, std::ios::out | std::ios::binary);
  write_candidate_sets(out, sets);
  finish(out, a.out);
  if (!a.index_out.empty()) {
    auto f = open_out(a.index_out, std::ios::out | std::ios::binary);
    index.save(f);
    finish(f, a.index_out);
  }
  return kExitOk;
}

// ---- train ----------------------------------------------------------------

struct TrainArgs {
  std::string candidates, tune, embeddings, model, out, log;
};

std::unique_ptr<TrainableRanker> initial_neural_model(const std::string& model, const Config& c, std::size_t dim) {
  Rng init = Rng(static_cast<std::uint64_t>(c.get_int("seed"))).substream("init");
  const FfInit ff_init = c.get_string("ff_init") == "glorot" ? FfInit::glorot : FfInit::uniform;
  if (model == "evpi") {
    const EvpiShape shape{dim, c.get_size("hidden_dim"), c.get_size("ff_hidden_dim"), c.get_size("ff_layers")};
    EvpiOptions opt{c.get_bool("clamp_negative_sim")};
    return std::make_unique<EvpiRanker>(EvpiParams::initialized(shape, init, ff_init), opt);
  }
  const NeuralShape shape{dim, c.get_size("hidden_dim"), c.get_size("ff_hidden_dim"),
                          c.get_size("baseline_ff_layers")};
  return std::make_unique<NeuralBaselineRanker>(
      NeuralBaselineParams::initialized(*neural_variant(model), shape, init, ff_init));
}

int cmd_train(const TrainArgs& a, const Config& c, std::size_t threads, std::ostream& err) {
  check_model_name(a.model);
  const std::uint64_t seed = static_cast<std::uint64_t>(c.get_int("seed"));
  auto out_path = a.out;
  if (a.model == "random") {
    load_candidates(a.candidates);
    auto out = open_out(out_path, std::ios::out | std::ios::binary);
    save_checkpoint(out, "random", {{"seed", std::to_string(seed)}}, {});
    finish(out, out_path);
    return kExitOk;
  }
  if (a.embeddings.empty()) throw UsageError("--embeddings is required for model " + a.model);
  const auto all_sets = load_candidates(a.candidates);
  std::vector<CandidateSet> train_sets, tune_sets;
  if (!a.tune.empty()) {
    train_sets = all_sets;
    tune_sets = load_candidates(a.tune);
  } else {
    for (const auto& s : all_sets) {
      const int b = split_bucket(s.post_id);
      if (b < 8) {
        train_sets.push_back(s);
      } else if (b == 8) {
        tune_sets.push_back(s);
      }
    }
    err << "# no --tune given: split by post id into " << train_sets.size() << " train / " << tune_sets.size()
        << " tune posts\n";
  }
  if (train_sets.empty()) throw UsageError("no training posts");
  const EmbeddingTable table = load_table(a.embeddings);
  const auto train = prepare_candidate_sets(table, train_sets);
  const auto tune = prepare_candidate_sets(table, tune_sets);

  std::string model_name = a.model;
  std::map<std::string, std::string> meta;
  TensorList tensors;
  std::unique_ptr<TrainableRanker> trained;
  NgramRanker ngram;
  CqaRanker cqa;
  if (a.model == "ngrams") {
    ngram = ngram_train(train, HingeConfig{c.get_size("ngram_epochs"), c.get_double("ngram_lr"), seed});
    tensors = ngram.parameters();
  } else if (a.model == "cqa") {
    std::vector<std::string> warnings;
    cqa = cqa_train(train, LogisticConfig{c.get_size("cqa_epochs"), c.get_double("cqa_lr")}, &warnings);
    for (const auto& w : warnings) err << "warning: " << w << '\n';
    tensors = cqa.parameters();
  } else {
    if (tune.empty()) throw UsageError("no tune posts; pass --tune");
    auto initial = initial_neural_model(a.model, c, table.dim());
    TrainConfig tc;
    tc.adam.lr = c.get_double("lr");
    tc.batch_size = c.get_size("batch_size");
    tc.epochs = c.get_size("epochs");
    tc.patience = c.get_size("patience");
    tc.seed = seed;
    tc.threads = threads;
    std::ofstream log_file;
    std::ostream* log = &err;
    if (!a.log.empty()) {
      log_file = open_out(a.log, std::ios::out | std::ios::binary);
      log = &log_file;
    }
    TrainResult result = train_ranker(*initial, train, tune, tc, log);
    err << "# best epoch " << result.best_epoch << '\n';
    trained = std::move(result.best);
    meta = trained->checkpoint_meta();
    tensors = trained->parameters();
  }
  auto out = open_out(out_path, std::ios::out | std::ios::binary);
  save_checkpoint(out, model_name, meta, tensors);
  finish(out, out_path);
  return kExitOk;
}

// ---- rank -----------------------------------------------------------------

struct RankArgs {
  std::string candidates, embeddings, checkpoint, out;
};

int cmd_rank(const RankArgs& a, std::ostream&) {
  const auto sets = load_candidates(a.candidates);
  auto ck_in = open_in(a.checkpoint, std::ios::in | std::ios::binary);
  const Checkpoint ckpt = load_checkpoint(ck_in);
  check_model_name(ckpt.model);

  std::unique_ptr<Ranker> ranker;
  std::unique_ptr<TrainableRanker> trainable;
  NgramRanker ngram;
  CqaRanker cqa;
  if (ckpt.model == "random") {
    ranker = std::make_unique<RandomRanker>(std::stoull(ckpt.meta_value("seed")));
  } else if (ckpt.model == "ngrams") {
    ckpt.restore_into(ngram.parameters());
    ranker = std::make_unique<NgramRanker>(ngram);
  } else if (ckpt.model == "cqa") {
    ckpt.restore_into(cqa.parameters());
    ranker = std::make_unique<CqaRanker>(cqa);
  } else if (ckpt.model == "evpi") {
    trainable = EvpiRanker::from_meta(ckpt.meta);
  } else {
    trainable = NeuralBaselineRanker::from_meta(*neural_variant(ckpt.model), ckpt.meta);
  }
  if (trainable) ckpt.restore_into(trainable->parameters());

  EmbeddingTable table;
  if (ckpt.model != "random") {
    if (a.embeddings.empty()) throw UsageError("--embeddings is required for model " + ckpt.model);
    table = load_table(a.embeddings);
    if (ckpt.meta.count("embed_dim") && ckpt.meta_value("embed_dim") != std::to_string(table.dim())) {
      throw UsageError("embedding dimension " + std::to_string(table.dim()) + " does not match the checkpoint (" +
                       ckpt.meta_value("embed_dim") + ")");
    }
  }
  const Ranker& r = trainable ? static_cast<const Ranker&>(*trainable) : *ranker;
  std::vector<RankedList> lists;
  for (const auto& s : sets) lists.push_back(r.rank(prepare_candidate_set(table, s)));
  auto out = open_out(a.out, std::ios::out | std::ios::binary);
  write_rankings(out, lists);
  finish(out, a.out);
  return kExitOk;
}

// ---- evaluate / significance ----------------------------------------------

struct LabelArgs {
  std::string candidates, annotations, mode = "original";
};

std::vector<LabelSet> load_labels(const LabelArgs& a, const Config& c, const std::vector<CandidateSet>& sets,
                                  std::ostream& err) {
  const LabelMode mode = label_mode_from_string(a.mode);
  std::vector<Annotation> annotations;
  if (mode != LabelMode::original) {
    if (a.annotations.empty()) throw UsageError("--annotations is required for mode " + a.mode);
    auto in = open_in(a.annotations);
    annotations = read_annotations(in);
  }
  LabelBuildReport report;
  auto labels = build_labelsets(annotations, sets, mode, label_mode_from_string(c.get_string("exclude_base")), &report);
  if (report.dropped_empty > 0) err << "warning: " << report.dropped_empty << " posts dropped with empty labels\n";
  return labels;
}

struct EvaluateArgs {
  LabelArgs labels;
  std::string rankings, out;
  bool random = false;
};

int cmd_evaluate(const EvaluateArgs& a, const Config& c, std::ostream& out, std::ostream& err) {
  const auto sets = load_candidates(a.labels.candidates);
  const auto labels = load_labels(a.labels, c, sets, err);
  MetricReport report;
  if (a.random) {
    report = random_rank_metrics(sets, labels, c.get_size("n_perm"), static_cast<std::uint64_t>(c.get_int("seed")));
    report.mode = a.labels.mode;
  } else {
    if (a.rankings.empty()) throw UsageError("--rankings or --random is required");
    auto in = open_in(a.rankings);
    const auto rankings = read_rankings(in);
    const std::string model = rankings.empty() ? "" : rankings.front().model;
    report = evaluate(rankings, labels, model, a.labels.mode);
  }
  if (!a.out.empty()) {
    auto f = open_out(a.out, std::ios::out | std::ios::binary);
    f << report.to_json() << '\n';
    finish(f, a.out);
  }
  out << report.to_table();
  return kExitOk;
}

struct SignificanceArgs {
  LabelArgs labels;
  std::string rankings_a, rankings_b, metric = "p_at_1", out;
};

double pick_metric(const PostMetrics& m, const std::string& metric) {
  if (metric == "p_at_1") return m.p_at_1;
  if (metric == "p_at_3") return m.p_at_3;
  if (metric == "p_at_5") return m.p_at_5;
  if (metric == "map") return m.average_precision;
  throw UsageError("unknown metric '" + metric + "' (valid: p_at_1, p_at_3, p_at_5, map)");
}

int cmd_significance(const SignificanceArgs& a, const Config& c, std::ostream& out, std::ostream& err) {
  pick_metric(PostMetrics{}, a.metric);
  const auto sets = load_candidates(a.labels.candidates);
  const auto labels = load_labels(a.labels, c, sets, err);
  auto in_a = open_in(a.rankings_a);
  auto in_b = open_in(a.rankings_b);
  const auto ra = read_rankings(in_a);
  const auto rb = read_rankings(in_b);
  const auto pa = evaluate_posts(ra, labels);
  const auto pb = evaluate_posts(rb, labels);
  std::vector<double> xa, xb;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    xa.push_back(pick_metric(pa[i], a.metric));
    xb.push_back(pick_metric(pb[i], a.metric));
  }
  const double p = bootstrap_test(xa, xb, c.get_size("bootstrap_samples"), static_cast<std::uint64_t>(c.get_int("seed")));
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
  };
  nlohmann::ordered_json j;
  j["metric"] = a.metric;
  j["mode"] = a.labels.mode;
  j["n_posts"] = xa.size();
  j["mean_a"] = mean(xa);
  j["mean_b"] = mean(xb);
  j["p_value"] = p;
  const std::string line = j.dump();
  if (!a.out.empty()) {
    auto f = open_out(a.out, std::ios::out | std::ios::binary);
    f << line << '\n';
    finish(f, a.out);
  }
  out << line << '\n';
  return kExitOk;
}

// ---- gradcheck / agreement ------------------------------------------------

struct GradcheckArgs {
  std::size_t draws = 10;
  std::size_t probes = 25;
};

int cmd_gradcheck(const GradcheckArgs& a, const Config& c, std::ostream& out) {
  const auto entries = run_gradient_suite(static_cast<std::uint64_t>(c.get_int("seed")), a.draws, a.probes);
  bool ok = true;
  char buf[160];
  for (const auto& e : entries) {
    std::snprintf(buf, sizeof buf, "%-20s draws=%-3zu max_rel_err=%.3e %s\n", e.component.c_str(), e.draws,
                  e.max_relative_error, e.passed() ? "PASS" : "FAIL");
    out << buf;
    ok = ok && e.passed();
  }
  return ok ? kExitOk : kExitFailure;
}

int cmd_agreement(const std::string& path, std::ostream& out) {
  auto in = open_in(path);
  const auto annotations = read_annotations(in);
  std::map<std::string, std::vector<const Annotation*>> grouped;
  for (const auto& a : annotations) grouped[a.post_id].push_back(&a);
  std::vector<int> best_a, best_b, valid_a, valid_b;
  std::map<std::size_t, std::size_t> overlap_histogram;
  for (const auto& [id, group] : grouped) {
    if (group.size() != 2) throw UsageError("post " + id + " needs exactly two annotations");
    best_a.push_back(static_cast<int>(group[0]->best));
    best_b.push_back(static_cast<int>(group[1]->best));
    std::size_t shared = 0;
    for (std::size_t k = 0; k < 10; ++k) {
      const bool va = std::binary_search(group[0]->valid.begin(), group[0]->valid.end(), k);
      const bool vb = std::binary_search(group[1]->valid.begin(), group[1]->valid.end(), k);
      valid_a.push_back(va);
      valid_b.push_back(vb);
      shared += va && vb;
    }
    ++overlap_histogram[shared];
  }
  nlohmann::ordered_json j;
  j["n_posts"] = grouped.size();
  j["best_kappa"] = best_a.empty() ? 0.0 : cohen_kappa(best_a, best_b);
  j["valid_kappa"] = valid_a.empty() ? 0.0 : cohen_kappa(valid_a, valid_b);
  nlohmann::ordered_json hist = nlohmann::ordered_json::object();
  for (const auto& [k, n] : overlap_histogram) hist[std::to_string(k)] = n;
  j["valid_intersection_sizes"] = hist;
  out << j.dump() << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rank clarification questions by expected value of perfect information"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Root random seed (overrides the config)");
  app.add_option("--threads", g.threads, "Worker threads for training")
      ->envname("EVPIRANK_THREADS")
      ->check(CLI::PositiveNumber);
  app.add_option("--config", g.config_path, "Config file of key = value lines");
  app.add_option("--set", g.assignments, "Override one config key (key=value); repeatable");

  IngestArgs ia;
  auto* ingest = app.add_subcommand("ingest", "Extract (post, question, answer) triples from a dump");
  ingest->add_option("--posts", ia.posts, "posts.jsonl")->required();
  ingest->add_option("--comments", ia.comments, "comments.jsonl")->required();
  ingest->add_option("--history", ia.history, "history.jsonl")->required();
  ingest->add_option("--embeddings", ia.embeddings, "Word vectors used to choose between edit and comment answers");
  ingest->add_option("--rhetorical", ia.rhetorical, "File of rhetorical question prefixes, one per line");
  ingest->add_option("--split-dir", ia.split_dir, "Also write train/tune/test.jsonl into this directory");
  ingest->add_option("--out", ia.out, "Output triples.jsonl")->required();

  CandidatesArgs ca;
  auto* candidates = app.add_subcommand("candidates", "Build candidate sets by TF-IDF retrieval");
  candidates->add_option("--triples", ca.triples, "triples.jsonl")->required();
  candidates->add_option("--k", ca.k, "Candidates per post (default: config 'candidates')");
  candidates->add_option("--index-out", ca.index_out, "Also save the retrieval index");
  candidates->add_option("--out", ca.out, "Output candidates.jsonl")->required();

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Train a ranking model");
  train->add_option("--candidates", ta.candidates, "Training candidates.jsonl")->required();
  train->add_option("--tune", ta.tune, "Tune candidates.jsonl (default: split the training file by post id)");
  train->add_option("--embeddings", ta.embeddings, "Word vectors");
  train->add_option("--model", ta.model, "One of: " + model_list())->required();
  train->add_option("--log", ta.log, "Training log (JSON lines; default stderr)");
  train->add_option("--out", ta.out, "Output checkpoint")->required();

  RankArgs ra;
  auto* rank = app.add_subcommand("rank", "Rank candidate questions with a trained model");
  rank->add_option("--candidates", ra.candidates, "candidates.jsonl")->required();
  rank->add_option("--embeddings", ra.embeddings, "Word vectors");
  rank->add_option("--checkpoint", ra.checkpoint, "Checkpoint from `train`")->required();
  rank->add_option("--out", ra.out, "Output rankings.jsonl")->required();

  auto add_label_options = [](CLI::App* cmd, LabelArgs& l) {
    cmd->add_option("--candidates", l.candidates, "candidates.jsonl")->required();
    cmd->add_option("--annotations", l.annotations, "annotations.jsonl");
    cmd->add_option("--mode", l.mode, "best_union, valid_intersection, original or exclude_original");
  };

  EvaluateArgs ea;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score rankings with p@1/3/5 and MAP");
  add_label_options(evaluate_cmd, ea.labels);
  evaluate_cmd->add_option("--rankings", ea.rankings, "rankings.jsonl");
  evaluate_cmd->add_flag("--random", ea.random, "Score the random baseline (averaged permutations)");
  evaluate_cmd->add_option("--out", ea.out, "Write the JSON report here");

  SignificanceArgs sa;
  auto* significance = app.add_subcommand("significance", "Paired bootstrap test between two rankings files");
  add_label_options(significance, sa.labels);
  significance->add_option("--rankings-a", sa.rankings_a, "First rankings.jsonl")->required();
  significance->add_option("--rankings-b", sa.rankings_b, "Second rankings.jsonl")->required();
  significance->add_option("--metric", sa.metric, "p_at_1, p_at_3, p_at_5 or map");
  significance->add_option("--out", sa.out, "Write the JSON result here");

  GradcheckArgs ga;
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of every trainable component");
  gradcheck->add_option("--draws", ga.draws, "Random parameter draws per component")->check(CLI::PositiveNumber);
  gradcheck->add_option("--probes", ga.probes, "Coordinates probed per draw")->check(CLI::PositiveNumber);

  std::string agreement_path;
  auto* agreement = app.add_subcommand("agreement", "Inter-annotator agreement (Cohen's kappa)");
  agreement->add_option("--annotations", agreement_path, "annotations.jsonl")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const Config config = resolve_config(g, err);
    if (ingest->parsed()) return cmd_ingest(ia, err);
    if (candidates->parsed()) return cmd_candidates(ca, config, err);
    if (train->parsed()) return cmd_train(ta, config, g.threads, err);
    if (rank->parsed()) return cmd_rank(ra, err);
    if (evaluate_cmd->parsed()) return cmd_evaluate(ea, config, out, err);
    if (significance->parsed()) return cmd_significance(sa, config, out, err);
    if (gradcheck->parsed()) return cmd_gradcheck(ga, config, out);
    if (agreement->parsed()) return cmd_agreement(agreement_path, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace evpirank
