#include "cli.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "pbct/corpus_io.hpp"
#include "pbct/errors.hpp"
#include "pbct/experiment.hpp"
#include "pbct/generator.hpp"
#include "pbct/inference.hpp"
#include "pbct/likelihood.hpp"
#include "pbct/metrics.hpp"
#include "pbct/model_io.hpp"

namespace pbct::cli {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitIo = 2;

std::string fixed5(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.5f", x);
  return buf;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw IoError("cannot write '" + out_path + "'");
  f << text;
  if (!f) throw IoError("write failure on '" + out_path + "'");
}

/// Corpus read against a model's vocabulary.
SequenceCorpus read_for_model(const std::string& path, const Vocabulary& vocab) {
  return vocab.has_labels() ? read_corpus(path, CorpusFormat::kTokens, vocab)
                            : read_corpus(path, CorpusFormat::kIntegers, vocab);
}

struct ModelFlags {
  int vocab_size = 10;
  double alpha = 1.0;
  double decay = 1.0;
  int max_depth = 3;
  double eta = 1.0;
  std::uint64_t seed = 1;

  void add_to(CLI::App* app, bool with_vocab) {
    if (with_vocab) app->add_option("--vocab-size", vocab_size, "vocabulary size V")->check(CLI::PositiveNumber);
    app->add_option("--alpha", alpha, "CRP rate at the root")->capture_default_str();
    app->add_option("--decay", decay, "geometric decay of alpha per depth, in (0, 1]")->capture_default_str();
    app->add_option("--max-depth", max_depth, "maximum tree depth D")->capture_default_str();
    app->add_option("--eta", eta, "symmetric Dirichlet concentration")->capture_default_str();
    app->add_option("--seed", seed, "random seed")->capture_default_str();
  }
};

int cmd_simulate(const ModelFlags& f, double lambda, std::size_t length, int sequences, const std::string& out_path,
                 const std::string& tree_out, std::ostream& out) {
  if (sequences < 1) throw InvalidParameter("--sequences must be >= 1");
  const Vocabulary vocab(f.vocab_size);
  const Hyperparams hyper = Hyperparams::symmetric(f.vocab_size, f.eta, f.alpha, f.max_depth, f.decay);
  const Rng root(f.seed);
  Rng tree_rng = root.split(0);
  const ContextTree tree = generate_tree(vocab, hyper, tree_rng);
  Rng dist_rng = root.split(1);
  const auto dists = sample_leaf_distributions(tree, hyper, lambda, dist_rng);
  SequenceCorpus corpus{vocab, {}};
  for (int i = 0; i < sequences; ++i) {
    Rng seq_rng = root.split(2 + static_cast<std::uint64_t>(i));
    corpus.sequences.push_back(simulate_sequence(tree, dists, length, seq_rng));
  }
  std::ostringstream text;
  write_corpus(text, corpus);
  emit(text.str(), out_path, out);
  if (!tree_out.empty()) {
    ModelFile m;
    m.hyper = hyper;
    m.tree = tree;
    m.train_counts = CountTable::zeros(tree);
    m.provenance = {"simulated", f.seed, "", corpus_digest(corpus)};
    write_model(tree_out, m);
  }
  return kExitOk;
}

int cmd_fit(const ModelFlags& f, bool vocab_given, bool tokens, const std::string& train_path,
            const std::string& model_name, std::int64_t min_context_count, std::uint64_t max_leaves,
            const std::string& timestamp, const std::string& out_path, std::ostream& out) {
  SequenceCorpus corpus;
  if (tokens) {
    corpus = read_corpus(train_path, CorpusFormat::kTokens);
  } else {
    if (!vocab_given) throw InvalidParameter("integer corpora need --vocab-size (or pass --tokens)");
    corpus = read_corpus(train_path, CorpusFormat::kIntegers, Vocabulary(f.vocab_size));
  }
  const ModelSpec spec = ModelSpec::parse(model_name);
  const int V = corpus.vocab.size();
  int depth = f.max_depth;
  if (spec.kind == ModelSpec::Kind::kFbm) {
    if (fbm_leaf_count(V, spec.order) > max_leaves) {
      throw InvalidParameter(spec.name() + " would have more than " + std::to_string(max_leaves) + " leaves");
    }
    depth = spec.order;
  }
  FitConfig config{Hyperparams::symmetric(V, f.eta, f.alpha, depth, f.decay), TieBreak::kLexicographicMin,
                   min_context_count};
  config.hyper.validate(V);
  ModelFile m;
  m.hyper = config.hyper;
  m.tree = fit_model(spec, corpus, config);
  m.train_counts = compute_counts(m.tree, corpus);
  m.provenance = {spec.name(), f.seed, timestamp.empty() ? utc_now() : timestamp, corpus_digest(corpus)};
  emit(serialize_model(m), out_path, out);
  if (!out_path.empty()) {
    out << "model\t" << spec.name() << "\nL\t" << leaf_count(m.tree) << "\nrealized_depth\t" << m.tree.realized_depth()
        << "\n";
  }
  return kExitOk;
}

int cmd_predict(const std::string& model_path, const std::string& history_text, std::ostream& out) {
  const ModelFile m = read_model(model_path);
  std::istringstream hs(history_text);
  const SequenceCorpus h = read_corpus(hs, m.tree.vocab().has_labels() ? CorpusFormat::kTokens : CorpusFormat::kIntegers,
                                       m.tree.vocab());
  Sequence recent;
  for (const auto& seq : h.sequences) recent.insert(recent.end(), seq.begin(), seq.end());
  std::reverse(recent.begin(), recent.end());  // most recent first
  const auto probs = predict_next(m.tree, m.train_counts, m.hyper.eta, recent);
  for (std::size_t v = 0; v < probs.size(); ++v) {
    out << m.tree.vocab().label(static_cast<Symbol>(v + 1)) << '\t' << fixed5(probs[v]) << '\n';
  }
  return kExitOk;
}

int cmd_evaluate(const std::string& model_path, const std::string& test_path, std::ostream& out) {
  const ModelFile m = read_model(model_path);
  const SequenceCorpus test = read_for_model(test_path, m.tree.vocab());
  const CountTable test_counts = compute_counts(m.tree, test);
  const auto report = log_predictive_likelihood(m.train_counts, test_counts, m.hyper.eta);
  if (report.n_scored == 0) throw NoScorablePositions("test corpus has no positions after the burn-in");
  out << "marginal_log_loss\t" << fixed5(-report.total_log_ml / static_cast<double>(report.n_scored)) << '\n'
      << "n_scored\t" << report.n_scored << '\n'
      << "L\t" << leaf_count(m.tree) << '\n';
  return kExitOk;
}

int cmd_similarity(const std::string& path_a, const std::string& path_b, const std::string& corpus_path,
                   std::ostream& out) {
  const ModelFile a = read_model(path_a);
  const ModelFile b = read_model(path_b);
  if (a.tree.vocab().size() != b.tree.vocab().size()) throw MismatchedUniverse("models use different vocabularies");
  const SequenceCorpus corpus = read_for_model(corpus_path, a.tree.vocab());
  out << "depth\tsimilarity\n";
  for (int depth = 1; depth <= a.tree.max_depth(); ++depth) {
    out << depth << '\t';
    try {
      out << fixed5(tree_similarity(a.tree, b.tree, corpus, depth)) << '\n';
    } catch (const DepthUnavailable&) {
      out << "NA\n";
    }
  }
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Parsimonious Bayesian context trees: simulate, fit, predict and evaluate"};
  app.require_subcommand(1);

  ModelFlags sim_flags;
  double lambda = 0.0;
  std::size_t length = 10000;
  int sequences = 1;
  std::string out_path, tree_out;
  auto* sim = app.add_subcommand("simulate", "generate a random tree and simulate sequences from it");
  sim_flags.add_to(sim, true);
  sim->add_option("--lambda", lambda, "weight of the uniform component")->capture_default_str();
  sim->add_option("--length", length, "symbols per sequence")->capture_default_str();
  sim->add_option("--sequences", sequences, "number of sequences")->capture_default_str();
  sim->add_option("--out", out_path, "corpus output path (default stdout)");
  sim->add_option("--tree-out", tree_out, "also write the generating tree as a model file");

  ModelFlags fit_flags;
  bool tokens = false;
  std::string train_path, model_name = "pbct", timestamp;
  std::int64_t min_context_count = 0;
  std::uint64_t max_leaves = 1000000;
  auto* fit = app.add_subcommand("fit", "fit a model to a training corpus");
  fit_flags.add_to(fit, true);
  fit->add_option("--train", train_path, "training corpus")->required();
  fit->add_flag("--tokens", tokens, "corpus holds whitespace-separated tokens");
  fit->add_option("--model", model_name, "pbct | vbm | fbm:<d>")->capture_default_str();
  fit->add_option("--min-context-count", min_context_count, "stop splitting below this many positions")
      ->capture_default_str();
  fit->add_option("--max-leaves", max_leaves, "refuse FBM trees with more leaves")->capture_default_str();
  fit->add_option("--timestamp", timestamp, "fit timestamp to record (default: now, UTC)");
  fit->add_option("--out", out_path, "model output path (default stdout)");

  std::string model_path, history;
  auto* predict = app.add_subcommand("predict", "next-symbol distribution after a history");
  predict->add_option("--model-file", model_path, "model file")->required();
  predict->add_option("--history", history, "recent symbols, oldest first, space separated")->required();

  std::string test_path;
  auto* evaluate = app.add_subcommand("evaluate", "marginal log-loss of a test corpus");
  evaluate->add_option("--model-file", model_path, "model file")->required();
  evaluate->add_option("--test", test_path, "test corpus")->required();

  std::string model_b, corpus_path;
  auto* similarity = app.add_subcommand("similarity", "depth-wise tree similarity of model A against model B");
  similarity->add_option("--model-a", model_path, "model A (the tree whose contexts are weighted)")->required();
  similarity->add_option("--model-b", model_b, "model B")->required();
  similarity->add_option("--corpus", corpus_path, "corpus used for context weights")->required();

  ExperimentConfig ecfg;
  std::string models_list = "pbct";
  auto* experiment = app.add_subcommand("experiment", "simulation-recovery experiment over replicates");
  experiment->add_option("--vocab-size", ecfg.vocab_size, "vocabulary size V")->capture_default_str();
  experiment->add_option("--alpha", ecfg.alpha, "CRP rate at the root")->capture_default_str();
  experiment->add_option("--decay", ecfg.decay, "geometric decay of alpha per depth")->capture_default_str();
  experiment->add_option("--max-depth", ecfg.max_depth, "maximum tree depth D")->capture_default_str();
  experiment->add_option("--eta", ecfg.eta, "symmetric Dirichlet concentration")->capture_default_str();
  experiment->add_option("--lambda", ecfg.lambda, "weight of the uniform component")->capture_default_str();
  experiment->add_option("--train-length", ecfg.train_length, "training symbols")->capture_default_str();
  experiment->add_option("--test-length", ecfg.test_length, "test symbols")->capture_default_str();
  experiment->add_option("--replicates", ecfg.replicates, "number of simulated models")->capture_default_str();
  experiment->add_option("--seed", ecfg.seed, "random seed")->capture_default_str();
  experiment->add_option("--models", models_list, "comma-separated: pbct,vbm,fbm:<d>")->capture_default_str();
  experiment->add_option("--max-leaves", ecfg.max_leaves, "skip FBM models with more leaves")->capture_default_str();
  experiment->add_option("--threads", ecfg.threads, "worker threads (0 = all cores)")->capture_default_str();
  experiment->add_option("--out", out_path, "report path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kExitInvalid;
  }

  try {
    if (*sim) return cmd_simulate(sim_flags, lambda, length, sequences, out_path, tree_out, out);
    if (*fit) {
      return cmd_fit(fit_flags, fit->count("--vocab-size") > 0, tokens, train_path, model_name, min_context_count,
                     max_leaves, timestamp, out_path, out);
    }
    if (*predict) return cmd_predict(model_path, history, out);
    if (*evaluate) return cmd_evaluate(model_path, test_path, out);
    if (*similarity) return cmd_similarity(model_path, model_b, corpus_path, out);
    if (*experiment) {
      ecfg.models.clear();
      std::stringstream ss(models_list);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (!item.empty()) ecfg.models.push_back(ModelSpec::parse(item));
      }
      emit(format_report(run_experiment(ecfg)), out_path, out);
      return kExitOk;
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitInvalid;
}

}  // namespace pbct::cli
