#include "pbct/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <thread>

#include "pbct/errors.hpp"
#include "pbct/generator.hpp"
#include "pbct/metrics.hpp"

namespace pbct {

namespace {

std::string fixed5(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.5f", x);
  std::string out = buf;
  if (out == "-0.00000") out.erase(0, 1);
  return out;
}

ContextTree with_max_depth(const ContextTree& t, int depth) {
  return ContextTree(t.vocab(), depth, t.children(), t.leaves());
}

std::vector<ReportRow> run_replicate(const ExperimentConfig& cfg, int replicate) {
  const Rng rep = Rng(cfg.seed).split(static_cast<std::uint64_t>(replicate));
  const Vocabulary vocab(cfg.vocab_size);
  const Hyperparams hyper = Hyperparams::symmetric(cfg.vocab_size, cfg.eta, cfg.alpha, cfg.max_depth, cfg.decay);

  Rng tree_rng = rep.split(0);
  const ContextTree truth = generate_tree(vocab, hyper, tree_rng);
  Rng dist_rng = rep.split(1);
  const LeafDistributionTable dists = sample_leaf_distributions(truth, hyper, cfg.lambda, dist_rng);
  Rng seq_rng = rep.split(2);
  const Sequence x = simulate_sequence(truth, dists, cfg.train_length + cfg.test_length, seq_rng);
  const auto split = x.begin() + static_cast<std::ptrdiff_t>(cfg.train_length);
  const SequenceCorpus train{vocab, {Sequence(x.begin(), split)}};
  const SequenceCorpus test{vocab, {Sequence(split, x.end())}};

  // Every model is scored on the same positions: burn-in is the deepest
  // maximum depth among the truth and the requested FBM orders.
  int burn_in = cfg.max_depth;
  for (const auto& m : cfg.models) {
    if (m.kind == ModelSpec::Kind::kFbm) burn_in = std::max(burn_in, m.order);
  }
  const ContextTree scored_truth = with_max_depth(truth, burn_in);

  std::vector<ReportRow> rows;
  const int r1 = replicate + 1;
  const double simulated = marginal_log_loss(scored_truth, train, test, hyper.eta);
  rows.push_back({r1, "simulated", "marginal_log_loss", simulated, {}});
  rows.push_back({r1, "simulated", "true_log_loss", true_log_loss(scored_truth, dists, test), {}});
  rows.push_back({r1, "simulated", "L", static_cast<double>(leaf_count(truth)), {}});

  const FitConfig fit_config{hyper, TieBreak::kLexicographicMin, 0};
  for (const auto& spec : cfg.models) {
    const std::string name = spec.name();
    if (spec.kind == ModelSpec::Kind::kFbm && fbm_leaf_count(cfg.vocab_size, spec.order) > cfg.max_leaves) {
      rows.push_back({r1, name, "skipped", std::nullopt,
                      "leaf count exceeds max-leaves " + std::to_string(cfg.max_leaves)});
      continue;
    }
    const ContextTree fitted = with_max_depth(fit_model(spec, train, fit_config), burn_in);
    const double loss = marginal_log_loss(fitted, train, test, hyper.eta);
    rows.push_back({r1, name, "marginal_log_loss", loss, {}});
    rows.push_back({r1, name, "delta_log_loss", loss - simulated, {}});
    for (int depth = 1; depth <= cfg.max_depth; ++depth) {
      const std::string metric = "similarity_d" + std::to_string(depth);
      try {
        rows.push_back({r1, name, metric, tree_similarity(fitted, scored_truth, train, depth), {}});
      } catch (const DepthUnavailable&) {
        rows.push_back({r1, name, metric, std::nullopt, "NA"});
      }
    }
    rows.push_back({r1, name, "L", static_cast<double>(leaf_count(fitted)), {}});
  }
  return rows;
}

}  // namespace

ModelSpec ModelSpec::parse(std::string_view text) {
  if (text == "pbct") return {Kind::kPbct, 0};
  if (text == "vbm") return {Kind::kVbm, 0};
  if (text.starts_with("fbm:")) {
    const auto digits = text.substr(4);
    int order = -1;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), order);
    if (ec == std::errc() && ptr == digits.data() + digits.size() && order >= 0) return {Kind::kFbm, order};
  }
  throw InvalidParameter("unknown model '" + std::string(text) + "' (expected pbct, vbm or fbm:<d>)");
}

std::string ModelSpec::name() const {
  switch (kind) {
    case Kind::kPbct:
      return "pbct";
    case Kind::kVbm:
      return "vbm";
    case Kind::kFbm:
      return "fbm:" + std::to_string(order);
  }
  return "?";
}

ContextTree fit_model(const ModelSpec& spec, const SequenceCorpus& corpus, const FitConfig& config) {
  switch (spec.kind) {
    case ModelSpec::Kind::kPbct:
      return fit_pbct(corpus, config);
    case ModelSpec::Kind::kVbm:
      return fit_vbm(corpus, config);
    case ModelSpec::Kind::kFbm:
      return build_fbm(corpus.vocab, spec.order);
  }
  throw InvalidParameter("unknown model kind");
}

void ExperimentConfig::validate() const {
  if (vocab_size < 1) throw InvalidParameter("vocab size must be >= 1");
  if (max_depth < 0) throw InvalidParameter("max depth must be >= 0");
  Hyperparams::symmetric(vocab_size, eta, alpha, max_depth, decay).validate(vocab_size);
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidParameter("lambda must lie in [0, 1]");
  if (replicates < 1) throw InvalidParameter("replicates must be >= 1");
  if (train_length < 1 || test_length < 1) throw InvalidParameter("train and test lengths must be >= 1");
  if (models.empty()) throw InvalidParameter("no models requested");
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto n = static_cast<std::size_t>(config.replicates);
  std::vector<std::vector<ReportRow>> per_replicate(n);
  std::vector<std::exception_ptr> errors(n);
  unsigned workers = config.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : config.threads;
  workers = std::min<unsigned>(workers, static_cast<unsigned>(n));

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t r = next++; r < n; r = next++) {
      try {
        per_replicate[r] = run_replicate(config, static_cast<int>(r));
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  ExperimentReport report;
  report.config = config;
  for (auto& rows : per_replicate) {
    report.rows.insert(report.rows.end(), std::make_move_iterator(rows.begin()), std::make_move_iterator(rows.end()));
  }
  return report;
}

std::vector<double> ExperimentReport::values(std::string_view model, std::string_view metric) const {
  std::vector<double> out;
  for (const auto& row : rows) {
    if (row.model == model && row.metric == metric && row.value) out.push_back(*row.value);
  }
  return out;
}

Summary summarize(std::span<const double> values) {
  Summary s;
  s.n = values.size();
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  s.median = s.n % 2 ? sorted[s.n / 2] : 0.5 * (sorted[s.n / 2 - 1] + sorted[s.n / 2]);
  return s;
}

std::string format_report(const ExperimentReport& report) {
  const auto& c = report.config;
  std::ostringstream os;
  os << "# V=" << c.vocab_size << " alpha=" << fixed5(c.alpha) << " decay=" << fixed5(c.decay) << " D=" << c.max_depth
     << " eta=" << fixed5(c.eta) << " lambda=" << fixed5(c.lambda) << " train=" << c.train_length
     << " test=" << c.test_length << " replicates=" << c.replicates << " seed=" << c.seed << "\n";
  os << "replicate\tmodel\tmetric\tvalue\n";
  for (const auto& row : report.rows) {
    os << row.replicate << '\t' << row.model << '\t' << row.metric << '\t'
       << (row.value ? fixed5(*row.value) : (row.note.empty() ? std::string("NA") : row.note)) << '\n';
  }

  // Summary in first-appearance order of (model, metric).
  std::vector<std::pair<std::string, std::string>> keys;
  for (const auto& row : report.rows) {
    if (row.metric == "skipped") continue;
    std::pair<std::string, std::string> k{row.model, row.metric};
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(std::move(k));
  }
  os << "# summary\nmodel\tmetric\tmean\tsd\tmedian\tn\n";
  for (const auto& [model, metric] : keys) {
    const auto vals = report.values(model, metric);
    const Summary s = summarize(vals);
    os << model << '\t' << metric << '\t';
    if (s.n == 0) {
      os << "NA\tNA\tNA\t0\n";
    } else {
      os << fixed5(s.mean) << '\t' << fixed5(s.sd) << '\t' << fixed5(s.median) << '\t' << s.n << '\n';
    }
  }

  // Simulated / fitted / difference with standard deviations, one line per model.
  const Summary sim = summarize(report.values("simulated", "marginal_log_loss"));
  os << "# log-loss table\nmodel\tsimulated\tfitted\tdifference\n";
  for (const auto& m : c.models) {
    const auto fitted = report.values(m.name(), "marginal_log_loss");
    if (fitted.empty()) {
      os << m.name() << "\tskipped\n";
      continue;
    }
    const Summary f = summarize(fitted);
    const Summary d = summarize(report.values(m.name(), "delta_log_loss"));
    os << m.name() << '\t' << fixed5(sim.mean) << " (" << fixed5(sim.sd) << ")\t" << fixed5(f.mean) << " ("
       << fixed5(f.sd) << ")\t" << fixed5(d.mean) << " (" << fixed5(d.sd) << ")\n";
  }
  return os.str();
}

}  // namespace pbct
