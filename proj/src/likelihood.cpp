#include "pbct/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pbct/errors.hpp"

namespace pbct {

namespace {

void require_eta(std::span<const double> eta, int vocab_size) {
  if (static_cast<int>(eta.size()) != vocab_size) {
    throw InvalidParameter("eta has " + std::to_string(eta.size()) + " entries, expected " +
                           std::to_string(vocab_size));
  }
  for (double e : eta) {
    if (!(e > 0.0)) throw InvalidParameter("eta entries must be positive");
  }
}

}  // namespace

CountTable compute_counts(const ContextTree& tree, const SequenceCorpus& corpus, int burn_in) {
  if (burn_in < tree.max_depth()) {
    throw InvalidParameter("burn-in " + std::to_string(burn_in) + " is shorter than max depth");
  }
  if (corpus.vocab.size() != tree.vocab_size()) {
    throw InvalidParameter("corpus vocabulary size differs from the tree's");
  }
  corpus.validate();
  const LeafRouter router(tree);
  const auto V = static_cast<std::size_t>(tree.vocab_size());
  std::vector<std::int64_t> dense(router.leaf_count() * V, 0);
  for (const auto& seq : corpus.sequences) {
    for (std::size_t n = static_cast<std::size_t>(burn_in); n < seq.size(); ++n) {
      const std::size_t leaf = router.route(seq, n);
      ++dense[leaf * V + static_cast<std::size_t>(seq[n] - 1)];
    }
  }
  CountTable table;
  table.vocab_size = tree.vocab_size();
  for (std::size_t id = 0; id < router.leaf_count(); ++id) {
    table.counts.emplace_hint(table.counts.end(), router.leaf_index(id),
                              CountVector(dense.begin() + static_cast<std::ptrdiff_t>(id * V),
                                          dense.begin() + static_cast<std::ptrdiff_t>((id + 1) * V)));
  }
  return table;
}

CountTable compute_counts(const ContextTree& tree, const SequenceCorpus& corpus) {
  return compute_counts(tree, corpus, tree.max_depth());
}

double log_multivariate_beta(std::span<const double> values) {
  if (values.empty()) throw InvalidParameter("multivariate beta of an empty vector");
  double sum = 0.0;
  double out = 0.0;
  for (double v : values) {
    if (!(v > 0.0)) throw InvalidParameter("multivariate beta needs positive entries");
    out += std::lgamma(v);
    sum += v;
  }
  return out - std::lgamma(sum);
}

double log_beta_ratio(std::span<const std::int64_t> counts, std::span<const double> eta) {
  if (counts.size() != eta.size()) throw InvalidParameter("count and eta dimensions differ");
  double out = 0.0;
  double eta_sum = 0.0;
  std::int64_t n = 0;
  for (std::size_t v = 0; v < counts.size(); ++v) {
    eta_sum += eta[v];
    if (counts[v] < 0) throw InvalidParameter("negative count");
    if (counts[v] == 0) continue;
    n += counts[v];
    out += std::lgamma(static_cast<double>(counts[v]) + eta[v]) - std::lgamma(eta[v]);
  }
  if (n == 0) return 0.0;
  return out - (std::lgamma(static_cast<double>(n) + eta_sum) - std::lgamma(eta_sum));
}

LogLikelihoodReport log_marginal_likelihood(const CountTable& counts, std::span<const double> eta) {
  require_eta(eta, counts.vocab_size);
  LogLikelihoodReport r;
  for (const auto& [e, x] : counts.counts) {
    const double lp = log_beta_ratio(x, eta);
    r.per_leaf.emplace(e, lp);
    r.total_log_ml += lp;
    r.n_scored += std::accumulate(x.begin(), x.end(), std::int64_t{0});
  }
  return r;
}

LogLikelihoodReport log_predictive_likelihood(const CountTable& train, const CountTable& test,
                                              std::span<const double> eta) {
  if (train.vocab_size != test.vocab_size) throw InvalidParameter("count tables differ in vocabulary size");
  require_eta(eta, test.vocab_size);
  if (train.counts.size() != test.counts.size()) {
    throw InvalidParameter("train and test tables are keyed by different leaves");
  }
  LogLikelihoodReport r;
  std::vector<double> prior(eta.size());
  for (auto it_test = test.counts.begin(), it_train = train.counts.begin(); it_test != test.counts.end();
       ++it_test, ++it_train) {
    if (it_test->first != it_train->first) {
      throw InvalidParameter("leaf " + it_test->first.to_string() + " missing from training table");
    }
    const auto& xt = it_test->second;
    const auto& xr = it_train->second;
    std::int64_t n_test = 0;
    for (std::size_t v = 0; v < eta.size(); ++v) {
      prior[v] = static_cast<double>(xr[v]) + eta[v];
      n_test += xt[v];
    }
    const double lp = log_beta_ratio(xt, prior);
    r.per_leaf.emplace(it_test->first, lp);
    r.total_log_ml += lp;
    r.n_scored += n_test;
  }
  return r;
}

std::vector<double> posterior_mean(std::span<const std::int64_t> counts, std::span<const double> eta) {
  if (counts.size() != eta.size()) throw InvalidParameter("count and eta dimensions differ");
  std::vector<double> out(counts.size());
  double total = 0.0;
  for (std::size_t v = 0; v < counts.size(); ++v) {
    out[v] = static_cast<double>(counts[v]) + eta[v];
    total += out[v];
  }
  for (double& p : out) p /= total;
  return out;
}

std::vector<double> predict_next(const ContextTree& tree, const CountTable& train,
                                 std::span<const double> eta, std::span<const Symbol> history) {
  require_eta(eta, tree.vocab_size());
  if (static_cast<int>(history.size()) < tree.max_depth()) {
    throw InsufficientHistory("prediction needs " + std::to_string(tree.max_depth()) + " history symbols, got " +
                              std::to_string(history.size()));
  }
  const NodeIndex leaf = map_context_to_leaf(tree, history);
  auto it = train.counts.find(leaf);
  if (it == train.counts.end()) {
    const CountVector zero(eta.size(), 0);
    return posterior_mean(zero, eta);
  }
  return posterior_mean(it->second, eta);
}

double chain_rule_log_prob(const ContextTree& tree, std::span<const double> eta,
                           std::span<const Symbol> sequence) {
  SequenceCorpus corpus{tree.vocab(), {Sequence(sequence.begin(), sequence.end())}};
  return chain_rule_log_prob(tree, eta, corpus);
}

double chain_rule_log_prob(const ContextTree& tree, std::span<const double> eta,
                           const SequenceCorpus& corpus) {
  require_eta(eta, tree.vocab_size());
  corpus.validate();
  const double eta_sum = std::accumulate(eta.begin(), eta.end(), 0.0);
  std::map<NodeIndex, std::vector<double>> seen;
  double lp = 0.0;
  std::vector<Symbol> history;
  for (const auto& seq : corpus.sequences) {
    for (std::size_t n = static_cast<std::size_t>(tree.max_depth()); n < seq.size(); ++n) {
      const auto first = seq.rbegin() + static_cast<std::ptrdiff_t>(seq.size() - n);
      history.assign(first, first + tree.max_depth());
      const NodeIndex leaf = map_context_to_leaf(tree, history);
      auto [it, _] = seen.try_emplace(leaf, std::vector<double>(eta.size() + 1, 0.0));
      auto& c = it->second;  // c[V] holds the running total
      const auto v = static_cast<std::size_t>(seq[n] - 1);
      lp += std::log((c[v] + eta[v]) / (c.back() + eta_sum));
      c[v] += 1.0;
      c.back() += 1.0;
    }
  }
  return lp;
}

}  // namespace pbct
