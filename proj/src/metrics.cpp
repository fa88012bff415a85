#include "pbct/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "pbct/errors.hpp"
#include "pbct/likelihood.hpp"

namespace pbct {

namespace {

double choose2(double n) { return n * (n - 1.0) / 2.0; }

}  // namespace

double marginal_log_loss(const ContextTree& tree, const SequenceCorpus& train, const SequenceCorpus& test,
                         std::span<const double> eta) {
  const CountTable train_counts = compute_counts(tree, train);
  const CountTable test_counts = compute_counts(tree, test);
  const auto report = log_predictive_likelihood(train_counts, test_counts, eta);
  if (report.n_scored == 0) throw NoScorablePositions("test corpus has no positions after the burn-in");
  return -report.total_log_ml / static_cast<double>(report.n_scored);
}

double true_log_loss(const ContextTree& tree, const LeafDistributionTable& dists, const SequenceCorpus& test) {
  if (test.vocab.size() != tree.vocab_size()) throw InvalidParameter("test vocabulary size differs from the tree's");
  test.validate();
  const LeafRouter router(tree);
  std::vector<const std::vector<double>*> by_leaf(router.leaf_count());
  for (std::size_t id = 0; id < router.leaf_count(); ++id) {
    auto it = dists.dists.find(router.leaf_index(id));
    if (it == dists.dists.end()) {
      throw InvalidParameter("no distribution for leaf " + router.leaf_index(id).to_string());
    }
    by_leaf[id] = &it->second;
  }
  double total = 0.0;
  std::int64_t n = 0;
  for (std::size_t i = 0; i < test.sequences.size(); ++i) {
    const auto& seq = test.sequences[i];
    for (std::size_t pos = static_cast<std::size_t>(tree.max_depth()); pos < seq.size(); ++pos) {
      const double p = (*by_leaf[router.route(seq, pos)])[static_cast<std::size_t>(seq[pos] - 1)];
      if (!(p > 0.0)) {
        throw ZeroProbabilityEvent(i, pos,
                                   "symbol at sequence " + std::to_string(i + 1) + ", position " +
                                       std::to_string(pos + 1) + " has probability zero");
      }
      total += std::log(p);
      ++n;
    }
  }
  if (n == 0) throw NoScorablePositions("test corpus has no positions after the burn-in");
  return -total / static_cast<double>(n);
}

double adjusted_rand_index(const Partition& a, const Partition& b) {
  const int V = a.universe_size();
  if (V != b.universe_size() || !a.violations(V).empty() || !b.violations(V).empty()) {
    throw MismatchedUniverse("ARI needs two partitions of the same set {1..V}");
  }
  const auto la = a.labels(V);
  const auto lb = b.labels(V);
  std::vector<double> table(a.size() * b.size(), 0.0);
  for (int v = 0; v < V; ++v) {
    table[static_cast<std::size_t>(la[v]) * b.size() + static_cast<std::size_t>(lb[v])] += 1.0;
  }
  double index = 0.0;
  for (double n : table) index += choose2(n);
  double sum_a = 0.0;
  for (int m : a.block_sizes()) sum_a += choose2(m);
  double sum_b = 0.0;
  for (int m : b.block_sizes()) sum_b += choose2(m);
  const double total = choose2(V);
  const double expected = total > 0.0 ? sum_a * sum_b / total : 0.0;
  const double max_index = 0.5 * (sum_a + sum_b);
  const double denom = max_index - expected;
  if (denom == 0.0) return a == b || Partition::canonical(a.blocks()) == Partition::canonical(b.blocks()) ? 1.0 : 0.0;
  return (index - expected) / denom;
}

std::map<NodeIndex, double> context_weights(const ContextTree& t1, const SequenceCorpus& corpus, int node_depth) {
  const auto nodes = t1.nodes_at_depth(node_depth);
  if (nodes.empty()) throw DepthUnavailable("tree has no nodes at depth " + std::to_string(node_depth));
  if (corpus.vocab.size() != t1.vocab_size()) throw InvalidParameter("corpus vocabulary size differs from the tree's");
  corpus.validate();
  const LeafRouter router(t1);
  std::map<NodeIndex, double> w;
  for (const auto& e : nodes) w.emplace(e, 0.0);
  std::vector<double> hits(router.node_count(), 0.0);
  double total = 0.0;
  for (const auto& seq : corpus.sequences) {
    for (std::size_t pos = static_cast<std::size_t>(t1.max_depth()); pos < seq.size(); ++pos) {
      if (auto node = router.node_at_depth(seq, pos, node_depth)) {
        hits[*node] += 1.0;
        total += 1.0;
      }
    }
  }
  for (std::size_t id = 0; id < hits.size(); ++id) {
    if (hits[id] > 0.0) w[router.node_index(id)] = hits[id] / total;
  }
  if (total == 0.0) {
    // No context reaches this depth; fall back to equal weights.
    for (auto& [_, x] : w) x = 1.0 / static_cast<double>(w.size());
  }
  return w;
}

double tree_similarity(const ContextTree& t1, const ContextTree& t2, const SequenceCorpus& weight_corpus,
                       int depth) {
  if (t1.vocab_size() != t2.vocab_size()) throw MismatchedUniverse("trees are over different vocabularies");
  if (depth < 1 || depth > t1.max_depth()) {
    throw DepthUnavailable("similarity depth " + std::to_string(depth) + " outside 1.." +
                           std::to_string(t1.max_depth()));
  }
  const int node_depth = depth - 1;
  const auto weights = context_weights(t1, weight_corpus, node_depth);
  const Partition whole = Partition::trivial(t1.vocab_size());
  auto children_or_whole = [&](const ContextTree& t, const NodeIndex& e) -> const Partition& {
    const Partition* p = t.children_of(e);
    return p ? *p : whole;
  };
  std::vector<const Partition*> candidates;
  for (const auto& e2 : t2.nodes_at_depth(node_depth)) candidates.push_back(&children_or_whole(t2, e2));
  if (candidates.empty()) candidates.push_back(&whole);

  double out = 0.0;
  for (const auto& [e1, w] : weights) {
    if (w == 0.0) continue;
    const Partition& p1 = children_or_whole(t1, e1);
    double best = -1.0;
    for (const Partition* p2 : candidates) best = std::max(best, adjusted_rand_index(p1, *p2));
    out += w * best;
  }
  return out;
}

std::size_t model_size(const ContextTree& tree) { return leaf_count(tree); }

}  // namespace pbct
