#pragma once

#include <map>
#include <optional>
#include <span>

#include "pbct/core_model.hpp"
#include "pbct/generator.hpp"

namespace pbct {

struct MetricReport {
  double marginal_log_loss = 0.0;
  std::optional<double> true_log_loss;
  std::optional<std::map<int, double>> tree_similarity_by_depth;
  std::size_t model_size_L = 0;
};

/// Mean negative log posterior-predictive probability of the test positions
/// (after a burn-in of the tree's max depth) given counts from the training corpus.
double marginal_log_loss(const ContextTree& tree, const SequenceCorpus& train, const SequenceCorpus& test,
                         std::span<const double> eta);

/// Mean negative log probability of the test positions under known leaf distributions.
double true_log_loss(const ContextTree& tree, const LeafDistributionTable& dists, const SequenceCorpus& test);

/// Pair-counting ARI. When the expected and maximum index coincide, returns 1
/// for identical partitions and 0 otherwise.
double adjusted_rand_index(const Partition& a, const Partition& b);

/// Context-frequency-weighted best-match ARI between the children partitions
/// of t1's nodes at depth-1 and t2's nodes at the same depth; leaves count as {V}.
/// `depth` is 1-based and must lie in 1..t1.max_depth().
double tree_similarity(const ContextTree& t1, const ContextTree& t2, const SequenceCorpus& weight_corpus,
                       int depth);

/// Weights of t1's nodes at `node_depth` (0-based), summing to 1.
std::map<NodeIndex, double> context_weights(const ContextTree& t1, const SequenceCorpus& corpus, int node_depth);

std::size_t model_size(const ContextTree& tree);

}  // namespace pbct
