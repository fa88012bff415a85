#pragma once

// Structure learning by recursive agglomerative clustering, plus the
// variable-order and fixed-order baselines.

#include <cstdint>
#include <span>
#include <vector>

#include "pbct/core_model.hpp"

namespace pbct {

enum class TieBreak {
  /// Among equally similar pairs, merge the one with the smallest
  /// (min element of block i, min element of block j).
  kLexicographicMin,
};

struct FitConfig {
  Hyperparams hyper;
  TieBreak tie_break = TieBreak::kLexicographicMin;
  /// Nodes reached by fewer training positions become leaves. 0 only stops
  /// at nodes with no positions at all.
  std::int64_t min_context_count = 0;
};

/// sum_k [log B(X_k + eta) - log B(eta)] + log CRP prior of the block sizes.
/// Only the factors that change with this node's clustering are included.
double local_log_posterior(std::span<const CountVector> block_counts, std::span<const int> block_sizes,
                           double alpha, std::span<const double> eta);

/// Log of the multiplicative change in local posterior from merging blocks i and j.
double merge_similarity(std::span<const std::int64_t> counts_i, std::span<const std::int64_t> counts_j,
                        int size_i, int size_j, double alpha, std::span<const double> eta);

struct AgglomerationTrace {
  /// chain[0] is all singletons, chain.back() is the single block.
  std::vector<Partition> chain;
  std::vector<double> log_posterior;
  std::size_t best = 0;

  const Partition& best_partition() const { return chain[best]; }
};

/// Greedy merging from V singletons down to one block. element_counts[u-1] is
/// the next-symbol count vector for context symbol u.
AgglomerationTrace agglomerate_trace(std::span<const CountVector> element_counts, double alpha,
                                     std::span<const double> eta, TieBreak tie_break = TieBreak::kLexicographicMin);

/// The configuration on the merge chain with the highest local posterior.
/// Exact ties go to the coarser configuration.
Partition agglomerate(std::span<const CountVector> element_counts, double alpha, std::span<const double> eta,
                      TieBreak tie_break = TieBreak::kLexicographicMin);

ContextTree fit_pbct(const SequenceCorpus& corpus, const FitConfig& config);

/// Same recursion as fit_pbct, choosing only between no split and a full
/// singleton split at every node.
ContextTree fit_vbm(const SequenceCorpus& corpus, const FitConfig& config);

/// Complete order-d tree with singleton splits everywhere; V^d leaves.
ContextTree build_fbm(const Vocabulary& vocab, int order);

/// V^order, saturating at UINT64_MAX.
std::uint64_t fbm_leaf_count(int vocab_size, int order);

}  // namespace pbct
