#pragma once

// Random context trees from the recursive CRP construction, spike-and-slab leaf
// distributions, and sequence simulation.

#include <map>
#include <vector>

#include "pbct/core_model.hpp"
#include "pbct/rng.hpp"

namespace pbct {

/// True next-symbol distribution per leaf, with the uniform mixing weight used
/// to produce it.
struct LeafDistributionTable {
  std::map<NodeIndex, std::vector<double>> dists;
  double lambda = 0.0;
};

/// Seats customers 1..V in order; customer m joins table k with probability
/// m_k/(alpha+m-1) and opens a new table with probability alpha/(alpha+m-1).
Partition sample_crp_partition(int vocab_size, double alpha, Rng& rng);

/// Log EPPF: K log(alpha) + sum_k log((m_k-1)!) - sum_{i<V} log(alpha+i).
double crp_log_prior(const Partition& partition, double alpha);
double crp_log_prior_from_sizes(std::span<const int> block_sizes, double alpha);

/// Nodes above max depth draw a CRP partition with alpha at their own depth;
/// a single-block draw makes the node a leaf. Child k of a node expands on the
/// parent stream split(k), so the result does not depend on traversal order.
ContextTree generate_tree(const Vocabulary& vocab, const Hyperparams& hyper, Rng& rng);

/// Dirichlet(eta) draw; stable for very small concentrations.
std::vector<double> sample_dirichlet(std::span<const double> eta, Rng& rng);

/// (1-lambda)*phi + lambda/V.
std::vector<double> mix_with_uniform(std::span<const double> phi, double lambda);

LeafDistributionTable sample_leaf_distributions(const ContextTree& tree, const Hyperparams& hyper,
                                                double lambda, Rng& rng);

/// The first max_depth symbols are uniform burn-in; later symbols follow the
/// leaf distribution selected by the preceding context.
Sequence simulate_sequence(const ContextTree& tree, const LeafDistributionTable& dists,
                           std::size_t length, Rng& rng);

}  // namespace pbct
