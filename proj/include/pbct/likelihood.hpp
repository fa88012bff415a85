#pragma once

// Count extraction and Dirichlet-Categorical marginal / predictive likelihoods.
// Everything is computed in log space.

#include <map>
#include <span>
#include <vector>

#include "pbct/core_model.hpp"

namespace pbct {

struct LogLikelihoodReport {
  double total_log_ml = 0.0;
  std::map<NodeIndex, double> per_leaf;
  std::int64_t n_scored = 0;
};

/// Tallies next-symbol counts per leaf over positions burn_in+1..N of every
/// sequence and sums them across sequences.
CountTable compute_counts(const ContextTree& tree, const SequenceCorpus& corpus, int burn_in);
/// Uses the tree's maximum depth as burn-in.
CountTable compute_counts(const ContextTree& tree, const SequenceCorpus& corpus);

/// sum_i lgamma(v_i) - lgamma(sum_i v_i).
double log_multivariate_beta(std::span<const double> values);

/// log B(counts + eta) - log B(eta), skipping work for zero counts.
double log_beta_ratio(std::span<const std::int64_t> counts, std::span<const double> eta);

LogLikelihoodReport log_marginal_likelihood(const CountTable& counts, std::span<const double> eta);

/// Per leaf: log B(test + train + eta) - log B(train + eta).
LogLikelihoodReport log_predictive_likelihood(const CountTable& train, const CountTable& test,
                                              std::span<const double> eta);

std::vector<double> posterior_mean(std::span<const std::int64_t> counts, std::span<const double> eta);

/// Posterior mean at the leaf selected by history (most recent symbol first).
std::vector<double> predict_next(const ContextTree& tree, const CountTable& train,
                                 std::span<const double> eta, std::span<const Symbol> history);

/// Sequential scoring: each position after the burn-in is scored by the
/// posterior-predictive at its leaf given counts accumulated so far. Equals
/// the log marginal likelihood of the full counts.
double chain_rule_log_prob(const ContextTree& tree, std::span<const double> eta,
                           std::span<const Symbol> sequence);
double chain_rule_log_prob(const ContextTree& tree, std::span<const double> eta,
                           const SequenceCorpus& corpus);

}  // namespace pbct
