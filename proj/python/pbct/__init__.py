"""Parsimonious Bayesian context trees (C++ core)."""

from ._core import (
    ContextTree,
    InvalidParameter,
    PbctError,
    adjusted_rand_index,
    build_fbm,
    chain_rule_log_prob,
    crp_log_prior,
    fit_pbct,
    fit_vbm,
    generate_tree,
    log_marginal_likelihood,
    log_multivariate_beta,
    marginal_log_loss,
    predict_next,
    run_experiment,
    sample_crp_partition,
    sample_leaf_distributions,
    simulate_sequence,
    tree_similarity,
)

__all__ = [
    "ContextTree",
    "InvalidParameter",
    "PbctError",
    "adjusted_rand_index",
    "build_fbm",
    "chain_rule_log_prob",
    "crp_log_prior",
    "fit_pbct",
    "fit_vbm",
    "generate_tree",
    "log_marginal_likelihood",
    "log_multivariate_beta",
    "marginal_log_loss",
    "predict_next",
    "run_experiment",
    "sample_crp_partition",
    "sample_leaf_distributions",
    "simulate_sequence",
    "tree_similarity",
]
