import math
import random

import pytest

import pbct


def test_crp_prior_sums_to_one():
    parts = [
        [[1, 2, 3]],
        [[1], [2, 3]],
        [[1, 2], [3]],
        [[1, 3], [2]],
        [[1], [2], [3]],
    ]
    total = sum(math.exp(pbct.crp_log_prior(p, 1.5)) for p in parts)
    assert abs(total - 1.0) < 1e-12


def test_sampled_partition_covers_vocab():
    blocks = pbct.sample_crp_partition(6, 1.0, seed=3)
    assert sorted(s for b in blocks for s in b) == list(range(1, 7))


def test_generate_simulate_fit_roundtrip():
    tree = pbct.generate_tree(5, alpha=1.0, max_depth=2, seed=4)
    assert tree.validate() == []
    dists = pbct.sample_leaf_distributions(tree, eta=1.0, lam=0.0, seed=5)
    assert set(map(tuple, tree.leaves)) == set(map(tuple, dists))
    x = pbct.simulate_sequence(tree, dists, 3000, seed=6)
    assert len(x) == 3000 and min(x) >= 1 and max(x) <= 5

    fitted = pbct.fit_pbct([x[:2500]], vocab_size=5, max_depth=2)
    assert fitted.validate() == []
    loss = pbct.marginal_log_loss(fitted, [x[:2500]], [x[2500:]])
    assert loss <= math.log(5) + 0.1
    sim = pbct.tree_similarity(fitted, tree, [x[:2500]], 1)
    assert -1.0 <= sim <= 1.0 + 1e-12


def test_conjugacy_identity():
    rng = random.Random(0)
    tree = pbct.ContextTree.from_children(3, 2, {(): [[1, 3], [2]], (1,): [[1], [2, 3]]})
    assert tree.leaf_count() == 3
    for _ in range(20):
        seq = [rng.randint(1, 3) for _ in range(rng.randint(0, 80))]
        a = pbct.log_marginal_likelihood(tree, [seq], eta=[0.5, 1.0, 2.0])
        b = pbct.chain_rule_log_prob(tree, [seq], eta=[0.5, 1.0, 2.0])
        assert abs(a - b) < 1e-9


def test_metrics_and_baselines():
    assert pbct.adjusted_rand_index([[1, 2], [3, 4]], [[1, 3], [2, 4]]) == pytest.approx(-0.5, abs=1e-12)
    assert pbct.build_fbm(93, 2).leaf_count() == 8649
    assert pbct.build_fbm(21, 3).leaf_count() == 9261
    alternating = [1 + i % 2 for i in range(200)]
    assert pbct.fit_pbct([alternating], vocab_size=2, max_depth=1).children == {(): [[1], [2]]}
    assert pbct.fit_vbm([alternating], vocab_size=2, max_depth=1).leaf_count() == 2
    probs = pbct.predict_next(pbct.build_fbm(2, 1), [alternating], history=[1])
    assert probs[1] > 0.95


def test_errors_are_python_exceptions():
    with pytest.raises(ValueError):
        pbct.crp_log_prior([[1]], 0.0)
    with pytest.raises(pbct.PbctError):
        pbct.fit_pbct([[]], vocab_size=3)


def test_experiment_report_is_deterministic():
    kw = dict(vocab_size=3, max_depth=1, train_length=300, test_length=100, replicates=2, seed=9,
              models=["pbct", "vbm", "fbm:1"])
    a = pbct.run_experiment(**kw)
    assert a == pbct.run_experiment(**kw)
    assert "# summary" in a
