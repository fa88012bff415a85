#include <cmath>
#include <map>

#include "doctest.h"
#include "oracles.hpp"
#include "pbct/errors.hpp"
#include "pbct/generator.hpp"
#include "pbct/likelihood.hpp"

using namespace pbct;
using doctest::Approx;

TEST_CASE("crp_log_prior matches enumerated values") {
  CHECK(crp_log_prior(Partition({{1}}), 1.0) == 0.0);
  CHECK(crp_log_prior(Partition({{1}, {2}, {3}}), 1.0) == Approx(std::log(1.0 / 6.0)).epsilon(1e-14));
  CHECK(crp_log_prior(Partition({{1, 2, 3}}), 1.0) == Approx(std::log(1.0 / 3.0)).epsilon(1e-14));
  CHECK_THROWS_AS(crp_log_prior(Partition({{1}}), 0.0), InvalidParameter);
  CHECK_THROWS_AS(crp_log_prior(Partition({{1, 2}, {2}}), 1.0), InvalidParameter);
}

TEST_CASE("crp_log_prior sums to one and agrees with the seating chain") {
  for (double alpha : {0.5, 1.0, 2.0, 7.5}) {
    for (int V = 1; V <= 5; ++V) {
      double total = 0.0;
      for (const auto& p : pbct::testing::enumerate_set_partitions(V)) {
        const double prior = std::exp(crp_log_prior(p, alpha));
        CHECK(prior == Approx(pbct::testing::crp_seating_probability(p, alpha)).epsilon(1e-12));
        total += prior;
      }
      CHECK(std::abs(total - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("crp_log_prior is invariant to block order and size-preserving relabeling") {
  const double a = crp_log_prior(Partition({{1, 4}, {2}, {3, 5, 6}}), 1.3);
  CHECK(crp_log_prior(Partition({{3, 5, 6}, {1, 4}, {2}}), 1.3) == a);
  CHECK(crp_log_prior(Partition({{2, 6}, {5}, {1, 3, 4}}), 1.3) == Approx(a).epsilon(1e-14));
}

TEST_CASE("sample_crp_partition frequencies") {
  Rng rng(5);
  SUBCASE("V=1") {
    for (int i = 0; i < 100; ++i) CHECK(sample_crp_partition(1, 3.0, rng) == Partition({{1}}));
  }
  SUBCASE("V=2 alpha=1") {
    int together = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) together += sample_crp_partition(2, 1.0, rng).is_trivial();
    CHECK(std::abs(together / double(n) - 0.5) <= 0.01);
  }
  SUBCASE("V=3 alpha=1 singletons") {
    int singles = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) singles += sample_crp_partition(3, 1.0, rng).size() == 3;
    CHECK(std::abs(singles / double(n) - 1.0 / 6.0) <= 0.01);
  }
  SUBCASE("blocks come out canonical") {
    for (int i = 0; i < 200; ++i) {
      const Partition p = sample_crp_partition(8, 2.0, rng);
      CHECK(p == Partition::canonical(p.blocks()));
      CHECK(p.violations(8).empty());
    }
  }
  CHECK_THROWS_AS(sample_crp_partition(0, 1.0, rng), InvalidParameter);
  CHECK_THROWS_AS(sample_crp_partition(3, -1.0, rng), InvalidParameter);
}

TEST_CASE("generate_tree") {
  SUBCASE("D=0 gives a single leaf") {
    Rng rng(1);
    const ContextTree t = generate_tree(Vocabulary(10), Hyperparams::symmetric(10, 1.0, 50.0, 0), rng);
    CHECK(leaf_count(t) == 1);
  }
  SUBCASE("vanishing alpha gives a single leaf") {
    Rng rng(2);
    const ContextTree t = generate_tree(Vocabulary(10), Hyperparams::symmetric(10, 1.0, 1e-9, 3), rng);
    CHECK(leaf_count(t) == 1);
  }
  SUBCASE("valid for many seeds") {
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
      Rng rng(seed);
      const ContextTree t = generate_tree(Vocabulary(10), Hyperparams::symmetric(10, 1.0, 1.0, 3), rng);
      REQUIRE(validate_tree(t).ok());
      CHECK(t.realized_depth() <= 3);
    }
  }
  SUBCASE("decay shrinks deeper partitions") {
    // Mean block count of depth-1 internal nodes, with and without decay.
    auto mean_blocks = [](double decay) {
      double blocks = 0, nodes = 0;
      for (std::uint64_t seed = 0; seed < 300; ++seed) {
        Rng rng(seed);
        const ContextTree t = generate_tree(Vocabulary(10), Hyperparams::symmetric(10, 1.0, 3.0, 3, decay), rng);
        for (const auto& [e, part] : t.children()) {
          if (e.depth() == 1) {
            blocks += double(part.size());
            nodes += 1;
          }
        }
      }
      return blocks / nodes;
    };
    CHECK(mean_blocks(0.3) < mean_blocks(1.0));
  }
  SUBCASE("deterministic given the seed") {
    Rng a(42), b(42);
    const auto h = Hyperparams::symmetric(10, 1.0, 1.0, 3);
    CHECK(generate_tree(Vocabulary(10), h, a) == generate_tree(Vocabulary(10), h, b));
  }
}

TEST_CASE("leaf distributions") {
  const ContextTree t = pbct::testing::figure_one_tree();
  Rng rng(3);
  SUBCASE("lambda=1 is uniform") {
    const auto d = sample_leaf_distributions(t, Hyperparams::symmetric(3, 1.0, 1.0, 3), 1.0, rng);
    for (const auto& [e, p] : d.dists) {
      for (double x : p) CHECK(x == Approx(1.0 / 3.0).epsilon(1e-15));
    }
  }
  SUBCASE("mixture arithmetic") {
    const std::vector<double> spike{1.0, 0.0};
    const auto m = mix_with_uniform(spike, 0.5);
    CHECK(m[0] == 0.75);
    CHECK(m[1] == 0.25);
    CHECK_THROWS_AS(mix_with_uniform(spike, 1.5), InvalidParameter);
  }
  SUBCASE("Dirichlet(1) coordinate means are 1/V") {
    const int V = 4;
    const std::vector<double> eta(V, 1.0);
    std::vector<double> mean(V, 0.0);
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
      const auto p = sample_dirichlet(eta, rng);
      double s = 0;
      for (int v = 0; v < V; ++v) {
        mean[v] += p[v] / n;
        s += p[v];
      }
      CHECK(std::abs(s - 1.0) <= 1e-12);
    }
    for (double m : mean) CHECK(std::abs(m - 1.0 / V) <= 0.01);
  }
  SUBCASE("tiny concentrations stay normalised") {
    const std::vector<double> eta(5, 1e-3);
    for (int i = 0; i < 100; ++i) {
      const auto p = sample_dirichlet(eta, rng);
      double s = 0;
      for (double x : p) {
        CHECK(x >= 0.0);
        s += x;
      }
      CHECK(std::abs(s - 1.0) <= 1e-12);
    }
  }
  CHECK_THROWS_AS(sample_leaf_distributions(t, Hyperparams::symmetric(3, 1.0, 1.0, 3), -0.1, rng), InvalidParameter);
}

TEST_CASE("simulate_sequence") {
  SUBCASE("degenerate leaf repeats symbol 1 after burn-in") {
    const ContextTree t = ContextTree::single_leaf(Vocabulary(4), 2);
    LeafDistributionTable d;
    d.dists[NodeIndex{}] = {1.0, 0.0, 0.0, 0.0};
    Rng rng(9);
    const Sequence x = simulate_sequence(t, d, 50, rng);
    REQUIRE(x.size() == 50);
    for (std::size_t n = 2; n < x.size(); ++n) CHECK(x[n] == 1);
  }
  SUBCASE("same seed, same sequence") {
    Rng g(4);
    const auto h = Hyperparams::symmetric(10, 1.0, 1.0, 3);
    const ContextTree t = generate_tree(Vocabulary(10), h, g);
    const auto d = sample_leaf_distributions(t, h, 0.0, g);
    Rng a(77), b(77);
    CHECK(simulate_sequence(t, d, 2000, a) == simulate_sequence(t, d, 2000, b));
  }
  SUBCASE("order-1 transition frequencies match the leaf distributions") {
    std::map<NodeIndex, Partition> c{{NodeIndex{}, Partition({{1, 2}, {3, 4}})}};
    const ContextTree t = ContextTree::from_children(Vocabulary(4), 1, c);
    LeafDistributionTable d;
    d.dists[NodeIndex{1}] = {0.0, 0.0, 0.3, 0.7};
    d.dists[NodeIndex{2}] = {0.6, 0.4, 0.0, 0.0};
    Rng rng(10);
    const Sequence x = simulate_sequence(t, d, 100000, rng);
    const auto counts = compute_counts(t, SequenceCorpus{Vocabulary(4), {x}});
    for (const auto& [leaf, cv] : counts.counts) {
      double n = 0;
      for (auto c2 : cv) n += double(c2);
      for (std::size_t v = 0; v < 4; ++v) CHECK(std::abs(double(cv[v]) / n - d.dists[leaf][v]) <= 0.02);
    }
  }
}
