#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "pbct/errors.hpp"
#include "pbct/generator.hpp"
#include "pbct/inference.hpp"
#include "pbct/likelihood.hpp"

using namespace pbct;
using doctest::Approx;

namespace {

// Independent evaluation of the node-local posterior straight from lgamma.
double oracle_local_posterior(const Partition& p, const std::vector<CountVector>& elem, double alpha,
                              const std::vector<double>& eta) {
  const int V = static_cast<int>(elem.size());
  double eta_sum = 0;
  for (double e : eta) eta_sum += e;
  double lp = 0;
  for (const auto& block : p.blocks()) {
    double n = 0;
    for (std::size_t s = 0; s < eta.size(); ++s) {
      double x = 0;
      for (Symbol u : block) x += static_cast<double>(elem[static_cast<std::size_t>(u - 1)][s]);
      lp += std::lgamma(x + eta[s]) - std::lgamma(eta[s]);
      n += x;
    }
    lp += std::lgamma(eta_sum) - std::lgamma(eta_sum + n);
    lp += std::log(alpha) + std::lgamma(static_cast<double>(block.size()));
  }
  for (int i = 0; i < V; ++i) lp -= std::log(alpha + i);
  return lp;
}

std::vector<CountVector> random_counts(int V, int S, std::mt19937_64& rng, int max_count) {
  std::vector<CountVector> out(static_cast<std::size_t>(V), CountVector(static_cast<std::size_t>(S)));
  for (auto& c : out) {
    for (auto& x : c) x = static_cast<std::int64_t>(rng() % static_cast<unsigned>(max_count + 1));
  }
  return out;
}

bool is_coarsening(const Partition& coarse, const Partition& fine) {
  for (const auto& b : fine.blocks()) {
    const auto k = coarse.block_of(b.front());
    for (Symbol s : b) {
      if (coarse.block_of(s) != k) return false;
    }
  }
  return true;
}

SequenceCorpus corpus(int V, std::vector<Sequence> seqs) { return SequenceCorpus{Vocabulary(V), std::move(seqs)}; }

}  // namespace

TEST_CASE("local_log_posterior") {
  const std::vector<double> eta{1, 1};
  const std::vector<CountVector> zero_block{CountVector{0, 0}};
  const std::vector<int> size2{2};
  CHECK(local_log_posterior(zero_block, size2, 1.0, eta) == Approx(std::log(0.5)).epsilon(1e-14));

  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const int V = 1 + static_cast<int>(rng() % 6);
    const auto elem = random_counts(V, V, rng, 20);
    const Partition p = pbct::testing::random_partition(V, rng);
    std::vector<CountVector> bc;
    for (const auto& b : p.blocks()) {
      CountVector sum(static_cast<std::size_t>(V), 0);
      for (Symbol u : b) {
        for (int s = 0; s < V; ++s) sum[static_cast<std::size_t>(s)] += elem[static_cast<std::size_t>(u - 1)][static_cast<std::size_t>(s)];
      }
      bc.push_back(sum);
    }
    const std::vector<double> eta_v(static_cast<std::size_t>(V), 0.5);
    const double got = local_log_posterior(bc, p.block_sizes(), 1.7, eta_v);
    CHECK(std::abs(got - oracle_local_posterior(p, elem, 1.7, eta_v)) <= 1e-9);
  }
}

TEST_CASE("merge_similarity") {
  const std::vector<double> eta{1, 1};
  const CountVector z{0, 0};
  // Zero counts: only the CRP factor changes, Gamma(2)/alpha.
  CHECK(merge_similarity(z, z, 1, 1, 1.0, eta) == Approx(0.0));
  CHECK(merge_similarity(z, z, 1, 1, 2.0, eta) == Approx(std::log(0.5)));
  const CountVector a{5, 0}, b{0, 5};
  CHECK(merge_similarity(a, b, 1, 1, 1.0, eta) == Approx(-4.343805421853684).epsilon(1e-12));

  // Equals the change in local posterior across the merge.
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto elem = random_counts(2, 3, rng, 30);
    const std::vector<double> eta3{0.3, 1.0, 2.0};
    const double split = oracle_local_posterior(Partition({{1}, {2}}), elem, 0.8, eta3);
    const double merged = oracle_local_posterior(Partition({{1, 2}}), elem, 0.8, eta3);
    CHECK(std::abs(merge_similarity(elem[0], elem[1], 1, 1, 0.8, eta3) - (merged - split)) <= 1e-9);
  }
}

TEST_CASE("agglomerate examples") {
  const std::vector<double> e1{1};
  const std::vector<CountVector> one{CountVector{4}};
  CHECK(agglomerate(one, 1.0, e1) == Partition::trivial(1));

  const std::vector<double> e3(3, 1.0);
  const std::vector<CountVector> zeros(3, CountVector{0, 0, 0});
  CHECK(agglomerate(zeros, 1.0, e3) == Partition::trivial(3));

  const std::vector<double> e4(4, 1.0);
  const std::vector<CountVector> groups{{50, 0, 0, 0}, {48, 2, 0, 0}, {0, 0, 1, 49}, {0, 0, 0, 50}};
  CHECK(agglomerate(groups, 1.0, e4) == Partition({{1, 2}, {3, 4}}));

  // V=2 with zero counts: both configurations score log(1/2) and the coarser wins.
  const std::vector<double> e2{1, 1};
  const std::vector<CountVector> z2(2, CountVector{0, 0});
  const auto tr = agglomerate_trace(z2, 1.0, e2);
  CHECK(tr.log_posterior[0] == Approx(tr.log_posterior[1]));
  CHECK(tr.best_partition() == Partition::trivial(2));
}

TEST_CASE("merge chain structure and optimality over the chain") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const int V = 1 + static_cast<int>(rng() % 7);
    const auto elem = random_counts(V, V, rng, 15);
    const std::vector<double> eta(static_cast<std::size_t>(V), 0.5 + double(rng() % 4));
    const double alpha = 0.25 + double(rng() % 8) * 0.5;
    const auto tr = agglomerate_trace(elem, alpha, eta);
    REQUIRE(tr.chain.size() == static_cast<std::size_t>(V));
    CHECK(tr.chain.front() == Partition::singletons(V));
    CHECK(tr.chain.back() == Partition::trivial(V));
    for (std::size_t i = 0; i < tr.chain.size(); ++i) {
      CHECK(tr.chain[i].violations(V).empty());
      CHECK(tr.chain[i].size() == static_cast<std::size_t>(V) - i);
      if (i > 0) CHECK(is_coarsening(tr.chain[i], tr.chain[i - 1]));
      CHECK(std::abs(tr.log_posterior[i] - oracle_local_posterior(tr.chain[i], elem, alpha, eta)) <= 1e-8);
      CHECK(tr.log_posterior[tr.best] >= tr.log_posterior[i]);
    }
    CHECK(agglomerate(elem, alpha, eta) == tr.best_partition());
  }
}

TEST_CASE("agglomeration is equivariant under relabeling of context symbols") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const int V = 5;
    // Large counts make exact similarity ties vanishingly unlikely.
    const auto elem = random_counts(V, 3, rng, 1000);
    const std::vector<double> eta{1, 1, 1};
    std::vector<int> perm{1, 2, 3, 4, 5};
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<CountVector> permuted(5);
    for (int u = 1; u <= V; ++u) permuted[static_cast<std::size_t>(perm[static_cast<std::size_t>(u - 1)] - 1)] = elem[static_cast<std::size_t>(u - 1)];
    const Partition a = agglomerate(elem, 1.0, eta);
    const Partition b = agglomerate(permuted, 1.0, eta);
    std::vector<Partition::Block> mapped;
    for (auto blk : a.blocks()) {
      for (auto& s : blk) s = perm[static_cast<std::size_t>(s - 1)];
      mapped.push_back(blk);
    }
    CHECK(Partition::canonical(mapped) == b);
  }
}

TEST_CASE("fit_pbct") {
  SUBCASE("i.i.d. data collapses to one leaf") {
    int single = 0;
    for (std::uint64_t seed = 1; seed <= 15; ++seed) {
      std::mt19937_64 rng(seed);
      const auto c = corpus(4, {pbct::testing::random_sequence(4, 2000, rng)});
      const auto t = fit_pbct(c, FitConfig{Hyperparams::symmetric(4, 1.0, 1.0, 2)});
      CHECK(validate_tree(t).ok());
      single += leaf_count(t) == 1 ? 1 : 0;
    }
    CHECK(single >= 14);
  }
  SUBCASE("alternating sequence splits on the last symbol") {
    Sequence x;
    for (int i = 0; i < 200; ++i) x.push_back(1 + i % 2);
    const auto t = fit_pbct(corpus(2, {x}), FitConfig{Hyperparams::symmetric(2, 1.0, 1.0, 1)});
    REQUIRE(t.children_of(NodeIndex{}) != nullptr);
    CHECK(*t.children_of(NodeIndex{}) == Partition({{1}, {2}}));
    CHECK(leaf_count(t) == 2);
  }
  SUBCASE("too-short corpus gives a single leaf") {
    const auto t = fit_pbct(corpus(3, {{1, 2}}), FitConfig{Hyperparams::symmetric(3, 1.0, 1.0, 3)});
    CHECK(leaf_count(t) == 1);
    CHECK(t.max_depth() == 3);
  }
  SUBCASE("empty corpus") {
    CHECK_THROWS_AS(fit_pbct(corpus(3, {}), FitConfig{Hyperparams::symmetric(3, 1.0, 1.0, 2)}), EmptyCorpus);
    CHECK_THROWS_AS(fit_vbm(corpus(3, {{}}), FitConfig{Hyperparams::symmetric(3, 1.0, 1.0, 2)}), EmptyCorpus);
  }
  SUBCASE("recovers a simulated tree") {
    const Vocabulary vocab(4);
    const auto hyper = Hyperparams::symmetric(4, 1.0, 1.0, 2);
    Rng rng(99);
    ContextTree truth;
    do {
      truth = generate_tree(vocab, hyper, rng);
    } while (leaf_count(truth) < 3);
    const auto dists = sample_leaf_distributions(truth, Hyperparams::symmetric(4, 0.3, 1.0, 2), 0.0, rng);
    const auto x = simulate_sequence(truth, dists, 30000, rng);
    const auto fitted = fit_pbct(SequenceCorpus{vocab, {x}}, FitConfig{hyper});
    CHECK(validate_tree(fitted).ok());
    // Likelihood of the data under the fit is at least that under the true structure.
    const auto cf = compute_counts(fitted, SequenceCorpus{vocab, {x}});
    const auto ct = compute_counts(truth, SequenceCorpus{vocab, {x}});
    CHECK(log_marginal_likelihood(cf, hyper.eta).total_log_ml >=
          log_marginal_likelihood(ct, hyper.eta).total_log_ml - 20.0);
  }
}

TEST_CASE("fit_vbm") {
  Sequence x;
  for (int i = 0; i < 300; ++i) x.push_back(1 + i % 3);
  const auto t = fit_vbm(corpus(3, {x}), FitConfig{Hyperparams::symmetric(3, 1.0, 1.0, 2)});
  REQUIRE(t.children_of(NodeIndex{}) != nullptr);
  CHECK(*t.children_of(NodeIndex{}) == Partition::singletons(3));
  for (const auto& [_, p] : t.children()) CHECK(p == Partition::singletons(3));

  std::mt19937_64 rng(4);
  const auto iid = corpus(3, {pbct::testing::random_sequence(3, 3000, rng)});
  CHECK(leaf_count(fit_vbm(iid, FitConfig{Hyperparams::symmetric(3, 1.0, 1.0, 2)})) == 1);

  // VBM only picks between the two chain endpoints, so it can never beat the chain optimum.
  for (int trial = 0; trial < 50; ++trial) {
    const auto elem = random_counts(4, 4, rng, 10);
    const std::vector<double> eta(4, 1.0);
    const auto tr = agglomerate_trace(elem, 1.0, eta);
    const double vbm = std::max(tr.log_posterior.front(), tr.log_posterior.back());
    CHECK(tr.log_posterior[tr.best] >= vbm);
  }
}

TEST_CASE("build_fbm") {
  CHECK(leaf_count(build_fbm(Vocabulary(93), 2)) == 8649);
  CHECK(leaf_count(build_fbm(Vocabulary(21), 3)) == 9261);
  CHECK(fbm_leaf_count(93, 2) == 8649);
  CHECK(fbm_leaf_count(21, 3) == 9261);
  CHECK(fbm_leaf_count(10, 30) == UINT64_MAX);
  CHECK(leaf_count(build_fbm(Vocabulary(1), 5)) == 1);
  CHECK(leaf_count(build_fbm(Vocabulary(5), 0)) == 1);
  const auto t = build_fbm(Vocabulary(3), 2);
  CHECK(validate_tree(t).ok());
  CHECK(t.max_depth() == 2);
  for (const auto& leaf : t.leaves()) CHECK(leaf.depth() == 2);
}
