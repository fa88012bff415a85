#include "pbct/generator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "pbct/errors.hpp"

namespace pbct {

namespace {

void require_crp_args(int vocab_size, double alpha) {
  if (vocab_size < 1) throw InvalidParameter("CRP needs at least one customer");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidParameter("CRP alpha must be positive");
}

std::size_t sample_categorical(std::span<const double> probs, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    acc += probs[i];
    last_positive = i;
    if (u < acc) return i;
  }
  return last_positive;
}

}  // namespace

Partition sample_crp_partition(int vocab_size, double alpha, Rng& rng) {
  require_crp_args(vocab_size, alpha);
  std::vector<Partition::Block> tables;
  tables.push_back({1});
  for (int m = 2; m <= vocab_size; ++m) {
    const double u = rng.uniform() * (alpha + m - 1);
    double acc = 0.0;
    bool seated = false;
    for (auto& table : tables) {
      acc += static_cast<double>(table.size());
      if (u < acc) {
        table.push_back(m);
        seated = true;
        break;
      }
    }
    if (!seated) tables.push_back({m});
  }
  // Tables open in customer order, so they are already sorted by minimum.
  return Partition(std::move(tables));
}

double crp_log_prior_from_sizes(std::span<const int> block_sizes, double alpha) {
  int n = 0;
  for (int m : block_sizes) {
    if (m < 1) throw InvalidParameter("CRP block sizes must be positive");
    n += m;
  }
  require_crp_args(n, alpha);
  double lp = static_cast<double>(block_sizes.size()) * std::log(alpha);
  for (int m : block_sizes) lp += std::lgamma(static_cast<double>(m));
  for (int i = 0; i < n; ++i) lp -= std::log(alpha + i);
  return lp;
}

double crp_log_prior(const Partition& partition, double alpha) {
  if (auto v = partition.violations(partition.universe_size()); !v.empty()) {
    throw InvalidParameter("not a partition: " + v.front());
  }
  const auto sizes = partition.block_sizes();
  return crp_log_prior_from_sizes(sizes, alpha);
}

ContextTree generate_tree(const Vocabulary& vocab, const Hyperparams& hyper, Rng& rng) {
  hyper.validate(vocab.size());
  std::map<NodeIndex, Partition> children;
  std::function<void(const NodeIndex&, const Rng&)> expand = [&](const NodeIndex& e, const Rng& stream) {
    if (e.depth() >= hyper.max_depth) return;
    Rng draw = stream;
    Partition part = sample_crp_partition(vocab.size(), hyper.alpha.at(e.depth()), draw);
    if (part.is_trivial()) return;
    const std::size_t k_count = part.size();
    children.emplace(e, std::move(part));
    for (std::size_t k = 1; k <= k_count; ++k) expand(e.child(static_cast<int>(k)), stream.split(k));
  };
  expand(NodeIndex{}, Rng(rng()));
  return ContextTree::from_children(vocab, hyper.max_depth, std::move(children));
}

std::vector<double> sample_dirichlet(std::span<const double> eta, Rng& rng) {
  // log Gamma(a) draws via Gamma(a) = Gamma(a+1) * U^(1/a), then softmax.
  std::vector<double> log_g(eta.size());
  for (std::size_t i = 0; i < eta.size(); ++i) {
    if (!(eta[i] > 0.0)) throw InvalidParameter("Dirichlet concentration must be positive");
    std::gamma_distribution<double> gamma(eta[i] + 1.0, 1.0);
    const double g = gamma(rng);
    double u = rng.uniform();
    while (u <= 0.0) u = rng.uniform();
    log_g[i] = std::log(g) + std::log(u) / eta[i];
  }
  const double top = *std::max_element(log_g.begin(), log_g.end());
  std::vector<double> out(eta.size());
  double total = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::exp(log_g[i] - top);
    total += out[i];
  }
  for (double& p : out) p /= total;
  return out;
}

std::vector<double> mix_with_uniform(std::span<const double> phi, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidParameter("lambda must lie in [0, 1]");
  const double uniform = 1.0 / static_cast<double>(phi.size());
  std::vector<double> out(phi.size());
  for (std::size_t i = 0; i < phi.size(); ++i) out[i] = (1.0 - lambda) * phi[i] + lambda * uniform;
  return out;
}

LeafDistributionTable sample_leaf_distributions(const ContextTree& tree, const Hyperparams& hyper,
                                                double lambda, Rng& rng) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidParameter("lambda must lie in [0, 1]");
  hyper.validate(tree.vocab_size());
  LeafDistributionTable table;
  table.lambda = lambda;
  const Rng base(rng());
  std::uint64_t ordinal = 0;
  for (const auto& e : tree.leaves()) {
    Rng leaf_rng = base.split(ordinal++);
    const auto phi = sample_dirichlet(hyper.eta, leaf_rng);
    table.dists.emplace(e, mix_with_uniform(phi, lambda));
  }
  return table;
}

Sequence simulate_sequence(const ContextTree& tree, const LeafDistributionTable& dists,
                           std::size_t length, Rng& rng) {
  if (length < 1) throw InvalidParameter("sequence length must be >= 1");
  const LeafRouter router(tree);
  std::vector<const std::vector<double>*> by_leaf(router.leaf_count());
  for (std::size_t id = 0; id < router.leaf_count(); ++id) {
    auto it = dists.dists.find(router.leaf_index(id));
    if (it == dists.dists.end() || static_cast<int>(it->second.size()) != tree.vocab_size()) {
      throw InvalidParameter("no distribution of size V for leaf " + router.leaf_index(id).to_string());
    }
    by_leaf[id] = &it->second;
  }
  const int V = tree.vocab_size();
  const auto burn_in = std::min(length, static_cast<std::size_t>(tree.max_depth()));
  Sequence x;
  x.reserve(length);
  std::uniform_int_distribution<int> uniform_symbol(1, V);
  for (std::size_t n = 0; n < burn_in; ++n) x.push_back(uniform_symbol(rng));
  for (std::size_t n = burn_in; n < length; ++n) {
    const std::size_t leaf = router.route(x, n);
    x.push_back(static_cast<Symbol>(sample_categorical(*by_leaf[leaf], rng)) + 1);
  }
  return x;
}

}  // namespace pbct
