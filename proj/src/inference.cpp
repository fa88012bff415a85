#include "pbct/inference.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "pbct/errors.hpp"
#include "pbct/generator.hpp"
#include "pbct/likelihood.hpp"

namespace pbct {

namespace {

void require_alpha(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidParameter("alpha must be positive");
}

double log_prior_ratio(int size_i, int size_j, double alpha) {
  return std::lgamma(static_cast<double>(size_i + size_j)) - std::log(alpha) -
         std::lgamma(static_cast<double>(size_i)) - std::lgamma(static_cast<double>(size_j));
}

CountVector add(std::span<const std::int64_t> a, std::span<const std::int64_t> b) {
  CountVector out(a.size());
  for (std::size_t v = 0; v < a.size(); ++v) out[v] = a[v] + b[v];
  return out;
}

using Chooser = std::function<Partition(std::span<const CountVector>, double, std::span<const double>)>;

class TreeFitter {
 public:
  TreeFitter(const SequenceCorpus& corpus, const FitConfig& config, Chooser choose)
      : config_(config), V_(corpus.vocab.size()), D_(config.hyper.max_depth), choose_(std::move(choose)) {
    if (corpus.total_length() == 0) throw EmptyCorpus("cannot fit a tree to an empty corpus");
    if (config.min_context_count < 0) throw InvalidParameter("min_context_count must be >= 0");
    config.hyper.validate(V_);
    corpus.validate();
    for (const auto& seq : corpus.sequences) {
      for (std::size_t n = 0; n < seq.size(); ++n) {
        if (n >= static_cast<std::size_t>(D_)) root_positions_.push_back(static_cast<std::uint32_t>(flat_.size()));
        flat_.push_back(seq[n]);
      }
    }
    vocab_ = corpus.vocab;
  }

  ContextTree fit() {
    fit_node(NodeIndex{}, std::move(root_positions_));
    return ContextTree::from_children(vocab_, D_, std::move(children_));
  }

 private:
  void fit_node(const NodeIndex& e, std::vector<std::uint32_t> positions) {
    const int d = e.depth();
    if (d >= D_ || positions.empty()) return;
    if (static_cast<std::int64_t>(positions.size()) < config_.min_context_count) return;

    const auto V = static_cast<std::size_t>(V_);
    std::vector<CountVector> element_counts(V, CountVector(V, 0));
    for (std::uint32_t p : positions) {
      const auto u = static_cast<std::size_t>(flat_[p - 1 - static_cast<std::uint32_t>(d)] - 1);
      ++element_counts[u][static_cast<std::size_t>(flat_[p] - 1)];
    }
    Partition part = choose_(element_counts, config_.hyper.alpha.at(d), config_.hyper.eta);
    if (part.is_trivial()) return;

    const auto labels = part.labels(V_);
    std::vector<std::vector<std::uint32_t>> routed(part.size());
    for (std::uint32_t p : positions) {
      const Symbol s = flat_[p - 1 - static_cast<std::uint32_t>(d)];
      routed[static_cast<std::size_t>(labels[static_cast<std::size_t>(s - 1)])].push_back(p);
    }
    positions.clear();
    positions.shrink_to_fit();
    children_.emplace(e, std::move(part));
    for (std::size_t k = 0; k < routed.size(); ++k) {
      fit_node(e.child(static_cast<int>(k) + 1), std::move(routed[k]));
    }
  }

  const FitConfig& config_;
  int V_;
  int D_;
  Chooser choose_;
  Vocabulary vocab_;
  std::vector<Symbol> flat_;
  std::vector<std::uint32_t> root_positions_;
  std::map<NodeIndex, Partition> children_;
};

}  // namespace

double local_log_posterior(std::span<const CountVector> block_counts, std::span<const int> block_sizes,
                           double alpha, std::span<const double> eta) {
  if (block_counts.size() != block_sizes.size() || block_counts.empty()) {
    throw InvalidParameter("need one count vector per non-empty block");
  }
  double lp = crp_log_prior_from_sizes(block_sizes, alpha);
  for (const auto& x : block_counts) lp += log_beta_ratio(x, eta);
  return lp;
}

double merge_similarity(std::span<const std::int64_t> counts_i, std::span<const std::int64_t> counts_j,
                        int size_i, int size_j, double alpha, std::span<const double> eta) {
  require_alpha(alpha);
  if (size_i < 1 || size_j < 1) throw InvalidParameter("blocks must be non-empty");
  if (counts_i.size() != counts_j.size()) throw InvalidParameter("count vectors differ in length");
  const CountVector merged = add(counts_i, counts_j);
  return log_beta_ratio(merged, eta) - log_beta_ratio(counts_i, eta) - log_beta_ratio(counts_j, eta) +
         log_prior_ratio(size_i, size_j, alpha);
}

AgglomerationTrace agglomerate_trace(std::span<const CountVector> element_counts, double alpha,
                                     std::span<const double> eta, TieBreak tie_break) {
  require_alpha(alpha);
  const std::size_t V = element_counts.size();
  if (V < 1) throw InvalidParameter("agglomeration needs at least one element");
  if (eta.size() != element_counts.front().size()) throw InvalidParameter("count and eta dimensions differ");
  (void)tie_break;  // kLexicographicMin is the only rule

  // Slot i starts as {i+1}; merging i<j folds j into i, so slot order is
  // always the order of block minima.
  struct Block {
    CountVector counts;
    int size = 1;
    double log_lik = 0.0;
    bool alive = true;
  };
  std::vector<Block> blocks(V);
  std::vector<int> label(V);
  for (std::size_t i = 0; i < V; ++i) {
    blocks[i].counts = element_counts[i];
    blocks[i].log_lik = log_beta_ratio(blocks[i].counts, eta);
    label[i] = static_cast<int>(i);
  }
  const double neg_inf = -std::numeric_limits<double>::infinity();
  std::vector<double> sim(V * V, neg_inf);
  auto similarity = [&](std::size_t i, std::size_t j) {
    const CountVector merged = add(blocks[i].counts, blocks[j].counts);
    return log_beta_ratio(merged, eta) - blocks[i].log_lik - blocks[j].log_lik +
           log_prior_ratio(blocks[i].size, blocks[j].size, alpha);
  };
  for (std::size_t i = 0; i < V; ++i) {
    for (std::size_t j = i + 1; j < V; ++j) sim[i * V + j] = similarity(i, j);
  }
  auto current_log_post = [&] {
    std::vector<int> sizes;
    double lp = 0.0;
    for (const auto& b : blocks) {
      if (!b.alive) continue;
      sizes.push_back(b.size);
      lp += b.log_lik;
    }
    return lp + crp_log_prior_from_sizes(sizes, alpha);
  };

  AgglomerationTrace trace;
  trace.chain.reserve(V);
  trace.chain.push_back(Partition::from_labels(label));
  trace.log_posterior.push_back(current_log_post());

  for (std::size_t step = 1; step < V; ++step) {
    std::size_t bi = 0, bj = 0;
    double best = neg_inf;
    bool found = false;
    for (std::size_t i = 0; i < V; ++i) {
      if (!blocks[i].alive) continue;
      for (std::size_t j = i + 1; j < V; ++j) {
        if (!blocks[j].alive) continue;
        const double s = sim[i * V + j];
        if (!found || s > best) {
          best = s;
          bi = i;
          bj = j;
          found = true;
        }
      }
    }
    Block& a = blocks[bi];
    Block& b = blocks[bj];
    for (std::size_t v = 0; v < a.counts.size(); ++v) a.counts[v] += b.counts[v];
    a.size += b.size;
    a.log_lik = log_beta_ratio(a.counts, eta);
    b.alive = false;
    for (auto& l : label) {
      if (l == static_cast<int>(bj)) l = static_cast<int>(bi);
    }
    for (std::size_t k = 0; k < V; ++k) {
      if (k == bi || !blocks[k].alive) continue;
      const double s = similarity(std::min(k, bi), std::max(k, bi));
      sim[std::min(k, bi) * V + std::max(k, bi)] = s;
    }
    trace.chain.push_back(Partition::from_labels(label));
    trace.log_posterior.push_back(current_log_post());
  }

  for (std::size_t k = 1; k < trace.log_posterior.size(); ++k) {
    if (trace.log_posterior[k] >= trace.log_posterior[trace.best]) trace.best = k;
  }
  return trace;
}

Partition agglomerate(std::span<const CountVector> element_counts, double alpha, std::span<const double> eta,
                      TieBreak tie_break) {
  auto trace = agglomerate_trace(element_counts, alpha, eta, tie_break);
  return std::move(trace.chain[trace.best]);
}

ContextTree fit_pbct(const SequenceCorpus& corpus, const FitConfig& config) {
  const TieBreak tb = config.tie_break;
  TreeFitter fitter(corpus, config,
                    [tb](std::span<const CountVector> counts, double alpha, std::span<const double> eta) {
                      return agglomerate(counts, alpha, eta, tb);
                    });
  return fitter.fit();
}

ContextTree fit_vbm(const SequenceCorpus& corpus, const FitConfig& config) {
  TreeFitter fitter(corpus, config,
                    [](std::span<const CountVector> counts, double alpha, std::span<const double> eta) {
                      const auto V = static_cast<int>(counts.size());
                      CountVector pooled(counts.front().size(), 0);
                      for (const auto& c : counts) {
                        for (std::size_t v = 0; v < c.size(); ++v) pooled[v] += c[v];
                      }
                      const std::vector<CountVector> one{pooled};
                      const std::vector<int> all{V};
                      const double lp_trivial = local_log_posterior(one, all, alpha, eta);
                      const std::vector<int> ones(counts.size(), 1);
                      const double lp_split = local_log_posterior(counts, ones, alpha, eta);
                      return lp_split > lp_trivial ? Partition::singletons(V) : Partition::trivial(V);
                    });
  return fitter.fit();
}

std::uint64_t fbm_leaf_count(int vocab_size, int order) {
  if (vocab_size < 1 || order < 0) throw InvalidParameter("FBM needs V >= 1 and order >= 0");
  std::uint64_t n = 1;
  for (int d = 0; d < order; ++d) {
    if (n > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(vocab_size)) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    n *= static_cast<std::uint64_t>(vocab_size);
  }
  return n;
}

ContextTree build_fbm(const Vocabulary& vocab, int order) {
  if (order < 0) throw InvalidParameter("FBM order must be >= 0");
  const int V = vocab.size();
  std::map<NodeIndex, Partition> children;
  std::set<NodeIndex> leaves;
  if (order == 0 || V == 1) {
    // A single-symbol vocabulary has only the trivial partition.
    return ContextTree::single_leaf(vocab, order);
  }
  const Partition split = Partition::singletons(V);
  std::vector<NodeIndex> frontier{NodeIndex{}};
  for (int d = 0; d < order; ++d) {
    std::vector<NodeIndex> next;
    next.reserve(frontier.size() * static_cast<std::size_t>(V));
    for (const auto& e : frontier) {
      children.emplace_hint(children.end(), e, split);
      for (int k = 1; k <= V; ++k) next.push_back(e.child(k));
    }
    frontier = std::move(next);
  }
  leaves.insert(frontier.begin(), frontier.end());
  return ContextTree(vocab, order, std::move(children), std::move(leaves));
}

}  // namespace pbct
