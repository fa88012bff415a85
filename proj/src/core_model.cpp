#include "pbct/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "pbct/errors.hpp"

namespace pbct {

Vocabulary::Vocabulary(int size) : size_(size) {
  if (size < 1) throw InvalidParameter("vocabulary size must be >= 1");
}

Vocabulary::Vocabulary(std::vector<std::string> labels)
    : size_(static_cast<int>(labels.size())), labels_(std::move(labels)) {
  if (size_ < 1) throw InvalidParameter("vocabulary must hold at least one label");
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (!index_.emplace(labels_[i], static_cast<Symbol>(i + 1)).second) {
      throw InvalidParameter("duplicate vocabulary label '" + labels_[i] + "'");
    }
  }
}

std::string Vocabulary::label(Symbol s) const {
  if (s < 1 || s > size_) throw SymbolOutOfRange("symbol " + std::to_string(s) + " outside vocabulary");
  return labels_.empty() ? std::to_string(s) : labels_[s - 1];
}

std::optional<Symbol> Vocabulary::lookup(const std::string& label) const {
  if (labels_.empty()) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(label, &used);
      if (used == label.size() && v >= 1 && v <= size_) return v;
    } catch (const std::exception&) {
    }
    return std::nullopt;
  }
  auto it = index_.find(label);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

NodeIndex NodeIndex::child(int k) const {
  NodeIndex c = *this;
  c.path.push_back(k);
  return c;
}

NodeIndex NodeIndex::parent() const {
  NodeIndex p = *this;
  if (!p.path.empty()) p.path.pop_back();
  return p;
}

std::string NodeIndex::to_string() const {
  std::string out = "(";
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(path[i]);
  }
  return out + ")";
}

Partition Partition::canonical(std::vector<Block> blocks) {
  for (auto& b : blocks) std::sort(b.begin(), b.end());
  std::sort(blocks.begin(), blocks.end(), [](const Block& a, const Block& b) {
    if (a.empty() || b.empty()) return a.size() < b.size();
    return a.front() < b.front();
  });
  return Partition(std::move(blocks));
}

Partition Partition::trivial(int vocab_size) {
  Block all(static_cast<std::size_t>(vocab_size));
  std::iota(all.begin(), all.end(), 1);
  return Partition({std::move(all)});
}

Partition Partition::singletons(int vocab_size) {
  std::vector<Block> blocks;
  blocks.reserve(static_cast<std::size_t>(vocab_size));
  for (Symbol v = 1; v <= vocab_size; ++v) blocks.push_back({v});
  return Partition(std::move(blocks));
}

Partition Partition::from_labels(std::span<const int> labels) {
  std::map<int, Block> by_label;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    by_label[labels[i]].push_back(static_cast<Symbol>(i + 1));
  }
  std::vector<Block> blocks;
  for (auto& [_, b] : by_label) blocks.push_back(std::move(b));
  return canonical(std::move(blocks));
}

std::vector<int> Partition::block_sizes() const {
  std::vector<int> sizes;
  sizes.reserve(blocks_.size());
  for (const auto& b : blocks_) sizes.push_back(static_cast<int>(b.size()));
  return sizes;
}

int Partition::universe_size() const {
  int n = 0;
  for (const auto& b : blocks_) n += static_cast<int>(b.size());
  return n;
}

std::optional<std::size_t> Partition::block_of(Symbol s) const {
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    if (std::find(blocks_[k].begin(), blocks_[k].end(), s) != blocks_[k].end()) return k;
  }
  return std::nullopt;
}

std::vector<int> Partition::labels(int vocab_size) const {
  std::vector<int> out(static_cast<std::size_t>(vocab_size), -1);
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    for (Symbol s : blocks_[k]) {
      if (s >= 1 && s <= vocab_size) out[s - 1] = static_cast<int>(k);
    }
  }
  return out;
}

std::vector<std::string> Partition::violations(int vocab_size) const {
  std::vector<std::string> out;
  if (blocks_.empty()) {
    out.emplace_back("partition has no blocks");
    return out;
  }
  std::vector<int> owner(static_cast<std::size_t>(std::max(vocab_size, 0)), -1);
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    if (blocks_[k].empty()) out.push_back("block " + std::to_string(k + 1) + " is empty");
    for (Symbol s : blocks_[k]) {
      if (s < 1 || s > vocab_size) {
        out.push_back("symbol " + std::to_string(s) + " outside vocabulary");
        continue;
      }
      int& o = owner[s - 1];
      if (o >= 0) {
        out.push_back("blocks overlap at symbol " + std::to_string(s) + " (blocks " +
                      std::to_string(o + 1) + " and " + std::to_string(k + 1) + ")");
      } else {
        o = static_cast<int>(k);
      }
    }
  }
  for (int v = 1; v <= vocab_size; ++v) {
    if (owner[v - 1] < 0) out.push_back("symbol " + std::to_string(v) + " not covered");
  }
  return out;
}

std::string Partition::to_string() const {
  std::string out = "{";
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    if (k) out += ",";
    out += "{";
    for (std::size_t i = 0; i < blocks_[k].size(); ++i) {
      if (i) out += ",";
      out += std::to_string(blocks_[k][i]);
    }
    out += "}";
  }
  return out + "}";
}

ContextTree::ContextTree(Vocabulary vocab, int max_depth, std::map<NodeIndex, Partition> children,
                         std::set<NodeIndex> leaves)
    : vocab_(std::move(vocab)),
      max_depth_(max_depth),
      children_(std::move(children)),
      leaves_(std::move(leaves)) {}

ContextTree ContextTree::from_children(Vocabulary vocab, int max_depth,
                                       std::map<NodeIndex, Partition> children) {
  std::set<NodeIndex> leaves;
  if (children.empty()) {
    leaves.insert(NodeIndex{});
  } else {
    for (const auto& [e, part] : children) {
      for (std::size_t k = 1; k <= part.size(); ++k) {
        NodeIndex c = e.child(static_cast<int>(k));
        if (!children.contains(c)) leaves.insert(std::move(c));
      }
    }
  }
  return ContextTree(std::move(vocab), max_depth, std::move(children), std::move(leaves));
}

ContextTree ContextTree::single_leaf(Vocabulary vocab, int max_depth) {
  return from_children(std::move(vocab), max_depth, {});
}

const Partition* ContextTree::children_of(const NodeIndex& e) const {
  auto it = children_.find(e);
  return it == children_.end() ? nullptr : &it->second;
}

int ContextTree::realized_depth() const {
  int d = 0;
  for (const auto& e : leaves_) d = std::max(d, e.depth());
  for (const auto& [e, _] : children_) d = std::max(d, e.depth());
  return d;
}

std::vector<NodeIndex> ContextTree::nodes_at_depth(int depth) const {
  std::vector<NodeIndex> out;
  for (const auto& [e, _] : children_) {
    if (e.depth() == depth) out.push_back(e);
  }
  for (const auto& e : leaves_) {
    if (e.depth() == depth) out.push_back(e);
  }
  std::sort(out.begin(), out.end());
  return out;
}

CountTable CountTable::zeros(const ContextTree& tree) {
  CountTable t;
  t.vocab_size = tree.vocab_size();
  for (const auto& e : tree.leaves()) {
    t.counts.emplace(e, CountVector(static_cast<std::size_t>(tree.vocab_size()), 0));
  }
  return t;
}

std::int64_t CountTable::total() const {
  std::int64_t n = 0;
  for (const auto& [_, c] : counts) n = std::accumulate(c.begin(), c.end(), n);
  return n;
}

double AlphaSchedule::at(int depth) const { return base * std::pow(decay, depth); }

Hyperparams Hyperparams::symmetric(int vocab_size, double eta, double alpha, int max_depth,
                                   double decay) {
  Hyperparams h;
  h.eta.assign(static_cast<std::size_t>(vocab_size), eta);
  h.alpha = AlphaSchedule{alpha, decay};
  h.max_depth = max_depth;
  return h;
}

void Hyperparams::validate(int vocab_size) const {
  if (static_cast<int>(eta.size()) != vocab_size) {
    throw InvalidParameter("eta has " + std::to_string(eta.size()) + " entries, expected " +
                           std::to_string(vocab_size));
  }
  for (double e : eta) {
    if (!(e > 0.0) || !std::isfinite(e)) throw InvalidParameter("eta entries must be positive");
  }
  if (max_depth < 0) throw InvalidParameter("max depth must be >= 0");
  if (!(alpha.base > 0.0) || !std::isfinite(alpha.base)) {
    throw InvalidParameter("alpha must be positive");
  }
  if (!(alpha.decay > 0.0 && alpha.decay <= 1.0)) {
    throw InvalidParameter("alpha decay must lie in (0, 1]");
  }
  for (int d = 0; d < max_depth; ++d) {
    if (!(alpha.at(d) > 0.0)) throw InvalidParameter("alpha schedule underflows at depth " + std::to_string(d));
  }
}

void SequenceCorpus::validate() const {
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    for (std::size_t n = 0; n < sequences[i].size(); ++n) {
      const Symbol s = sequences[i][n];
      if (s < 1 || s > vocab.size()) {
        throw SymbolOutOfRange("sequence " + std::to_string(i + 1) + ", position " +
                               std::to_string(n + 1) + ": symbol " + std::to_string(s) +
                               " outside 1.." + std::to_string(vocab.size()));
      }
    }
  }
}

std::size_t SequenceCorpus::total_length() const {
  std::size_t n = 0;
  for (const auto& s : sequences) n += s.size();
  return n;
}

std::string ValidationResult::to_string() const {
  if (ok()) return "ok";
  std::ostringstream os;
  for (const auto& v : violations) os << "node " << v.node.to_string() << ": " << v.message << "\n";
  return os.str();
}

ValidationResult validate_tree(const ContextTree& tree) {
  ValidationResult r;
  auto flag = [&](const NodeIndex& e, std::string msg) {
    r.violations.push_back({e, std::move(msg)});
  };
  const int V = tree.vocab_size();
  const int D = tree.max_depth();
  if (V < 1) flag({}, "vocabulary is empty");
  if (D < 0) flag({}, "negative maximum depth");

  const NodeIndex root;
  const bool root_leaf = tree.is_leaf(root);
  const bool root_internal = tree.children().contains(root);
  if (!root_leaf && !root_internal) flag(root, "root missing");

  auto check_parent = [&](const NodeIndex& e) {
    if (e.is_root()) return;
    const Partition* p = tree.children_of(e.parent());
    if (p == nullptr) {
      flag(e, "parent " + e.parent().to_string() + " is not an internal node");
    } else if (e.path.back() < 1 || static_cast<std::size_t>(e.path.back()) > p->size()) {
      flag(e, "child number exceeds parent's block count " + std::to_string(p->size()));
    }
  };

  for (const auto& [e, part] : tree.children()) {
    if (tree.is_leaf(e)) flag(e, "node is both a leaf and an internal node");
    if (e.depth() >= D) flag(e, "internal node at depth " + std::to_string(e.depth()) + " >= max depth");
    for (auto& msg : part.violations(V)) flag(e, std::move(msg));
    if (part.size() == 1) flag(e, "trivial partition stored as internal node");
    for (std::size_t k = 1; k <= part.size(); ++k) {
      const NodeIndex c = e.child(static_cast<int>(k));
      if (!tree.contains(c)) flag(c, "missing child of " + e.to_string());
    }
    check_parent(e);
  }
  for (const auto& e : tree.leaves()) {
    if (e.depth() > D) flag(e, "leaf deeper than max depth");
    check_parent(e);
  }
  return r;
}

NodeIndex map_context_to_leaf(const ContextTree& tree, std::span<const Symbol> history) {
  NodeIndex e;
  while (const Partition* part = tree.children_of(e)) {
    const auto d = static_cast<std::size_t>(e.depth());
    if (d >= history.size()) {
      throw InsufficientHistory("context path needs more than " + std::to_string(history.size()) +
                                " history symbols");
    }
    const auto k = part->block_of(history[d]);
    if (!k) {
      throw SymbolOutOfRange("history symbol " + std::to_string(history[d]) + " not in partition at " +
                             e.to_string());
    }
    e = e.child(static_cast<int>(*k) + 1);
  }
  if (!tree.is_leaf(e)) throw InvalidParameter("routing reached unknown node " + e.to_string());
  return e;
}

std::size_t leaf_count(const ContextTree& tree) { return tree.leaves().size(); }

LeafRouter::LeafRouter(const ContextTree& tree) : vocab_size_(tree.vocab_size()) {
  if (auto v = validate_tree(tree); !v.ok()) {
    throw InvalidParameter("cannot route on invalid tree:\n" + v.to_string());
  }
  leaf_nodes_.assign(tree.leaves().begin(), tree.leaves().end());

  // Breadth-first flatten; the root is node 0.
  nodes_.push_back(Node{NodeIndex{}, -1, {}});
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const NodeIndex e = nodes_[i].index;
    if (const Partition* part = tree.children_of(e)) {
      std::vector<std::int32_t> table(static_cast<std::size_t>(vocab_size_), -1);
      for (std::size_t k = 0; k < part->size(); ++k) {
        const auto id = static_cast<std::int32_t>(nodes_.size());
        nodes_.push_back(Node{e.child(static_cast<int>(k) + 1), -1, {}});
        for (Symbol s : part->blocks()[k]) table[s - 1] = id;
      }
      nodes_[i].child_of_symbol = std::move(table);
    } else {
      auto it = std::lower_bound(leaf_nodes_.begin(), leaf_nodes_.end(), e);
      nodes_[i].leaf_id = static_cast<std::int32_t>(it - leaf_nodes_.begin());
    }
  }
}

std::size_t LeafRouter::route(std::span<const Symbol> seq, std::size_t pos) const {
  std::size_t node = 0;
  std::size_t back = 1;
  while (nodes_[node].leaf_id < 0) {
    if (back > pos) throw InsufficientHistory("position " + std::to_string(pos) + " lacks context");
    const Symbol s = seq[pos - back];
    if (s < 1 || s > vocab_size_) throw SymbolOutOfRange("symbol " + std::to_string(s) + " outside vocabulary");
    node = static_cast<std::size_t>(nodes_[node].child_of_symbol[static_cast<std::size_t>(s - 1)]);
    ++back;
  }
  return static_cast<std::size_t>(nodes_[node].leaf_id);
}

std::optional<std::size_t> LeafRouter::node_at_depth(std::span<const Symbol> seq, std::size_t pos,
                                                     int depth) const {
  std::size_t node = 0;
  for (int d = 0; d < depth; ++d) {
    if (nodes_[node].leaf_id >= 0) return std::nullopt;
    const auto back = static_cast<std::size_t>(d) + 1;
    if (back > pos) throw InsufficientHistory("position " + std::to_string(pos) + " lacks context");
    const Symbol s = seq[pos - back];
    if (s < 1 || s > vocab_size_) throw SymbolOutOfRange("symbol " + std::to_string(s) + " outside vocabulary");
    node = static_cast<std::size_t>(nodes_[node].child_of_symbol[static_cast<std::size_t>(s - 1)]);
  }
  return node;
}

}  // namespace pbct
