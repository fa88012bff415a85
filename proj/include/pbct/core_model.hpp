#pragma once

// Domain types for parsimonious context trees: vocabularies, vocabulary
// partitions, trees indexed by child-number paths, and leaf count tables.
//
// Symbols are 1-based integers throughout; string labels only matter for I/O.

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace pbct {

using Symbol = int;
using Sequence = std::vector<Symbol>;
using CountVector = std::vector<std::int64_t>;

class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(int size);
  explicit Vocabulary(std::vector<std::string> labels);

  int size() const noexcept { return size_; }
  bool has_labels() const noexcept { return !labels_.empty(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  /// Label of a 1-based symbol, or its decimal id in integer-only mode.
  std::string label(Symbol s) const;
  std::optional<Symbol> lookup(const std::string& label) const;

  bool operator==(const Vocabulary&) const = default;

 private:
  int size_ = 0;
  std::vector<std::string> labels_;
  std::map<std::string, Symbol> index_;
};

/// Path of 1-based child numbers from the root; the empty path is the root.
struct NodeIndex {
  std::vector<int> path;

  NodeIndex() = default;
  NodeIndex(std::initializer_list<int> p) : path(p) {}
  explicit NodeIndex(std::vector<int> p) : path(std::move(p)) {}

  int depth() const noexcept { return static_cast<int>(path.size()); }
  bool is_root() const noexcept { return path.empty(); }
  NodeIndex child(int k) const;
  NodeIndex parent() const;
  std::string to_string() const;

  auto operator<=>(const NodeIndex&) const = default;
  bool operator==(const NodeIndex&) const = default;
};

/// Ordered list of blocks over {1..V}. Construction does not validate;
/// use violations() or canonical().
class Partition {
 public:
  using Block = std::vector<Symbol>;

  Partition() = default;
  explicit Partition(std::vector<Block> blocks) : blocks_(std::move(blocks)) {}
  Partition(std::initializer_list<Block> blocks) : blocks_(blocks) {}

  /// Sorts each block and orders blocks by their minimum element.
  static Partition canonical(std::vector<Block> blocks);
  static Partition trivial(int vocab_size);
  static Partition singletons(int vocab_size);
  /// Builds from per-symbol block labels (labels[v-1] is the block of v).
  static Partition from_labels(std::span<const int> labels);

  const std::vector<Block>& blocks() const noexcept { return blocks_; }
  std::size_t size() const noexcept { return blocks_.size(); }
  bool is_trivial() const noexcept { return blocks_.size() == 1; }
  std::vector<int> block_sizes() const;
  int universe_size() const;

  /// 0-based position of the block holding s, if any.
  std::optional<std::size_t> block_of(Symbol s) const;

  /// Per-symbol 0-based block positions; -1 where a symbol is unassigned.
  std::vector<int> labels(int vocab_size) const;

  /// Empty when the blocks are a partition of {1..V}.
  std::vector<std::string> violations(int vocab_size) const;

  std::string to_string() const;

  bool operator==(const Partition&) const = default;

 private:
  std::vector<Block> blocks_;
};

/// Rooted tree whose internal nodes own a partition of the vocabulary. Child k
/// of node e is e·k and corresponds to block k of e's partition.
///
/// The constructor stores exactly what it is given so that malformed trees can
/// be reported by validate_tree(); the factories produce valid trees.
class ContextTree {
 public:
  ContextTree() = default;
  ContextTree(Vocabulary vocab, int max_depth, std::map<NodeIndex, Partition> children,
              std::set<NodeIndex> leaves);

  /// Derives the leaf set from the internal nodes.
  static ContextTree from_children(Vocabulary vocab, int max_depth,
                                   std::map<NodeIndex, Partition> children);
  static ContextTree single_leaf(Vocabulary vocab, int max_depth);

  const Vocabulary& vocab() const noexcept { return vocab_; }
  int vocab_size() const noexcept { return vocab_.size(); }
  int max_depth() const noexcept { return max_depth_; }
  const std::map<NodeIndex, Partition>& children() const noexcept { return children_; }
  const std::set<NodeIndex>& leaves() const noexcept { return leaves_; }

  bool is_leaf(const NodeIndex& e) const { return leaves_.contains(e); }
  bool contains(const NodeIndex& e) const { return is_leaf(e) || children_.contains(e); }
  /// Children partition of an internal node, nullptr for leaves and unknown nodes.
  const Partition* children_of(const NodeIndex& e) const;

  /// Deepest node depth actually present.
  int realized_depth() const;
  std::vector<NodeIndex> nodes_at_depth(int depth) const;

  bool operator==(const ContextTree&) const = default;

 private:
  Vocabulary vocab_;
  int max_depth_ = 0;
  std::map<NodeIndex, Partition> children_;
  std::set<NodeIndex> leaves_;
};

using CountMap = std::map<NodeIndex, CountVector>;

/// Next-symbol counts per leaf.
struct CountTable {
  int vocab_size = 0;
  CountMap counts;

  /// All-zero table keyed by the tree's leaves.
  static CountTable zeros(const ContextTree& tree);
  std::int64_t total() const;

  bool operator==(const CountTable&) const = default;
};

/// CRP rate as a function of node depth: base * decay^depth.
struct AlphaSchedule {
  double base = 1.0;
  double decay = 1.0;

  double at(int depth) const;
  bool operator==(const AlphaSchedule&) const = default;
};

struct Hyperparams {
  std::vector<double> eta;
  AlphaSchedule alpha;
  int max_depth = 0;

  static Hyperparams symmetric(int vocab_size, double eta, double alpha, int max_depth,
                               double decay = 1.0);
  /// Throws InvalidParameter when eta or the schedule are out of range.
  void validate(int vocab_size) const;

  bool operator==(const Hyperparams&) const = default;
};

struct SequenceCorpus {
  Vocabulary vocab;
  std::vector<Sequence> sequences;

  /// Throws SymbolOutOfRange naming the first offending symbol.
  void validate() const;
  std::size_t total_length() const;
};

struct Violation {
  NodeIndex node;
  std::string message;
};

struct ValidationResult {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  std::string to_string() const;
};

ValidationResult validate_tree(const ContextTree& tree);

/// Follows the partition blocks from the root. history[0] is the most recent
/// symbol. Throws InsufficientHistory if the path needs more symbols than given.
NodeIndex map_context_to_leaf(const ContextTree& tree, std::span<const Symbol> history);

std::size_t leaf_count(const ContextTree& tree);

/// Flattened, array-based form of a valid tree for the hot routing loops.
/// Leaf ids follow the (lexicographic) order of ContextTree::leaves().
class LeafRouter {
 public:
  explicit LeafRouter(const ContextTree& tree);

  std::size_t leaf_count() const noexcept { return leaf_nodes_.size(); }
  const NodeIndex& leaf_index(std::size_t leaf_id) const { return leaf_nodes_[leaf_id]; }

  /// Leaf id for the context preceding seq[pos]; needs pos >= path depth.
  std::size_t route(std::span<const Symbol> seq, std::size_t pos) const;

  /// Node id reached after exactly `depth` steps for the context preceding
  /// seq[pos], or nullopt if the path ends at a shallower leaf.
  std::optional<std::size_t> node_at_depth(std::span<const Symbol> seq, std::size_t pos,
                                           int depth) const;
  std::size_t node_count() const noexcept { return nodes_.size(); }
  const NodeIndex& node_index(std::size_t node_id) const { return nodes_[node_id].index; }

 private:
  struct Node {
    NodeIndex index;
    std::int32_t leaf_id = -1;
    std::vector<std::int32_t> child_of_symbol;  // indexed by symbol-1; empty at leaves
  };
  int vocab_size_;
  std::vector<Node> nodes_;
  std::vector<NodeIndex> leaf_nodes_;
};

}  // namespace pbct
