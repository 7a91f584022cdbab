#pragma once

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dtenv/dataset.hpp"
#include "dtenv/posterior.hpp"

namespace dtenv {

/// Axis-aligned question: x[feature] <= threshold goes left.
struct SplitRule {
  std::size_t feature = 0;
  double threshold = 0.0;

  bool goes_left(std::span<const double> x) const { return x[feature] <= threshold; }
  friend bool operator==(const SplitRule&, const SplitRule&) = default;
};

/// Binary decision tree stored as a node array rooted at index 0. Every node
/// carries the per-class counts of the training points that reach it.
class DecisionTree {
 public:
  static constexpr std::int32_t kNone = -1;

  struct Node {
    SplitRule rule;
    std::int32_t left = kNone;
    std::int32_t right = kNone;

    bool is_leaf() const noexcept { return left == kNone; }
    friend bool operator==(const Node&, const Node&) = default;
  };

  DecisionTree() = default;

  /// Single-leaf tree.
  explicit DecisionTree(std::vector<std::uint32_t> root_counts, std::size_t min_leaf = 1)
      : num_classes_(root_counts.size()), min_leaf_(min_leaf), nodes_(1), counts_(std::move(root_counts)) {
    if (num_classes_ < 2) throw std::invalid_argument("DecisionTree: need at least two classes");
  }

  static DecisionTree single_leaf(const Dataset& data, std::size_t min_leaf = 1) {
    std::vector<std::uint32_t> counts(data.num_classes(), 0);
    for (std::size_t y : data.labels()) ++counts[y];
    return DecisionTree(std::move(counts), min_leaf);
  }

  std::size_t num_classes() const noexcept { return num_classes_; }
  std::size_t min_leaf() const noexcept { return min_leaf_; }
  std::size_t num_nodes() const noexcept { return nodes_.size(); }
  const Node& node(std::size_t i) const { return nodes_[i]; }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }

  std::span<const std::uint32_t> counts(std::size_t i) const {
    return {counts_.data() + i * num_classes_, num_classes_};
  }
  std::span<std::uint32_t> mutable_counts(std::size_t i) {
    return {counts_.data() + i * num_classes_, num_classes_};
  }
  std::uint32_t total(std::size_t i) const {
    auto c = counts(i);
    return std::accumulate(c.begin(), c.end(), std::uint32_t{0});
  }

  std::size_t num_leaves() const {
    std::size_t k = 0;
    for (const auto& n : nodes_) k += n.is_leaf();
    return k;
  }

  std::vector<std::size_t> leaves() const { return select([](const Node& n) { return n.is_leaf(); }); }
  std::vector<std::size_t> internal_nodes() const {
    return select([](const Node& n) { return !n.is_leaf(); });
  }
  /// Internal nodes whose two children are both leaves.
  std::vector<std::size_t> prunable_nodes() const {
    return select([this](const Node& n) {
      return !n.is_leaf() && nodes_[n.left].is_leaf() && nodes_[n.right].is_leaf();
    });
  }

  std::size_t leaf_index(std::span<const double> x) const {
    std::size_t i = 0;
    while (!nodes_[i].is_leaf()) i = nodes_[i].rule.goes_left(x) ? nodes_[i].left : nodes_[i].right;
    return i;
  }

  /// Turns leaf `i` into a split with two fresh leaves appended at the end.
  /// Counts of the new leaves are zero until refresh_counts.
  DecisionTree split_leaf(std::size_t i, SplitRule rule) const {
    if (!nodes_.at(i).is_leaf()) throw std::invalid_argument("split_leaf: node is not a leaf");
    DecisionTree out = *this;
    out.nodes_[i].rule = rule;
    out.nodes_[i].left = static_cast<std::int32_t>(out.nodes_.size());
    out.nodes_[i].right = static_cast<std::int32_t>(out.nodes_.size() + 1);
    out.nodes_.resize(out.nodes_.size() + 2);
    out.counts_.resize(out.nodes_.size() * num_classes_, 0);
    return out;
  }

  /// Replaces the subtree at internal node `i` by a leaf; node ids are
  /// renumbered in preorder.
  DecisionTree collapse(std::size_t i) const {
    if (nodes_.at(i).is_leaf()) throw std::invalid_argument("collapse: node is already a leaf");
    DecisionTree out;
    out.num_classes_ = num_classes_;
    out.min_leaf_ = min_leaf_;
    copy_preorder(0, i, out);
    return out;
  }

  DecisionTree with_rule(std::size_t i, SplitRule rule) const {
    if (nodes_.at(i).is_leaf()) throw std::invalid_argument("with_rule: node is a leaf");
    DecisionTree out = *this;
    out.nodes_[i].rule = rule;
    return out;
  }

  /// Recomputes every node's class counts by routing `data` from the root.
  void refresh_counts(const Dataset& data) {
    std::fill(counts_.begin(), counts_.end(), 0);
    for (std::size_t r = 0; r < data.size(); ++r) {
      auto x = data.row(r);
      const std::size_t y = data.label(r);
      std::size_t i = 0;
      for (;;) {
        ++counts_[i * num_classes_ + y];
        if (nodes_[i].is_leaf()) break;
        i = nodes_[i].rule.goes_left(x) ? nodes_[i].left : nodes_[i].right;
      }
    }
  }

  /// Low-level construction used by growers; `counts` are the node's totals.
  std::size_t add_node(const Node& n, std::span<const std::uint32_t> counts) {
    nodes_.push_back(n);
    counts_.insert(counts_.end(), counts.begin(), counts.end());
    return nodes_.size() - 1;
  }
  void set_children(std::size_t i, SplitRule rule, std::size_t left, std::size_t right) {
    nodes_[i].rule = rule;
    nodes_[i].left = static_cast<std::int32_t>(left);
    nodes_[i].right = static_cast<std::int32_t>(right);
  }
  static DecisionTree empty(std::size_t num_classes, std::size_t min_leaf) {
    DecisionTree t;
    t.num_classes_ = num_classes;
    t.min_leaf_ = min_leaf;
    return t;
  }

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

 private:
  template <typename Pred>
  std::vector<std::size_t> select(Pred pred) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      if (pred(nodes_[i])) out.push_back(i);
    return out;
  }

  std::size_t copy_preorder(std::size_t src, std::size_t cut, DecisionTree& out) const {
    const std::size_t id = out.add_node(Node{nodes_[src].rule, kNone, kNone}, counts(src));
    if (src == cut || nodes_[src].is_leaf()) {
      out.nodes_[id].rule = SplitRule{};
      return id;
    }
    const std::size_t l = copy_preorder(nodes_[src].left, cut, out);
    const std::size_t r = copy_preorder(nodes_[src].right, cut, out);
    out.nodes_[id].left = static_cast<std::int32_t>(l);
    out.nodes_[id].right = static_cast<std::int32_t>(r);
    return id;
  }

  std::size_t num_classes_ = 0;
  std::size_t min_leaf_ = 1;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> counts_;
};

/// Laplace-smoothed class probabilities of the leaf reached by x.
inline ClassPosterior predict(const DecisionTree& tree, std::span<const double> x, double alpha = 1.0) {
  return leaf_posterior(tree.counts(tree.leaf_index(x)), alpha);
}

/// Number of terminal nodes.
inline std::size_t tree_size(const DecisionTree& tree) { return tree.num_leaves(); }
inline std::size_t node_count(const DecisionTree& tree) { return tree.num_nodes(); }

// Text format, one node per line after a header:
//   tree <num_classes> <num_nodes> <min_leaf>
//   <id> split <feature> <threshold> <left> <right> <count_0> ... <count_C-1>
//   <id> leaf <count_0> ... <count_C-1>
inline void write_tree(std::ostream& out, const DecisionTree& tree) {
  out << "tree " << tree.num_classes() << ' ' << tree.num_nodes() << ' ' << tree.min_leaf() << '\n';
  char buf[64];
  for (std::size_t i = 0; i < tree.num_nodes(); ++i) {
    const auto& n = tree.node(i);
    out << i;
    if (n.is_leaf()) {
      out << " leaf";
    } else {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, n.rule.threshold);
      out << " split " << n.rule.feature << ' ' << std::string_view(buf, ptr - buf) << ' ' << n.left << ' '
          << n.right;
    }
    for (auto c : tree.counts(i)) out << ' ' << c;
    out << '\n';
  }
}

inline std::string to_text(const DecisionTree& tree) {
  std::ostringstream os;
  write_tree(os, tree);
  return os.str();
}

inline DecisionTree read_tree(std::istream& in) {
  std::string tag;
  std::size_t classes = 0, count = 0, min_leaf = 1;
  if (!(in >> tag >> classes >> count >> min_leaf) || tag != "tree" || classes < 2 || count == 0)
    throw std::runtime_error("read_tree: bad header");
  DecisionTree tree = DecisionTree::empty(classes, min_leaf);
  std::vector<std::uint32_t> counts(classes);
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t id = 0;
    std::string kind;
    if (!(in >> id >> kind) || id != i) throw std::runtime_error("read_tree: bad node id at node " + std::to_string(i));
    DecisionTree::Node n;
    if (kind == "split") {
      std::string threshold;
      if (!(in >> n.rule.feature >> threshold >> n.left >> n.right))
        throw std::runtime_error("read_tree: bad split at node " + std::to_string(i));
      auto [ptr, ec] = std::from_chars(threshold.data(), threshold.data() + threshold.size(), n.rule.threshold);
      if (ec != std::errc{}) throw std::runtime_error("read_tree: bad threshold at node " + std::to_string(i));
      if (n.left <= static_cast<std::int32_t>(i) || n.right <= static_cast<std::int32_t>(i) ||
          n.left >= static_cast<std::int32_t>(count) || n.right >= static_cast<std::int32_t>(count))
        throw std::runtime_error("read_tree: bad child index at node " + std::to_string(i));
    } else if (kind != "leaf") {
      throw std::runtime_error("read_tree: unknown node kind '" + kind + "'");
    }
    for (auto& c : counts)
      if (!(in >> c)) throw std::runtime_error("read_tree: bad counts at node " + std::to_string(i));
    tree.add_node(n, counts);
  }
  return tree;
}

inline DecisionTree from_text(const std::string& text) {
  std::istringstream is(text);
  return read_tree(is);
}

}  // namespace dtenv
