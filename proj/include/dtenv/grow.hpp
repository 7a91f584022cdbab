#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dtenv/dataset.hpp"
#include "dtenv/random.hpp"
#include "dtenv/splits.hpp"
#include "dtenv/tree.hpp"

namespace dtenv {

namespace detail {

inline std::size_t grow_node(const Dataset& data, std::vector<std::size_t> indices, std::size_t min_leaf,
                             std::size_t k, Rng& rng, DecisionTree& tree) {
  std::vector<std::uint32_t> counts(data.num_classes(), 0);
  for (std::size_t i : indices) ++counts[data.label(i)];
  const std::size_t id = tree.add_node(DecisionTree::Node{}, counts);

  std::size_t nonzero = 0;
  for (auto c : counts) nonzero += c > 0;
  if (nonzero <= 1 || indices.size() < 2 * min_leaf) return id;

  auto top = top_k_splits(enumerate_splits(data, indices, min_leaf), k);
  if (top.empty()) return id;
  const SplitRule rule = top[uniform_index(rng, top.size())].rule;

  std::vector<std::size_t> left, right;
  for (std::size_t i : indices) (rule.goes_left(data.row(i)) ? left : right).push_back(i);
  indices.clear();
  indices.shrink_to_fit();
  const std::size_t l = grow_node(data, std::move(left), min_leaf, k, rng, tree);
  const std::size_t r = grow_node(data, std::move(right), min_leaf, k, rng, tree);
  tree.set_children(id, rule, l, r);
  return id;
}

}  // namespace detail

/// Grows a tree top-down, choosing each split uniformly among the k
/// highest-gain candidates. A node becomes a leaf when it is pure, holds
/// fewer than 2 * min_leaf points, or has no admissible split. With k = 1
/// this is deterministic greedy induction.
inline DecisionTree grow_randomized(const Dataset& data, std::size_t min_leaf, std::size_t k, std::uint64_t seed) {
  if (data.empty()) throw std::invalid_argument("grow_randomized: empty dataset");
  if (min_leaf == 0) throw std::invalid_argument("grow_randomized: min_leaf must be at least 1");
  if (k == 0) throw std::invalid_argument("grow_randomized: k must be at least 1");
  Rng rng = make_rng(seed);
  DecisionTree tree = DecisionTree::empty(data.num_classes(), min_leaf);
  std::vector<std::size_t> all(data.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  detail::grow_node(data, std::move(all), min_leaf, k, rng, tree);
  return tree;
}

}  // namespace dtenv
