#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "dtenv/dataset.hpp"
#include "dtenv/grow.hpp"
#include "dtenv/parallel.hpp"
#include "dtenv/posterior.hpp"
#include "dtenv/random.hpp"
#include "dtenv/tree.hpp"

namespace dtenv {

struct EnsembleConfig {
  std::size_t n_trees = 200;
  /// Pruning factor; unset means the size-dependent default.
  std::optional<std::size_t> min_leaf;
  std::size_t top_k = 20;
  /// Training sets larger than this count as "many examples".
  std::size_t many_examples_threshold = 300;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

/// 30 points per leaf for large training sets, 5 otherwise.
inline std::size_t default_min_leaf(std::size_t train_size, std::size_t many_examples_threshold = 300) {
  return train_size > many_examples_threshold ? 30 : 5;
}

struct RandomizedEnsemble {
  std::vector<DecisionTree> trees;
  EnsembleConfig config;  // min_leaf always resolved

  std::size_t num_classes() const { return trees.front().num_classes(); }
};

/// Tree i is grown from seed derive_seed(config.seed, i), so the ensemble
/// does not depend on how the work is scheduled.
inline RandomizedEnsemble train_ensemble(const Dataset& train, EnsembleConfig config) {
  if (train.empty()) throw std::invalid_argument("train_ensemble: empty training set");
  if (config.n_trees == 0) throw std::invalid_argument("train_ensemble: n_trees must be at least 1");
  if (!config.min_leaf) config.min_leaf = default_min_leaf(train.size(), config.many_examples_threshold);
  RandomizedEnsemble ens{std::vector<DecisionTree>(config.n_trees), config};
  parallel_for(
      config.n_trees,
      [&](std::size_t i) {
        ens.trees[i] = grow_randomized(train, *config.min_leaf, config.top_k, derive_seed(config.seed, i));
      },
      config.threads);
  return ens;
}

/// Fraction of members voting for each class.
inline ClassPosterior vote_posterior(std::span<const std::size_t> votes, std::size_t num_classes) {
  if (votes.empty()) throw std::invalid_argument("vote_posterior: no votes");
  std::vector<double> p(num_classes, 0.0);
  for (std::size_t v : votes) p.at(v) += 1.0;
  for (double& x : p) x /= static_cast<double>(votes.size());
  return ClassPosterior(std::move(p));
}

inline ClassPosterior ensemble_posterior(const RandomizedEnsemble& ens, std::span<const double> x,
                                         PosteriorMode mode = PosteriorMode::Vote) {
  if (ens.trees.empty()) throw std::invalid_argument("ensemble_posterior: empty ensemble");
  const std::size_t classes = ens.num_classes();
  if (mode == PosteriorMode::Vote) {
    std::vector<std::size_t> votes;
    votes.reserve(ens.trees.size());
    for (const auto& t : ens.trees) votes.push_back(predict(t, x).argmax());
    return vote_posterior(votes, classes);
  }
  std::vector<double> p(classes, 0.0);
  for (const auto& t : ens.trees) {
    auto q = predict(t, x);
    for (std::size_t c = 0; c < classes; ++c) p[c] += q[c];
  }
  for (double& v : p) v /= static_cast<double>(ens.trees.size());
  return ClassPosterior(std::move(p));
}

inline double tree_accuracy(const DecisionTree& tree, const Dataset& data) {
  if (data.empty()) throw std::invalid_argument("tree_accuracy: empty dataset");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.size(); ++i) hits += predict(tree, data.row(i)).argmax() == data.label(i);
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

struct BestTree {
  std::size_t index = 0;
  double accuracy = 0.0;
};

/// Member with the highest validation accuracy; ties go to the lowest index.
inline BestTree best_single_tree(const RandomizedEnsemble& ens, const Dataset& validation) {
  if (validation.empty()) throw std::invalid_argument("best_single_tree: empty validation set");
  if (ens.trees.empty()) throw std::invalid_argument("best_single_tree: empty ensemble");
  BestTree best{0, -1.0};
  for (std::size_t i = 0; i < ens.trees.size(); ++i) {
    const double acc = tree_accuracy(ens.trees[i], validation);
    if (acc > best.accuracy) best = {i, acc};
  }
  return best;
}

}  // namespace dtenv
