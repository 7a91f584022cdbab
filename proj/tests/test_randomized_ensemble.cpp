#include <gtest/gtest.h>

#include <cmath>

#include "dtenv/mixture.hpp"
#include "dtenv/randomized_ensemble.hpp"

using namespace dtenv;
using Counts = std::vector<std::uint32_t>;

namespace {

RandomizedEnsemble from_trees(std::vector<DecisionTree> trees) {
  RandomizedEnsemble e;
  e.trees = std::move(trees);
  e.config.min_leaf = 1;
  e.config.n_trees = e.trees.size();
  return e;
}

// 1-D data on 0..9, class 1 from x = 5 upward.
Dataset step_data() {
  std::vector<double> x;
  std::vector<std::size_t> y;
  for (int i = 0; i < 10; ++i) {
    x.push_back(i);
    y.push_back(i >= 5);
  }
  return Dataset(std::move(x), std::move(y), 1, 2);
}

DecisionTree stump(const Dataset& d, double threshold) {
  DecisionTree t = DecisionTree::single_leaf(d).split_leaf(0, {0, threshold});
  t.refresh_counts(d);
  return t;
}

double ensemble_accuracy(const RandomizedEnsemble& e, const Dataset& test, PosteriorMode mode) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < test.size(); ++i) hits += ensemble_posterior(e, test.row(i), mode).argmax() == test.label(i);
  return static_cast<double>(hits) / test.size();
}

}  // namespace

TEST(TrainEnsemble, SyntheticDefaults) {
  const Dataset train = sample_mixture(make_paper_mixture(), 200, 1);
  EnsembleConfig cfg;
  cfg.seed = 3;
  const auto e = train_ensemble(train, cfg);
  EXPECT_EQ(e.trees.size(), 200u);
  EXPECT_EQ(*e.config.min_leaf, 5u);
  for (const auto& t : e.trees) EXPECT_EQ(t.min_leaf(), 5u);
}

TEST(TrainEnsemble, MinLeafRule) {
  EXPECT_EQ(default_min_leaf(455), 30u);  // Wisconsin training set
  EXPECT_EQ(default_min_leaf(200), 5u);
  EXPECT_EQ(default_min_leaf(300), 5u);
  EXPECT_EQ(default_min_leaf(301), 30u);
  // The rule never exceeds a tenth of the training set when it fires.
  EXPECT_LE(30.0, 0.1 * 301);
}

TEST(TrainEnsemble, DeterministicAndSchedulingIndependent) {
  const Dataset train = sample_mixture(make_paper_mixture(), 150, 2);
  EnsembleConfig cfg;
  cfg.n_trees = 25;
  cfg.seed = 9;
  cfg.threads = 1;
  const auto a = train_ensemble(train, cfg);
  cfg.threads = 4;
  const auto b = train_ensemble(train, cfg);
  EXPECT_EQ(a.trees, b.trees);
  cfg.seed = 10;
  EXPECT_NE(train_ensemble(train, cfg).trees, a.trees);
}

TEST(EnsemblePosterior, VoteCounting) {
  std::vector<DecisionTree> trees(998, DecisionTree(Counts{5, 1}));
  trees.insert(trees.end(), 2, DecisionTree(Counts{1, 5}));
  const auto e = from_trees(std::move(trees));
  const auto p = ensemble_posterior(e, std::vector<double>{0.0}, PosteriorMode::Vote);
  EXPECT_NEAR(p[0], 0.998, 1e-12);
  EXPECT_NEAR(p[1], 0.002, 1e-12);
}

TEST(EnsemblePosterior, AverageOfOpposites) {
  const auto e = from_trees({DecisionTree(Counts{9, 1}), DecisionTree(Counts{1, 9})});
  const auto p = ensemble_posterior(e, std::vector<double>{0.0}, PosteriorMode::Average);
  EXPECT_NEAR(p[0], 0.5, 1e-15);
  EXPECT_NEAR(p[1], 0.5, 1e-15);
}

TEST(EnsemblePosterior, VoteTieGoesToLowerClass) {
  const auto e = from_trees({DecisionTree(Counts{3, 3})});
  EXPECT_EQ(ensemble_posterior(e, std::vector<double>{0.0}).argmax(), 0u);
}

TEST(EnsemblePosterior, UnanimityMatchesSingleTree) {
  const Dataset train = sample_mixture(make_paper_mixture(), 100, 4);
  const auto t = grow_randomized(train, 5, 20, 1);
  const auto e = from_trees(std::vector<DecisionTree>(7, t));
  const Dataset test = sample_mixture(make_paper_mixture(), 50, 5);
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto single = predict(t, test.row(i)).argmax();
    EXPECT_EQ(ensemble_posterior(e, test.row(i), PosteriorMode::Vote).argmax(), single);
    EXPECT_EQ(ensemble_posterior(e, test.row(i), PosteriorMode::Average).argmax(), single);
  }
}

TEST(EnsemblePosterior, Invariants) {
  const Dataset train = sample_mixture(make_paper_mixture(), 200, 6);
  EnsembleConfig cfg;
  cfg.n_trees = 40;
  cfg.seed = 1;
  auto e = train_ensemble(train, cfg);
  const Dataset test = sample_mixture(make_paper_mixture(), 100, 7);
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto v = ensemble_posterior(e, test.row(i), PosteriorMode::Vote);
    const auto a = ensemble_posterior(e, test.row(i), PosteriorMode::Average);
    EXPECT_TRUE(v.is_valid(1e-12));
    EXPECT_TRUE(a.is_valid(1e-9));
    for (double p : v.probs) {
      const double scaled = p * 40.0;
      EXPECT_NEAR(scaled, std::round(scaled), 1e-9);
    }
  }
  // A duplicated member pulls the vote toward its own class.
  const auto x = test.row(0);
  const auto before = ensemble_posterior(e, x);
  const std::size_t cls = predict(e.trees[3], x).argmax();
  e.trees.push_back(e.trees[3]);
  EXPECT_GE(ensemble_posterior(e, x)[cls], before[cls]);
}

TEST(BestSingleTree, PicksMaximumAccuracy) {
  const Dataset d = step_data();
  const auto e = from_trees({stump(d, 2.5), stump(d, 3.5), stump(d, 2.5)});
  const auto best = best_single_tree(e, d);
  EXPECT_EQ(best.index, 1u);
  EXPECT_DOUBLE_EQ(best.accuracy, 0.9);
  EXPECT_DOUBLE_EQ(tree_accuracy(e.trees[0], d), 0.8);
}

TEST(BestSingleTree, TiesGoToLowestIndex) {
  const Dataset d = step_data();
  const auto e = from_trees(std::vector<DecisionTree>(4, stump(d, 3.5)));
  const auto best = best_single_tree(e, d);
  EXPECT_EQ(best.index, 0u);
  EXPECT_DOUBLE_EQ(best.accuracy, 0.9);
}

TEST(EnsembleSize, AccuracyStableFromTenToTwoHundredTrees) {
  const auto spec = make_paper_mixture();
  const Dataset train = sample_mixture(spec, 250, 100);
  const Dataset test = sample_mixture(spec, 1000, 101);
  EnsembleConfig cfg;
  cfg.seed = 5;
  const auto full = train_ensemble(train, cfg);
  auto small = full;
  small.trees.resize(10);
  EXPECT_GE(ensemble_accuracy(full, test, PosteriorMode::Vote),
            ensemble_accuracy(small, test, PosteriorMode::Vote) - 0.01);
}
