// Trains a randomized ensemble on synthetic data, reports the confidence
// envelope on a fresh test set and prints the best member tree.

#include <iostream>
#include <vector>

#include "dtenv/envelope.hpp"
#include "dtenv/mixture.hpp"
#include "dtenv/randomized_ensemble.hpp"
#include "dtenv/report.hpp"

int main() {
  using namespace dtenv;
  const auto spec = make_paper_mixture();
  const Dataset train = sample_mixture(spec, 250, 1);
  const Dataset validation = sample_mixture(spec, 250, 2);
  const Dataset test = sample_mixture(spec, 1000, 3);

  EnsembleConfig config;
  config.seed = 42;
  const auto ensemble = train_ensemble(train, config);

  std::vector<ClassPosterior> posteriors;
  std::vector<std::size_t> labels;
  for (std::size_t i = 0; i < test.size(); ++i) {
    posteriors.push_back(ensemble_posterior(ensemble, test.row(i)));
    labels.push_back(test.label(i));
  }
  const auto envelope = envelope_rates(posteriors, labels, 0.99);
  std::cout << "accuracy " << percent(envelope.accuracy()) << "%, correct " << percent(envelope.rate_correct())
            << "%, uncertain " << percent(envelope.rate_uncertain()) << "%, incorrect "
            << percent(envelope.rate_incorrect()) << "%\n";

  const auto best = best_single_tree(ensemble, validation);
  const auto& tree = ensemble.trees[best.index];
  std::cout << "best tree #" << best.index << ": " << tree_size(tree) << " leaves, test accuracy "
            << percent(tree_accuracy(tree, test)) << "%\n"
            << to_text(tree);
}
