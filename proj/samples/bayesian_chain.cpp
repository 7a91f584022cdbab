// Runs a few short reversible-jump chains and writes the sample trace to
// stdout.

#include <cstdio>
#include <iostream>

#include "dtenv/bayesian_cart.hpp"
#include "dtenv/mixture.hpp"

int main() {
  using namespace dtenv;
  const Dataset train = sample_mixture(make_paper_mixture(), 250, 1);
  McmcConfig config;
  config.restarts = 4;
  config.burn_in = 500;
  config.post_burn_in = 500;
  config.thinning = 50;
  config.seed = 3;
  const auto ensemble = run_with_restarts(train, config);
  const auto size = ensemble_mean_size(ensemble);
  std::fprintf(stderr, "%zu samples, mean size %.2f (sd %.2f)\n", ensemble.size(), size.mean, size.std);
  write_trace(std::cout, ensemble);
}
