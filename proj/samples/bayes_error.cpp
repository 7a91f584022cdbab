// Monte Carlo Bayes error of the two-class Gaussian mixture, plus the Bayes
// posterior at a few points.

#include <cstdio>
#include <cstdlib>

#include "dtenv/mixture.hpp"

int main(int argc, char** argv) {
  const std::size_t n = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1'000'000;
  const auto spec = dtenv::make_paper_mixture();
  std::printf("Bayes error over %zu draws: %.4f\n", n, dtenv::estimate_bayes_error(spec, n, 1));
  for (std::array<double, 2> x : {std::array{0.0, 0.0}, std::array{1.0, 1.0}, std::array{-1.0, 0.5}}) {
    const auto p = dtenv::bayes_posterior(spec, x);
    std::printf("P(class 1 | x = (%.1f, %.1f)) = %.3f\n", x[0], x[1], p[1]);
  }
}
