#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "dtenv/dataset.hpp"
#include "dtenv/posterior.hpp"
#include "dtenv/random.hpp"

namespace dtenv {

/// Isotropic 2-D Gaussian kernel of a class-labelled mixture.
struct MixtureComponent {
  double weight = 0.0;
  std::array<double, 2> mean{};
  double variance = 1.0;  // covariance is variance * I
  std::size_t label = 0;
};

struct GaussianMixtureSpec {
  std::vector<MixtureComponent> components;

  std::size_t num_classes() const {
    std::size_t c = 0;
    for (const auto& k : components) c = std::max(c, k.label + 1);
    return c;
  }

  void validate() const {
    if (components.empty()) throw std::invalid_argument("mixture has no components");
    double total = 0.0;
    for (const auto& k : components) {
      if (!(k.weight > 0.0 && k.weight < 1.0 + 1e-12))
        throw std::invalid_argument("mixture weight outside (0, 1]");
      if (!(k.variance > 0.0)) throw std::invalid_argument("mixture variance must be positive");
      total += k.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("mixture weights do not sum to 1");
    if (num_classes() < 2) throw std::invalid_argument("mixture needs two classes");
  }
};

/// The five-kernel, two-class benchmark. Class ids are 0-based: the first
/// three kernels are class 0, the remaining two class 1.
inline GaussianMixtureSpec make_paper_mixture() {
  constexpr double var = 0.03;
  return {{
      {0.16, {1.0, 1.0}, var, 0},
      {0.17, {0.7, 0.3}, var, 0},
      {0.17, {0.3, 0.3}, var, 0},
      {0.25, {-0.3, 0.7}, var, 1},
      {0.25, {0.4, 0.7}, var, 1},
  }};
}

inline Dataset sample_mixture(const GaussianMixtureSpec& spec, std::size_t n, std::uint64_t seed) {
  spec.validate();
  if (n == 0) throw std::invalid_argument("sample_mixture: n must be positive");
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> features;
  std::vector<std::size_t> labels;
  features.reserve(2 * n);
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double u = uniform01(rng);
    std::size_t pick = spec.components.size() - 1;
    double acc = 0.0;
    for (std::size_t j = 0; j < spec.components.size(); ++j) {
      acc += spec.components[j].weight;
      if (u < acc) {
        pick = j;
        break;
      }
    }
    const auto& k = spec.components[pick];
    const double sd = std::sqrt(k.variance);
    features.push_back(k.mean[0] + sd * normal(rng));
    features.push_back(k.mean[1] + sd * normal(rng));
    labels.push_back(k.label);
  }
  return Dataset(std::move(features), std::move(labels), 2, spec.num_classes(), {"x1", "x2"});
}

/// P(class | x) under the mixture. If every kernel density underflows the
/// class priors are returned.
inline ClassPosterior bayes_posterior(const GaussianMixtureSpec& spec, std::array<double, 2> x) {
  const std::size_t classes = spec.num_classes();
  std::vector<double> post(classes, 0.0);
  std::vector<double> prior(classes, 0.0);
  for (const auto& k : spec.components) {
    const double dx = x[0] - k.mean[0];
    const double dy = x[1] - k.mean[1];
    const double density = std::exp(-(dx * dx + dy * dy) / (2.0 * k.variance)) / (2.0 * M_PI * k.variance);
    post[k.label] += k.weight * density;
    prior[k.label] += k.weight;
  }
  double total = std::accumulate(post.begin(), post.end(), 0.0);
  if (!(total > 0.0) || !std::isfinite(total)) {
    post = prior;
    total = std::accumulate(post.begin(), post.end(), 0.0);
  }
  for (double& p : post) p /= total;
  return ClassPosterior(std::move(post));
}

/// Monte-Carlo error of the Bayes-optimal rule on n fresh draws.
inline double estimate_bayes_error(const GaussianMixtureSpec& spec, std::size_t n, std::uint64_t seed) {
  const Dataset sample = sample_mixture(spec, n, seed);
  std::size_t errors = 0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const auto post = bayes_posterior(spec, {sample.value(i, 0), sample.value(i, 1)});
    if (post.argmax() != sample.label(i)) ++errors;
  }
  return static_cast<double>(errors) / static_cast<double>(n);
}

}  // namespace dtenv
