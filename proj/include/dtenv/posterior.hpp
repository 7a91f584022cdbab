#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dtenv {

/// Probability vector over classes for one datum.
struct ClassPosterior {
  std::vector<double> probs;

  ClassPosterior() = default;
  explicit ClassPosterior(std::vector<double> p) : probs(std::move(p)) {}

  std::size_t size() const noexcept { return probs.size(); }
  double operator[](std::size_t c) const { return probs[c]; }

  /// Highest-probability class; ties go to the lower index.
  std::size_t argmax() const {
    std::size_t best = 0;
    for (std::size_t c = 1; c < probs.size(); ++c)
      if (probs[c] > probs[best]) best = c;
    return best;
  }

  double max() const { return probs.empty() ? 0.0 : probs[argmax()]; }

  bool is_valid(double tol = 1e-9) const {
    if (probs.empty()) return false;
    double total = 0.0;
    for (double p : probs) {
      if (!(p >= 0.0 && p <= 1.0 + tol)) return false;
      total += p;
    }
    return std::abs(total - 1.0) <= tol;
  }

  friend bool operator==(const ClassPosterior&, const ClassPosterior&) = default;
};

/// How an ensemble turns member outputs into a class posterior: the
/// fraction of members whose argmax is each class, or the mean of the
/// members' probability vectors.
enum class PosteriorMode { Vote, Average };

inline const char* to_string(PosteriorMode m) { return m == PosteriorMode::Vote ? "vote" : "average"; }

inline PosteriorMode parse_posterior_mode(const std::string& s) {
  if (s == "vote") return PosteriorMode::Vote;
  if (s == "average") return PosteriorMode::Average;
  throw std::invalid_argument("unknown posterior mode '" + s + "' (expected vote or average)");
}

/// Smoothed leaf estimate (n_c + alpha) / (n + C alpha); alpha = 1 is Laplace.
inline ClassPosterior leaf_posterior(std::span<const std::uint32_t> counts, double alpha = 1.0) {
  if (counts.empty()) throw std::invalid_argument("leaf_posterior: no classes");
  if (!(alpha > 0.0)) throw std::invalid_argument("leaf_posterior: alpha must be positive");
  const double n = std::accumulate(counts.begin(), counts.end(), 0.0);
  const double denom = n + alpha * static_cast<double>(counts.size());
  std::vector<double> p(counts.size());
  for (std::size_t c = 0; c < counts.size(); ++c) p[c] = (counts[c] + alpha) / denom;
  return ClassPosterior(std::move(p));
}

inline ClassPosterior leaf_posterior(const std::vector<std::uint32_t>& counts, double alpha = 1.0) {
  return leaf_posterior(std::span<const std::uint32_t>(counts), alpha);
}

}  // namespace dtenv
