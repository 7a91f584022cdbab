#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "dtenv/posterior.hpp"

namespace dtenv {

enum class EnvelopeOutcome { ConfidentlyCorrect, Uncertain, ConfidentlyIncorrect };

/// Smallest attainable top-class probability, 1/C.
inline double p_min(std::size_t num_classes) {
  if (num_classes < 2) throw std::invalid_argument("p_min: need at least two classes");
  return 1.0 / static_cast<double>(num_classes);
}

/// Confident when the top class reaches p0; correct or incorrect by label.
inline EnvelopeOutcome classify_outcome(const ClassPosterior& posterior, std::size_t true_label, double p0) {
  if (!posterior.is_valid()) throw std::invalid_argument("classify_outcome: posterior is not a probability vector");
  if (true_label >= posterior.size()) throw std::invalid_argument("classify_outcome: label out of range");
  if (!(p0 > p_min(posterior.size()) && p0 <= 1.0))
    throw std::invalid_argument("classify_outcome: p0 must lie in (1/C, 1]");
  const std::size_t top = posterior.argmax();
  if (posterior[top] < p0) return EnvelopeOutcome::Uncertain;
  return top == true_label ? EnvelopeOutcome::ConfidentlyCorrect : EnvelopeOutcome::ConfidentlyIncorrect;
}

struct EnvelopeRates {
  double correct = 0.0;
  double uncertain = 0.0;
  double incorrect = 0.0;
  double accuracy = 0.0;
};

struct EnvelopeSummary {
  EnvelopeRates rates;
  /// 2 x sample standard deviation across folds; zero for a single fold.
  EnvelopeRates two_sigma;
  std::vector<EnvelopeRates> folds;
  std::size_t test_size = 0;

  double rate_correct() const { return rates.correct; }
  double rate_uncertain() const { return rates.uncertain; }
  double rate_incorrect() const { return rates.incorrect; }
  double accuracy() const { return rates.accuracy; }
};

/// Outcome fractions and plain argmax accuracy over one test set.
inline EnvelopeSummary envelope_rates(std::span<const ClassPosterior> posteriors, std::span<const std::size_t> labels,
                                      double p0) {
  if (posteriors.size() != labels.size()) throw std::invalid_argument("envelope_rates: length mismatch");
  if (posteriors.empty()) throw std::invalid_argument("envelope_rates: empty test set");
  std::size_t correct = 0, uncertain = 0, incorrect = 0, hits = 0;
  for (std::size_t i = 0; i < posteriors.size(); ++i) {
    switch (classify_outcome(posteriors[i], labels[i], p0)) {
      case EnvelopeOutcome::ConfidentlyCorrect: ++correct; break;
      case EnvelopeOutcome::Uncertain: ++uncertain; break;
      case EnvelopeOutcome::ConfidentlyIncorrect: ++incorrect; break;
    }
    hits += posteriors[i].argmax() == labels[i];
  }
  const double n = static_cast<double>(posteriors.size());
  EnvelopeSummary s;
  s.rates = {correct / n, uncertain / n, incorrect / n, hits / n};
  s.folds = {s.rates};
  s.test_size = posteriors.size();
  return s;
}

/// Mean rates across folds with 2-sigma widths (2 x sample std).
inline EnvelopeSummary cross_fold_summary(std::span<const EnvelopeSummary> folds) {
  if (folds.size() < 2) throw std::invalid_argument("cross_fold_summary: need at least two folds");
  const double k = static_cast<double>(folds.size());
  EnvelopeSummary out;
  auto field = [](EnvelopeRates& r, int i) -> double& {
    switch (i) {
      case 0: return r.correct;
      case 1: return r.uncertain;
      case 2: return r.incorrect;
      default: return r.accuracy;
    }
  };
  for (const auto& f : folds) {
    out.folds.push_back(f.rates);
    out.test_size += f.test_size;
  }
  for (int i = 0; i < 4; ++i) {
    double mean = 0.0;
    for (auto r : out.folds) mean += field(r, i);
    mean /= k;
    double ss = 0.0;
    for (auto r : out.folds) ss += (field(r, i) - mean) * (field(r, i) - mean);
    field(out.rates, i) = mean;
    field(out.two_sigma, i) = 2.0 * std::sqrt(ss / (k - 1.0));
  }
  return out;
}

}  // namespace dtenv
