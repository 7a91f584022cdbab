#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "dtenv/dataset.hpp"
#include "dtenv/tree.hpp"

namespace dtenv {

struct SplitCandidate {
  SplitRule rule;
  double gain = 0.0;
  std::size_t left_count = 0;

  friend bool operator==(const SplitCandidate&, const SplitCandidate&) = default;
};

namespace detail {

// Shannon entropy in bits of a count vector with the given total. Terms are
// summed in ascending count order so permuted class counts give bitwise equal
// results, keeping mathematically tied gains tied.
inline double entropy_bits(std::span<const std::uint32_t> counts, double total) {
  if (total <= 0.0) return 0.0;
  std::vector<std::uint32_t> sorted(counts.begin(), counts.end());
  std::ranges::sort(sorted);
  double h = 0.0;
  for (auto c : sorted) {
    if (c == 0) continue;
    const double p = c / total;
    h -= p * std::log2(p);
  }
  return h;
}

}  // namespace detail

/// Entropy reduction, in bits, from splitting `parent` into `left` and `right`.
inline double information_gain(std::span<const std::uint32_t> parent, std::span<const std::uint32_t> left,
                               std::span<const std::uint32_t> right) {
  if (left.size() != parent.size() || right.size() != parent.size())
    throw std::invalid_argument("information_gain: class count mismatch");
  double n = 0.0, nl = 0.0, nr = 0.0;
  for (std::size_t c = 0; c < parent.size(); ++c) {
    if (left[c] + right[c] != parent[c])
      throw std::invalid_argument("information_gain: children do not sum to parent");
    n += parent[c];
    nl += left[c];
    nr += right[c];
  }
  if (n < 2.0) throw std::invalid_argument("information_gain: parent needs at least two points");
  const double gain = detail::entropy_bits(parent, n) -
                      ((nl / n) * detail::entropy_bits(left, nl) + (nr / n) * detail::entropy_bits(right, nr));
  return std::max(0.0, gain);
}

inline double information_gain(const std::vector<std::uint32_t>& parent, const std::vector<std::uint32_t>& left,
                               const std::vector<std::uint32_t>& right) {
  return information_gain(std::span(parent), std::span(left), std::span(right));
}

/// All axis-aligned splits of the points `indices` of `data`, with thresholds
/// at midpoints between consecutive distinct values. Splits leaving fewer
/// than `min_leaf` points on either side are dropped. Output is ordered by
/// feature, then threshold.
inline std::vector<SplitCandidate> enumerate_splits(const Dataset& data, std::span<const std::size_t> indices,
                                                    std::size_t min_leaf) {
  std::vector<SplitCandidate> out;
  const std::size_t n = indices.size();
  if (n < 2) return out;
  min_leaf = std::max<std::size_t>(min_leaf, 1);
  const std::size_t classes = data.num_classes();

  std::vector<std::uint32_t> parent(classes, 0);
  for (std::size_t i : indices) ++parent[data.label(i)];

  std::vector<std::size_t> order(indices.begin(), indices.end());
  std::vector<std::uint32_t> left(classes), right(classes);
  for (std::size_t f = 0; f < data.num_features(); ++f) {
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double va = data.value(a, f), vb = data.value(b, f);
      return va < vb || (va == vb && a < b);
    });
    std::fill(left.begin(), left.end(), 0);
    for (std::size_t pos = 0; pos + 1 < n; ++pos) {
      ++left[data.label(order[pos])];
      const double lo = data.value(order[pos], f);
      const double hi = data.value(order[pos + 1], f);
      if (lo == hi) continue;
      const std::size_t nl = pos + 1;
      if (nl < min_leaf || n - nl < min_leaf) continue;
      for (std::size_t c = 0; c < classes; ++c) right[c] = parent[c] - left[c];
      double threshold = lo + (hi - lo) / 2.0;
      if (!(threshold < hi)) threshold = lo;
      out.push_back({{f, threshold}, information_gain(parent, left, right), nl});
    }
  }
  return out;
}

inline std::vector<SplitCandidate> enumerate_splits(const Dataset& data, std::size_t min_leaf) {
  std::vector<std::size_t> all(data.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return enumerate_splits(data, all, min_leaf);
}

/// Strict ranking: higher gain first, then lower feature, then lower threshold.
inline bool split_ranks_before(const SplitCandidate& a, const SplitCandidate& b) {
  if (a.gain != b.gain) return a.gain > b.gain;
  if (a.rule.feature != b.rule.feature) return a.rule.feature < b.rule.feature;
  return a.rule.threshold < b.rule.threshold;
}

/// The k best candidates in rank order (all of them when fewer than k).
inline std::vector<SplitCandidate> top_k_splits(std::vector<SplitCandidate> candidates, std::size_t k) {
  if (k == 0) throw std::invalid_argument("top_k_splits: k must be at least 1");
  const std::size_t keep = std::min(k, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end(),
                    split_ranks_before);
  candidates.resize(keep);
  return candidates;
}

}  // namespace dtenv
