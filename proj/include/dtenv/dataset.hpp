#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dtenv/random.hpp"

namespace dtenv {

/// Row-major feature matrix with dense class labels 0..num_classes-1.
class Dataset {
 public:
  Dataset() = default;

  Dataset(std::vector<double> features, std::vector<std::size_t> labels, std::size_t num_features,
          std::size_t num_classes, std::vector<std::string> feature_names = {})
      : features_(std::move(features)),
        labels_(std::move(labels)),
        num_features_(num_features),
        num_classes_(num_classes),
        feature_names_(std::move(feature_names)) {
    if (num_classes_ < 2) throw std::invalid_argument("dataset needs at least two classes");
    if (num_features_ == 0) throw std::invalid_argument("dataset needs at least one feature");
    if (features_.size() != labels_.size() * num_features_)
      throw std::invalid_argument("feature matrix size does not match labels x features");
    for (std::size_t y : labels_)
      if (y >= num_classes_) throw std::invalid_argument("label out of range");
    if (feature_names_.empty()) {
      for (std::size_t j = 0; j < num_features_; ++j) feature_names_.push_back("x" + std::to_string(j));
    } else if (feature_names_.size() != num_features_) {
      throw std::invalid_argument("feature name count does not match feature count");
    }
  }

  std::size_t size() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }
  std::size_t num_features() const noexcept { return num_features_; }
  std::size_t num_classes() const noexcept { return num_classes_; }

  std::span<const double> row(std::size_t i) const {
    return {features_.data() + i * num_features_, num_features_};
  }
  double value(std::size_t i, std::size_t feature) const { return features_[i * num_features_ + feature]; }
  std::size_t label(std::size_t i) const { return labels_[i]; }

  const std::vector<double>& features() const noexcept { return features_; }
  const std::vector<std::size_t>& labels() const noexcept { return labels_; }
  const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }
  /// Original label tokens, index = dense class id. Empty for generated data.
  const std::vector<std::string>& class_names() const noexcept { return class_names_; }
  void set_class_names(std::vector<std::string> names) { class_names_ = std::move(names); }

  /// Rows at `indices`, keeping the class count and schema.
  Dataset subset(std::span<const std::size_t> indices) const {
    std::vector<double> f;
    std::vector<std::size_t> y;
    f.reserve(indices.size() * num_features_);
    y.reserve(indices.size());
    for (std::size_t i : indices) {
      auto r = row(i);
      f.insert(f.end(), r.begin(), r.end());
      y.push_back(labels_[i]);
    }
    Dataset out(std::move(f), std::move(y), num_features_, num_classes_, feature_names_);
    out.class_names_ = class_names_;
    return out;
  }

  std::vector<std::size_t> class_counts() const {
    std::vector<std::size_t> counts(num_classes_, 0);
    for (std::size_t y : labels_) ++counts[y];
    return counts;
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::vector<double> features_;
  std::vector<std::size_t> labels_;
  std::size_t num_features_ = 0;
  std::size_t num_classes_ = 0;
  std::vector<std::string> feature_names_;
  std::vector<std::string> class_names_;
};

struct FoldSplit {
  std::vector<std::size_t> fold_assignments;
  std::size_t k = 0;

  std::vector<std::size_t> members(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_assignments.size(); ++i)
      if (fold_assignments[i] == fold) out.push_back(i);
    return out;
  }
  std::vector<std::size_t> complement(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_assignments.size(); ++i)
      if (fold_assignments[i] != fold) out.push_back(i);
    return out;
  }
};

inline std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng = make_rng(seed);
  // Fisher-Yates with our own index draws so the order is stable across
  // standard library implementations of std::shuffle.
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[uniform_index(rng, i)]);
  return perm;
}

/// Random partition of 0..n-1 into k folds whose sizes differ by at most one.
inline FoldSplit kfold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("kfold_split: k must be at least 2");
  if (k > n) throw std::invalid_argument("kfold_split: more folds than data points");
  auto perm = seeded_permutation(n, seed);
  FoldSplit split{std::vector<std::size_t>(n), k};
  for (std::size_t pos = 0; pos < n; ++pos) split.fold_assignments[perm[pos]] = pos % k;
  return split;
}

struct TrainTest {
  Dataset train;
  Dataset test;
};

/// Unstratified seeded split into `train_count` and `test_count` rows.
inline TrainTest train_test_split(const Dataset& data, std::size_t train_count, std::size_t test_count,
                                  std::uint64_t seed) {
  if (train_count == 0 || test_count == 0)
    throw std::invalid_argument("train_test_split: counts must be positive");
  if (train_count + test_count > data.size())
    throw std::invalid_argument("train_test_split: requested " + std::to_string(train_count + test_count) +
                                " rows but dataset has " + std::to_string(data.size()));
  auto perm = seeded_permutation(data.size(), seed);
  std::span<const std::size_t> all(perm);
  return {data.subset(all.subspan(0, train_count)), data.subset(all.subspan(train_count, test_count))};
}

}  // namespace dtenv
