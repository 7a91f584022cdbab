#pragma once

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "dtenv/bayesian_cart.hpp"
#include "dtenv/csv.hpp"
#include "dtenv/envelope.hpp"
#include "dtenv/experiment_config.hpp"
#include "dtenv/mixture.hpp"
#include "dtenv/randomized_ensemble.hpp"
#include "dtenv/registry.hpp"

namespace dtenv {

// Stream ids under the master seed. Each consumer derives its own seed so
// adding a consumer never shifts another one's draws.
namespace seed_stream {
inline constexpr std::uint64_t kSyntheticTrain = 1;
inline constexpr std::uint64_t kSyntheticTest = 2;
inline constexpr std::uint64_t kTrainTestSplit = 3;
inline constexpr std::uint64_t kFolds = 4;
inline constexpr std::uint64_t kRandomizedFold = 100;
inline constexpr std::uint64_t kBayesian = 200;
inline constexpr std::uint64_t kBayesianFold = 300;
}  // namespace seed_stream

struct ExperimentData {
  std::string name;
  Dataset train;
  Dataset test;
};

/// Loads or generates the train/test data; fails before any model is fitted.
inline ExperimentData load_experiment_data(const ExperimentConfig& config) {
  const auto& ds = config.dataset;
  const std::uint64_t seed = config.seed;
  switch (ds.source) {
    case DataSource::Synthetic: {
      const auto spec = make_paper_mixture();
      return {config.name, sample_mixture(spec, ds.train.value_or(250), derive_seed(seed, seed_stream::kSyntheticTrain)),
              sample_mixture(spec, ds.test.value_or(1000), derive_seed(seed, seed_stream::kSyntheticTest))};
    }
    case DataSource::Csv:
    case DataSource::Registry: {
      std::filesystem::path path;
      std::size_t train = 0, test = 0;
      ColumnSelector label = ds.label_column;
      if (ds.source == DataSource::Csv) {
        path = config.resolved_path();
        train = *ds.train;
        test = *ds.test;
        if (!ds.label_column.empty() &&
            std::all_of(ds.label_column.begin(), ds.label_column.end(), [](unsigned char c) { return std::isdigit(c); }))
          label = static_cast<std::size_t>(std::stoull(ds.label_column));
      } else {
        const auto& info = find_dataset(ds.id);
        path = cached_csv_path(ds.id);
        if (!std::filesystem::exists(path))
          throw std::runtime_error("dataset '" + ds.id + "' is not cached at " + path.string() + "; run `dtenv fetch " +
                                   ds.id + "` first");
        train = ds.train.value_or(info.train);
        test = ds.test.value_or(info.test);
        label = std::string("class");
      }
      const Dataset all = load_csv(path.string(), label);
      auto split = train_test_split(all, train, test, derive_seed(seed, seed_stream::kTrainTestSplit));
      return {config.name, std::move(split.train), std::move(split.test)};
    }
  }
  throw std::logic_error("unreachable data source");
}

struct FoldResult {
  std::size_t fold = 0;
  std::size_t train_size = 0;
  std::size_t validation_size = 0;
  double accuracy = 0.0;
  EnvelopeRates rates;
  SizeSummary size;
  /// Randomized only: best tree on the validation fold, scored on the test set.
  std::optional<BestTree> best_single;
  std::optional<double> best_single_test_accuracy;
};

struct TechniqueReport {
  Technique technique = Technique::Randomized;
  SizeSummary size;
  EnvelopeSummary envelope;
  std::vector<FoldResult> folds;
  /// Mean and 2-sigma width over folds of the best single tree's test accuracy.
  std::optional<std::pair<double, double>> best_single;
  std::optional<ChainStats> chain_stats;
  std::size_t models = 0;
  /// (p0, rates) for every requested sweep value.
  std::vector<std::pair<double, EnvelopeRates>> sweep;
  /// Highest-posterior sample (Bayesian) or first fold's best tree (randomized).
  std::shared_ptr<const DecisionTree> representative;

  double accuracy() const { return envelope.accuracy(); }
  bool has_folds() const { return !folds.empty(); }
};

struct ExperimentReport {
  ExperimentConfig config;
  std::string dataset;
  std::size_t num_classes = 0;
  std::size_t num_features = 0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::vector<TechniqueReport> techniques;

  const TechniqueReport* find(Technique t) const {
    for (const auto& r : techniques)
      if (r.technique == t) return &r;
    return nullptr;
  }
};

struct RunOutputs {
  /// Receives the Bayesian chain trace when set.
  std::ostream* trace = nullptr;
  /// Receives progress lines when set.
  std::ostream* log = nullptr;
};

namespace experiment_detail {

template <typename Predict>
std::vector<ClassPosterior> posteriors_on(const Dataset& test, Predict&& predict) {
  std::vector<ClassPosterior> out;
  out.reserve(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) out.push_back(predict(test.row(i)));
  return out;
}

inline EnvelopeSummary summarize(const std::vector<EnvelopeSummary>& per_fold) {
  return per_fold.size() >= 2 ? cross_fold_summary(per_fold) : per_fold.front();
}

inline std::vector<std::pair<double, EnvelopeRates>> sweep_of(const ExperimentConfig& config,
                                                               const std::vector<std::vector<ClassPosterior>>& posts,
                                                               const Dataset& test) {
  std::vector<std::pair<double, EnvelopeRates>> out;
  for (double p0 : config.p0_sweep) {
    std::vector<EnvelopeSummary> per_fold;
    for (const auto& p : posts) per_fold.push_back(envelope_rates(p, test.labels(), p0));
    out.emplace_back(p0, summarize(per_fold).rates);
  }
  return out;
}

inline void check_p0(double p0, std::size_t classes, const char* what) {
  if (!(p0 > p_min(classes)))
    throw ConfigError(std::string("config: [experiment] ") + what + " must exceed 1/C = " +
                      config_detail::format_double(p_min(classes)));
}

}  // namespace experiment_detail

inline TechniqueReport run_randomized(const ExperimentConfig& config, const ExperimentData& data,
                                      const RunOutputs& outputs = {}) {
  using namespace experiment_detail;
  const FoldSplit split = kfold_split(data.train.size(), config.folds, derive_seed(config.seed, seed_stream::kFolds));
  TechniqueReport report;
  report.technique = Technique::Randomized;
  std::vector<EnvelopeSummary> per_fold;
  std::vector<std::vector<ClassPosterior>> all_posts;
  std::vector<double> sizes, single;
  for (std::size_t f = 0; f < config.folds; ++f) {
    const Dataset train = data.train.subset(split.complement(f));
    const Dataset validation = data.train.subset(split.members(f));
    EnsembleConfig ec = config.randomized;
    ec.seed = derive_seed(config.seed, seed_stream::kRandomizedFold + f);
    ec.threads = config.threads;
    const RandomizedEnsemble ens = train_ensemble(train, ec);
    auto posts = posteriors_on(data.test, [&](auto x) { return ensemble_posterior(ens, x, config.envelope_mode); });
    per_fold.push_back(envelope_rates(posts, data.test.labels(), config.p0));

    FoldResult fr;
    fr.fold = f;
    fr.train_size = train.size();
    fr.validation_size = validation.size();
    fr.rates = per_fold.back().rates;
    fr.accuracy = fr.rates.accuracy;
    std::vector<double> fold_sizes;
    for (const auto& t : ens.trees) fold_sizes.push_back(static_cast<double>(tree_size(t)));
    fr.size = size_summary(fold_sizes);
    sizes.insert(sizes.end(), fold_sizes.begin(), fold_sizes.end());
    fr.best_single = best_single_tree(ens, validation);
    fr.best_single_test_accuracy = tree_accuracy(ens.trees[fr.best_single->index], data.test);
    single.push_back(*fr.best_single_test_accuracy);
    if (f == 0) report.representative = std::make_shared<const DecisionTree>(ens.trees[fr.best_single->index]);
    report.models += ens.trees.size();
    report.folds.push_back(fr);
    all_posts.push_back(std::move(posts));
    if (outputs.log)
      *outputs.log << "randomized fold " << f + 1 << "/" << config.folds << ": accuracy " << fr.accuracy
                   << ", best single " << *fr.best_single_test_accuracy << '\n';
  }
  report.envelope = summarize(per_fold);
  report.size = size_summary(sizes);
  const auto s = size_summary(single);
  report.best_single = std::pair{s.mean, 2.0 * s.std};
  report.sweep = sweep_of(config, all_posts, data.test);
  return report;
}

inline TechniqueReport run_bayesian(const ExperimentConfig& config, const ExperimentData& data,
                                    const RunOutputs& outputs = {}) {
  using namespace experiment_detail;
  TechniqueReport report;
  report.technique = Technique::Bayesian;
  report.chain_stats = ChainStats{};
  std::vector<EnvelopeSummary> per_fold;
  std::vector<std::vector<ClassPosterior>> all_posts;
  std::vector<double> sizes;
  double best_log_post = kNegInf;

  const std::size_t runs = config.bayesian_cv ? config.folds : 1;
  const FoldSplit split = kfold_split(data.train.size(), std::max<std::size_t>(runs, 2),
                                      derive_seed(config.seed, seed_stream::kFolds));
  for (std::size_t f = 0; f < runs; ++f) {
    const Dataset train = config.bayesian_cv ? data.train.subset(split.complement(f)) : data.train;
    McmcConfig mc = config.bayesian;
    mc.seed = config.bayesian_cv ? derive_seed(config.seed, seed_stream::kBayesianFold + f)
                                 : derive_seed(config.seed, seed_stream::kBayesian);
    mc.threads = config.threads;
    const PosteriorEnsemble ens = run_with_restarts(train, mc);
    if (outputs.trace) write_trace(*outputs.trace, ens);
    auto posts = posteriors_on(data.test, [&](auto x) { return bayes_predictive(ens, x, config.envelope_mode); });
    per_fold.push_back(envelope_rates(posts, data.test.labels(), config.p0));
    *report.chain_stats += ens.stats;
    report.models += ens.size();
    for (const auto& s : ens.samples) {
      sizes.push_back(static_cast<double>(tree_size(*s.tree)));
      if (s.log_likelihood + s.log_prior > best_log_post) {
        best_log_post = s.log_likelihood + s.log_prior;
        report.representative = s.tree;
      }
    }
    if (config.bayesian_cv) {
      FoldResult fr;
      fr.fold = f;
      fr.train_size = train.size();
      fr.validation_size = data.train.size() - train.size();
      fr.rates = per_fold.back().rates;
      fr.accuracy = fr.rates.accuracy;
      fr.size = ensemble_mean_size(ens);
      report.folds.push_back(fr);
    }
    all_posts.push_back(std::move(posts));
    if (outputs.log)
      *outputs.log << "bayesian run " << f + 1 << "/" << runs << ": accuracy " << per_fold.back().accuracy()
                   << ", samples " << ens.size() << '\n';
  }
  report.envelope = summarize(per_fold);
  report.size = size_summary(sizes);
  report.sweep = sweep_of(config, all_posts, data.test);
  return report;
}

/// Runs every selected technique. The report depends only on the config.
inline ExperimentReport run_experiment(const ExperimentConfig& config, const RunOutputs& outputs = {}) {
  config.validate();
  const ExperimentData data = load_experiment_data(config);
  const std::size_t classes = data.train.num_classes();
  experiment_detail::check_p0(config.p0, classes, "p0");
  for (double p : config.p0_sweep) experiment_detail::check_p0(p, classes, "p0_sweep values");
  if ((config.runs_randomized() || config.bayesian_cv) && config.folds > data.train.size())
    throw ConfigError("config: [experiment] folds exceeds the training set size");

  ExperimentReport report;
  report.config = config;
  report.dataset = data.name;
  report.num_classes = classes;
  report.num_features = data.train.num_features();
  report.train_size = data.train.size();
  report.test_size = data.test.size();
  if (config.runs_bayesian()) report.techniques.push_back(run_bayesian(config, data, outputs));
  if (config.runs_randomized()) report.techniques.push_back(run_randomized(config, data, outputs));
  return report;
}

}  // namespace dtenv
