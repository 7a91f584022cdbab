// Acceptance suite: one PASS/FAIL line per criterion. With no arguments all
// criteria run; otherwise only the listed criterion numbers. Exit status is
// nonzero when any selected criterion fails.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "dtenv/bayesian_cart.hpp"
#include "dtenv/envelope.hpp"
#include "dtenv/experiment.hpp"
#include "dtenv/mixture.hpp"
#include "dtenv/report.hpp"
#include "dtenv/splits.hpp"
#include "oracles.hpp"

using namespace dtenv;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  std::function<Outcome()> check;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

std::string num(double v, int decimals = 4) { return fixed(v, decimals); }

const fs::path kSynthConfig = fs::path(DTENV_SOURCE_DIR) / "configs" / "synth.cfg";

ExperimentConfig synth_config(std::uint64_t seed) {
  ExperimentConfig c = load_config(kSynthConfig);
  c.seed = seed;
  return c;
}

// Full-protocol runs of both techniques, shared by criteria 4 and 5.
const ExperimentReport& full_run(std::uint64_t seed) {
  static std::map<std::uint64_t, ExperimentReport> cache;
  auto it = cache.find(seed);
  if (it == cache.end()) it = cache.emplace(seed, run_experiment(synth_config(seed))).first;
  return it->second;
}

// Randomized-only run at seed 7, shared by criteria 2 and 10.
const TechniqueReport& randomized_seed7() {
  static const TechniqueReport report = [] {
    auto c = synth_config(7);
    c.technique = Technique::Randomized;
    return run_experiment(c).techniques.front();
  }();
  return report;
}

Outcome bayes_error() {
  const auto start = Clock::now();
  const double err = estimate_bayes_error(make_paper_mixture(), 1'000'000, 2024);
  const double t = seconds_since(start);
  return {err >= 0.086 && err <= 0.100 && t < 30.0,
          "estimate " + num(err) + " (want [0.086, 0.100]), " + num(t, 1) + " s (want < 30)"};
}

Outcome randomized_accuracy() {
  const auto start = Clock::now();
  const auto& r = randomized_seed7();
  const double t = seconds_since(start);
  const double acc = r.accuracy();
  return {acc >= 0.84 && acc <= 0.90 && t < 120.0,
          "mean test accuracy " + num(acc) + " (want [0.84, 0.90]), " + num(t, 1) + " s (want < 120)"};
}

Outcome bayesian_accuracy() {
  const auto start = Clock::now();
  auto c = synth_config(7);
  c.technique = Technique::Bayesian;
  apply_preset(c, Preset::Desk);
  const auto r = run_experiment(c);
  const double t = seconds_since(start);
  const double acc = r.techniques.front().accuracy();
  return {acc >= 0.82 && acc <= 0.91 && t < 300.0,
          "desk test accuracy " + num(acc) + " (want [0.82, 0.91]), " + num(t, 1) + " s (want < 300)"};
}

Outcome confident_errors() {
  bool pass = true;
  std::string detail;
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto& r = full_run(seed);
    const double b = r.find(Technique::Bayesian)->envelope.rate_incorrect();
    const double z = r.find(Technique::Randomized)->envelope.rate_incorrect();
    pass = pass && b < z;
    detail += (detail.empty() ? "" : "; ") + std::string("seed ") + std::to_string(seed) + ": bayesian " + num(b) +
              " vs randomized " + num(z);
  }
  return {pass, "confidently incorrect at p0 = 0.99, " + detail};
}

Outcome tree_sizes() {
  bool pass = true;
  std::string detail;
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto& r = full_run(seed);
    const double b = r.find(Technique::Bayesian)->size.mean;
    const double z = r.find(Technique::Randomized)->size.mean;
    pass = pass && b < z;
    detail += (detail.empty() ? "" : "; ") + std::string("seed ") + std::to_string(seed) + ": bayesian " + num(b, 2) +
              " vs randomized " + num(z, 2);
  }
  return {pass, "mean leaf count, " + detail};
}

Outcome prior_sampling() {
  const Dataset data = sample_mixture(make_paper_mixture(), 250, 11);
  McmcConfig c;
  c.constant_likelihood = true;
  c.max_leaves = 4;
  c.burn_in = 1000;
  c.post_burn_in = 100'000;
  c.thinning = 50;
  const auto run = run_chain(data, c, 0, 6);
  std::vector<double> hist(4, 0.0);
  for (const auto& s : run.samples) hist[tree_size(*s.tree) - 1] += 1.0;
  const std::vector<double> expected(4, static_cast<double>(run.samples.size()) / 4.0);
  const double p = oracle::chi_square_p(hist, expected);
  return {p > 0.001, "leaf-count histogram {" + num(hist[0], 0) + ", " + num(hist[1], 0) + ", " + num(hist[2], 0) +
                         ", " + num(hist[3], 0) + "}, chi-square p = " + num(p) + " (want > 0.001)"};
}

Outcome move_mix() {
  const Dataset data = sample_mixture(make_paper_mixture(), 250, 12);
  McmcConfig c;
  c.burn_in = 1;
  c.post_burn_in = 99'999;
  const auto run = run_chain(data, c, 0, 8);
  const double n = static_cast<double>(run.stats.total_proposed());
  const std::array<double, 4> want{0.1, 0.1, 0.1, 0.7};
  bool pass = run.stats.total_proposed() == 100'000;
  std::string detail;
  for (std::size_t k = 0; k < 4; ++k) {
    const double f = run.stats.proposed[k] / n;
    pass = pass && std::abs(f - want[k]) <= 0.01;
    detail += (k ? ", " : "") + std::string(to_string(static_cast<MoveKind>(k))) + " " + num(f);
  }
  return {pass, "frequencies over " + num(n, 0) + " proposals: " + detail};
}

Outcome split_oracle() {
  Rng rng = make_rng(99);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + uniform_index(rng, 14);
    const std::size_t m = 1 + uniform_index(rng, 3);
    const std::size_t classes = 2 + uniform_index(rng, 2);
    std::vector<double> x;
    std::vector<std::size_t> y;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) x.push_back(static_cast<double>(uniform_index(rng, 6)) / 2.0);
      y.push_back(i < classes ? i : uniform_index(rng, classes));
    }
    const Dataset d(std::move(x), std::move(y), m, classes);
    const std::size_t min_leaf = 1 + uniform_index(rng, 3);
    const std::size_t k = 1 + uniform_index(rng, 20);

    auto brute = oracle::brute_force_splits(d, min_leaf);
    // Gains within 1e-12 of their predecessor form one tie group, ordered by
    // feature then threshold.
    std::sort(brute.begin(), brute.end(), [](const auto& a, const auto& b) { return a.gain > b.gain; });
    std::vector<std::size_t> group(brute.size(), 0);
    for (std::size_t i = 1; i < brute.size(); ++i)
      group[i] = group[i - 1] + (brute[i - 1].gain - brute[i].gain > 1e-12);
    std::vector<std::size_t> order(brute.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::tie(group[a], brute[a].feature, brute[a].threshold) <
             std::tie(group[b], brute[b].feature, brute[b].threshold);
    });
    std::vector<oracle::BruteSplit> ranked;
    for (std::size_t i = 0; i < std::min(order.size(), k); ++i) ranked.push_back(brute[order[i]]);
    brute = std::move(ranked);
    const auto got = top_k_splits(enumerate_splits(d, min_leaf), k);

    bool same = got.size() == brute.size();
    for (std::size_t i = 0; same && i < got.size(); ++i) {
      same = got[i].rule.feature == brute[i].feature && std::abs(got[i].gain - brute[i].gain) < 1e-12;
      for (std::size_t r = 0; same && r < d.size(); ++r)
        same = (d.value(r, got[i].rule.feature) <= got[i].rule.threshold) ==
               (d.value(r, brute[i].feature) <= brute[i].threshold);
    }
    mismatches += !same;
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatching datasets out of 50"};
}

Outcome envelope_invariants() {
  Rng rng = make_rng(1000);
  std::size_t failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t classes = 2 + uniform_index(rng, 4);
    const std::size_t n = 1 + uniform_index(rng, 50);
    std::vector<ClassPosterior> posts;
    std::vector<std::size_t> labels;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> p(classes);
      const double sharpen = uniform01(rng) < 0.5 ? 15.0 : 1.0;
      for (double& v : p) v = std::pow(uniform01(rng) + 1e-12, sharpen);
      const double total = std::accumulate(p.begin(), p.end(), 0.0);
      for (double& v : p) v /= total;
      posts.emplace_back(std::move(p));
      labels.push_back(uniform_index(rng, classes));
    }
    const double lo = p_min(classes) + 1e-6;
    const double p_a = lo + uniform01(rng) * (1.0 - lo);
    const double p_b = p_a + uniform01(rng) * (1.0 - p_a);
    const auto a = envelope_rates(posts, labels, p_a).rates;
    const auto b = envelope_rates(posts, labels, p_b).rates;
    const bool partition = std::abs(a.correct + a.uncertain + a.incorrect - 1.0) < 1e-12;
    const bool monotone = b.uncertain >= a.uncertain && b.correct + b.incorrect <= a.correct + a.incorrect;
    const bool accuracy = a.accuracy >= a.correct;
    failures += !(partition && monotone && accuracy);
  }
  return {failures == 0, std::to_string(failures) + " failures over 1000 random posterior/label sets"};
}

Outcome ensemble_vs_single() {
  const auto& r = randomized_seed7();
  std::size_t wins = 0;
  std::string detail;
  for (const auto& f : r.folds) {
    wins += f.accuracy >= *f.best_single_test_accuracy;
    detail += (detail.empty() ? "" : ", ") + num(f.accuracy, 3) + "/" + num(*f.best_single_test_accuracy, 3);
  }
  return {wins >= 4, "ensemble >= best single on " + std::to_string(wins) + " of " + std::to_string(r.folds.size()) +
                         " folds (ensemble/single: " + detail + ")"};
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "dtenv_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::vector<std::string> reports;
  for (const char* name : {"a.md", "b.md"}) {
    const std::string cmd = std::string("\"") + DTENV_CLI_PATH + "\" run --quiet --config \"" + kSynthConfig.string() +
                            "\" --seed 7 --out \"" + (dir / name).string() + "\"";
    if (std::system(cmd.c_str()) != 0) return {false, "CLI run failed: " + cmd};
    std::ifstream in(dir / name, std::ios::binary);
    reports.emplace_back(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  const bool same = !reports[0].empty() && reports[0] == reports[1];
  return {same, same ? "two runs byte-identical (" + std::to_string(reports[0].size()) + " bytes)"
                     : "reports differ"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "Bayes error oracle", bayes_error},
      {2, "Synthetic accuracy, randomized", randomized_accuracy},
      {3, "Synthetic accuracy, Bayesian desk preset", bayesian_accuracy},
      {4, "Confidently-incorrect comparison", confident_errors},
      {5, "Tree size comparison", tree_sizes},
      {6, "Prior-sampling oracle", prior_sampling},
      {7, "Move-mix check", move_mix},
      {8, "Split oracle equivalence", split_oracle},
      {9, "Envelope invariant suite", envelope_invariants},
      {10, "Ensemble vs best single tree", ensemble_vs_single},
      {11, "Determinism", determinism},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << c.id << ": " << c.name << ": " << o.detail
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
