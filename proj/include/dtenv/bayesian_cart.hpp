#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dtenv/dataset.hpp"
#include "dtenv/parallel.hpp"
#include "dtenv/posterior.hpp"
#include "dtenv/random.hpp"
#include "dtenv/tree.hpp"

// Bayesian classification trees sampled by reversible-jump Metropolis-Hastings.
//
// Target: p(T | D) ∝ p(D | T) p(T), with
//   p(D | T)  Dirichlet-multinomial marginal per leaf (symmetric alpha);
//   p(T)      uniform leaf count on 1..K_max, uniform over the Catalan(K-1)
//             ordered shapes with K leaves, and at each internal node a
//             uniform feature and a uniform threshold among the training
//             values of that feature inside [min, max) of the node's points.
// Trees with an empty leaf are outside the support.
//
// Moves: birth (split a leaf), death (merge two sibling leaves),
// change-variable (new feature and threshold at a node) and change-rule (new
// threshold, same feature). Every proposed threshold comes from the node's
// admissible set, so each move's reverse is always available.

namespace dtenv {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

enum class MoveKind : std::uint8_t { Birth = 0, Death = 1, ChangeVariable = 2, ChangeRule = 3 };
inline constexpr std::size_t kNumMoveKinds = 4;

inline const char* to_string(MoveKind k) {
  switch (k) {
    case MoveKind::Birth: return "birth";
    case MoveKind::Death: return "death";
    case MoveKind::ChangeVariable: return "change_variable";
    case MoveKind::ChangeRule: return "change_rule";
  }
  return "?";
}

struct MoveProbs {
  double birth = 0.1;
  double death = 0.1;
  double change_variable = 0.1;
  double change_rule = 0.7;

  std::array<double, kNumMoveKinds> as_array() const { return {birth, death, change_variable, change_rule}; }
  double of(MoveKind k) const { return as_array()[static_cast<std::size_t>(k)]; }
};

struct McmcConfig {
  std::size_t restarts = 50;
  std::size_t burn_in = 2000;
  std::size_t post_burn_in = 2000;
  MoveProbs move_probs;
  std::size_t max_leaves = 50;
  std::size_t thinning = 1;
  double alpha = 1.0;
  std::uint64_t seed = 0;
  /// Replace the likelihood by a constant, so the chain samples the prior.
  bool constant_likelihood = false;
  unsigned threads = 0;

  std::size_t retained_per_chain() const { return (post_burn_in + thinning - 1) / thinning; }

  void validate() const {
    const auto p = move_probs.as_array();
    double total = 0.0;
    for (double x : p) {
      if (!(x >= 0.0)) throw std::invalid_argument("McmcConfig: move probabilities must be non-negative");
      total += x;
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("McmcConfig: move probabilities must sum to 1");
    if (restarts == 0 || burn_in == 0 || post_burn_in == 0)
      throw std::invalid_argument("McmcConfig: restarts, burn_in and post_burn_in must be at least 1");
    if (max_leaves == 0) throw std::invalid_argument("McmcConfig: max_leaves must be at least 1");
    if (thinning == 0) throw std::invalid_argument("McmcConfig: thinning must be at least 1");
    if (!(alpha > 0.0)) throw std::invalid_argument("McmcConfig: alpha must be positive");
  }
};

/// Per feature, the sorted distinct training values except the largest:
/// the thresholds a split may use.
class ThresholdGrid {
 public:
  struct Range {
    std::size_t first = 0;
    std::size_t count = 0;
  };

  ThresholdGrid() = default;
  explicit ThresholdGrid(const Dataset& data) : values_(data.num_features()) {
    for (std::size_t f = 0; f < data.num_features(); ++f) {
      auto& v = values_[f];
      v.reserve(data.size());
      for (std::size_t i = 0; i < data.size(); ++i) v.push_back(data.value(i, f));
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
      if (!v.empty()) v.pop_back();
    }
  }

  std::size_t num_features() const noexcept { return values_.size(); }
  const std::vector<double>& values(std::size_t f) const { return values_[f]; }

  /// Grid values t with lo <= t < hi.
  Range range(std::size_t f, double lo, double hi) const {
    const auto& v = values_[f];
    const auto a = std::lower_bound(v.begin(), v.end(), lo);
    const auto b = std::lower_bound(a, v.end(), hi);
    return {static_cast<std::size_t>(a - v.begin()), static_cast<std::size_t>(b - a)};
  }

  bool contains(std::size_t f, double t) const { return std::binary_search(values_[f].begin(), values_[f].end(), t); }

 private:
  std::vector<std::vector<double>> values_;
};

/// Dataset plus the precomputed threshold grid shared by every chain.
struct ChainContext {
  const Dataset* data = nullptr;
  ThresholdGrid grid;

  explicit ChainContext(const Dataset& d) : data(&d), grid(d) {}
};

/// Indices of the training points reaching each node.
using NodePoints = std::vector<std::vector<std::uint32_t>>;

/// Routes every point from the root, filling per-node point lists and
/// refreshing the tree's class counts.
inline NodePoints route_points(DecisionTree& tree, const Dataset& data) {
  NodePoints points(tree.num_nodes());
  for (std::size_t i = 0; i < tree.num_nodes(); ++i) std::ranges::fill(tree.mutable_counts(i), 0u);
  for (std::size_t r = 0; r < data.size(); ++r) {
    const auto x = data.row(r);
    const std::size_t y = data.label(r);
    std::size_t i = 0;
    for (;;) {
      points[i].push_back(static_cast<std::uint32_t>(r));
      ++tree.mutable_counts(i)[y];
      const auto& n = tree.node(i);
      if (n.is_leaf()) break;
      i = n.rule.goes_left(x) ? n.left : n.right;
    }
  }
  return points;
}

/// Admissible thresholds for feature f at a node holding `points`.
inline ThresholdGrid::Range admissible_thresholds(const ChainContext& ctx, std::span<const std::uint32_t> points,
                                                  std::size_t f) {
  if (points.empty()) return {};
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (auto r : points) {
    const double v = ctx.data->value(r, f);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return ctx.grid.range(f, lo, hi);
}

inline double log_catalan(std::size_t n) {
  const double x = static_cast<double>(n);
  return std::lgamma(2.0 * x + 1.0) - std::lgamma(x + 2.0) - std::lgamma(x + 1.0);
}

/// Dirichlet-multinomial log marginal of the leaf counts. Empty leaves
/// contribute zero.
inline double log_marginal_likelihood_counts(const DecisionTree& tree, double alpha) {
  const std::size_t classes = tree.num_classes();
  const double c_alpha = alpha * static_cast<double>(classes);
  const double lg_c_alpha = std::lgamma(c_alpha);
  const double lg_alpha = std::lgamma(alpha);
  double total = 0.0;
  for (std::size_t i = 0; i < tree.num_nodes(); ++i) {
    if (!tree.node(i).is_leaf()) continue;
    double n = 0.0;
    double leaf = 0.0;
    for (auto c : tree.counts(i)) {
      n += c;
      leaf += std::lgamma(c + alpha) - lg_alpha;
    }
    if (n == 0.0) continue;
    total += lg_c_alpha - std::lgamma(n + c_alpha) + leaf;
  }
  return total;
}

/// Log marginal likelihood of `data` under the leaves of `tree`.
inline double log_marginal_likelihood(const DecisionTree& tree, const Dataset& data, double alpha = 1.0) {
  if (!(alpha > 0.0)) throw std::invalid_argument("log_marginal_likelihood: alpha must be positive");
  DecisionTree copy = tree;
  copy.refresh_counts(data);
  return log_marginal_likelihood_counts(copy, alpha);
}

/// Log prior of a tree whose points have already been routed.
inline double log_prior_routed(const DecisionTree& tree, const NodePoints& points, const ChainContext& ctx,
                               std::size_t max_leaves) {
  const std::size_t leaves = tree.num_leaves();
  if (leaves > max_leaves) return kNegInf;
  const double log_m = std::log(static_cast<double>(ctx.data->num_features()));
  double lp = -std::log(static_cast<double>(max_leaves)) - log_catalan(leaves - 1);
  for (std::size_t i = 0; i < tree.num_nodes(); ++i) {
    const auto& n = tree.node(i);
    if (n.is_leaf()) {
      if (points[i].empty()) return kNegInf;
      continue;
    }
    if (n.rule.feature >= ctx.grid.num_features() || !ctx.grid.contains(n.rule.feature, n.rule.threshold))
      return kNegInf;
    const auto range = admissible_thresholds(ctx, points[i], n.rule.feature);
    if (range.count == 0) return kNegInf;
    lp -= log_m + std::log(static_cast<double>(range.count));
  }
  return lp;
}

inline double log_prior(const DecisionTree& tree, std::size_t max_leaves, const Dataset& data) {
  const ChainContext ctx(data);
  DecisionTree copy = tree;
  const auto points = route_points(copy, data);
  return log_prior_routed(copy, points, ctx, max_leaves);
}

/// Tree plus everything a Metropolis-Hastings step needs about it.
struct ChainState {
  std::shared_ptr<const DecisionTree> tree;
  NodePoints points;
  double log_likelihood = 0.0;
  double log_prior = 0.0;

  double log_posterior() const { return log_likelihood + log_prior; }
};

inline ChainState make_state(DecisionTree tree, const ChainContext& ctx, const McmcConfig& config) {
  ChainState s;
  s.points = route_points(tree, *ctx.data);
  s.log_prior = log_prior_routed(tree, s.points, ctx, config.max_leaves);
  s.log_likelihood = config.constant_likelihood ? 0.0 : log_marginal_likelihood_counts(tree, config.alpha);
  s.tree = std::make_shared<const DecisionTree>(std::move(tree));
  return s;
}

struct Proposal {
  MoveKind kind = MoveKind::Birth;
  bool feasible = false;
  DecisionTree tree;
  /// log q(reverse) - log q(forward), including the move-kind probabilities.
  double log_proposal_ratio = 0.0;
};

inline MoveKind draw_move_kind(const MoveProbs& probs, Rng& rng) {
  const auto p = probs.as_array();
  double u = uniform01(rng);
  for (std::size_t k = 0; k + 1 < kNumMoveKinds; ++k) {
    if (u < p[k]) return static_cast<MoveKind>(k);
    u -= p[k];
  }
  return MoveKind::ChangeRule;
}

inline Proposal propose_move(const DecisionTree& tree, const NodePoints& points, const ChainContext& ctx,
                             const MoveProbs& probs, Rng& rng) {
  Proposal out;
  out.kind = draw_move_kind(probs, rng);
  const std::size_t m = ctx.data->num_features();
  const double log_m = std::log(static_cast<double>(m));

  switch (out.kind) {
    case MoveKind::Birth: {
      const auto leaves = tree.leaves();
      const std::size_t leaf = leaves[uniform_index(rng, leaves.size())];
      const std::size_t f = uniform_index(rng, m);
      const auto range = admissible_thresholds(ctx, points[leaf], f);
      if (range.count == 0) return out;
      const double t = ctx.grid.values(f)[range.first + uniform_index(rng, range.count)];
      out.tree = tree.split_leaf(leaf, {f, t});
      const double prunable_after = static_cast<double>(out.tree.prunable_nodes().size());
      out.log_proposal_ratio = std::log(probs.death) - std::log(probs.birth) - std::log(prunable_after) +
                               std::log(static_cast<double>(leaves.size())) + log_m +
                               std::log(static_cast<double>(range.count));
      break;
    }
    case MoveKind::Death: {
      const auto prunable = tree.prunable_nodes();
      if (prunable.empty()) return out;
      const std::size_t node = prunable[uniform_index(rng, prunable.size())];
      const auto range = admissible_thresholds(ctx, points[node], tree.node(node).rule.feature);
      if (range.count == 0) return out;
      out.tree = tree.collapse(node);
      const double leaves_after = static_cast<double>(tree.num_leaves() - 1);
      out.log_proposal_ratio = std::log(probs.birth) - std::log(probs.death) +
                               std::log(static_cast<double>(prunable.size())) - std::log(leaves_after) - log_m -
                               std::log(static_cast<double>(range.count));
      break;
    }
    case MoveKind::ChangeVariable: {
      const auto internal = tree.internal_nodes();
      if (internal.empty()) return out;
      const std::size_t node = internal[uniform_index(rng, internal.size())];
      const std::size_t f = uniform_index(rng, m);
      const auto range = admissible_thresholds(ctx, points[node], f);
      const auto old_range = admissible_thresholds(ctx, points[node], tree.node(node).rule.feature);
      if (range.count == 0 || old_range.count == 0) return out;
      const double t = ctx.grid.values(f)[range.first + uniform_index(rng, range.count)];
      out.tree = tree.with_rule(node, {f, t});
      out.log_proposal_ratio =
          std::log(static_cast<double>(range.count)) - std::log(static_cast<double>(old_range.count));
      break;
    }
    case MoveKind::ChangeRule: {
      const auto internal = tree.internal_nodes();
      if (internal.empty()) return out;
      const std::size_t node = internal[uniform_index(rng, internal.size())];
      const std::size_t f = tree.node(node).rule.feature;
      const auto range = admissible_thresholds(ctx, points[node], f);
      if (range.count == 0) return out;
      const double t = ctx.grid.values(f)[range.first + uniform_index(rng, range.count)];
      out.tree = tree.with_rule(node, {f, t});
      out.log_proposal_ratio = 0.0;
      break;
    }
  }
  out.feasible = true;
  return out;
}

/// Seeded convenience form: proposes one move from `tree` on `data`.
inline Proposal propose_move(const DecisionTree& tree, const Dataset& data, const MoveProbs& probs,
                             std::uint64_t seed) {
  const ChainContext ctx(data);
  DecisionTree routed = tree;
  const auto points = route_points(routed, data);
  Rng rng = make_rng(seed);
  Proposal p = propose_move(routed, points, ctx, probs, rng);
  if (p.feasible) p.tree.refresh_counts(data);
  return p;
}

/// Log Metropolis-Hastings acceptance ratio; -inf when the proposal leaves
/// the prior support.
inline double log_acceptance(const ChainState& current, const ChainState& proposed, double log_proposal_ratio) {
  if (proposed.log_prior == kNegInf) return kNegInf;
  return (proposed.log_likelihood - current.log_likelihood) + (proposed.log_prior - current.log_prior) +
         log_proposal_ratio;
}

struct StepResult {
  MoveKind kind = MoveKind::Birth;
  bool feasible = false;
  bool accepted = false;
};

/// One reversible-jump step; infeasible proposals count as rejections.
inline StepResult mh_step(ChainState& state, const ChainContext& ctx, const McmcConfig& config, Rng& rng) {
  Proposal p = propose_move(*state.tree, state.points, ctx, config.move_probs, rng);
  StepResult result{p.kind, p.feasible, false};
  if (!p.feasible) return result;
  ChainState candidate = make_state(std::move(p.tree), ctx, config);
  const double log_a = log_acceptance(state, candidate, p.log_proposal_ratio);
  if (log_a == kNegInf) return result;
  if (log_a >= 0.0 || std::log(uniform01(rng)) < log_a) {
    state = std::move(candidate);
    result.accepted = true;
  }
  return result;
}

struct ChainSample {
  std::shared_ptr<const DecisionTree> tree;  // leaf counts refreshed on the training data
  std::size_t restart_index = 0;
  std::size_t step_index = 0;
  double log_likelihood = 0.0;
  double log_prior = 0.0;
};

struct ChainStats {
  std::array<std::size_t, kNumMoveKinds> proposed{};
  std::array<std::size_t, kNumMoveKinds> feasible{};
  std::array<std::size_t, kNumMoveKinds> accepted{};

  void record(const StepResult& r) {
    const auto k = static_cast<std::size_t>(r.kind);
    ++proposed[k];
    feasible[k] += r.feasible;
    accepted[k] += r.accepted;
  }
  ChainStats& operator+=(const ChainStats& o) {
    for (std::size_t k = 0; k < kNumMoveKinds; ++k) {
      proposed[k] += o.proposed[k];
      feasible[k] += o.feasible[k];
      accepted[k] += o.accepted[k];
    }
    return *this;
  }
  std::size_t total_proposed() const { return proposed[0] + proposed[1] + proposed[2] + proposed[3]; }
  std::size_t total_accepted() const { return accepted[0] + accepted[1] + accepted[2] + accepted[3]; }
};

/// Random starting tree: a birth at the root followed by further random
/// births until a leaf count drawn uniformly from 2..max_leaves is reached
/// or no leaf can be split.
inline DecisionTree random_initial_tree(const ChainContext& ctx, std::size_t max_leaves, Rng& rng) {
  DecisionTree tree = DecisionTree::single_leaf(*ctx.data);
  if (max_leaves < 2) return tree;
  const std::size_t target = 2 + uniform_index(rng, max_leaves - 1);
  const std::size_t m = ctx.data->num_features();
  NodePoints points = route_points(tree, *ctx.data);
  std::size_t failures = 0;
  while (tree.num_leaves() < target && failures < 64 * target) {
    const auto leaves = tree.leaves();
    const std::size_t leaf = leaves[uniform_index(rng, leaves.size())];
    const std::size_t f = uniform_index(rng, m);
    const auto range = admissible_thresholds(ctx, points[leaf], f);
    if (range.count == 0) {
      ++failures;
      continue;
    }
    const double t = ctx.grid.values(f)[range.first + uniform_index(rng, range.count)];
    tree = tree.split_leaf(leaf, {f, t});
    points = route_points(tree, *ctx.data);
  }
  return tree;
}

struct ChainRun {
  std::vector<ChainSample> samples;
  ChainStats stats;
};

/// One chain: burn_in discarded steps, then post_burn_in steps keeping every
/// thinning-th state.
inline ChainRun run_chain(const ChainContext& ctx, const McmcConfig& config, std::size_t restart_index,
                          std::uint64_t seed) {
  config.validate();
  if (ctx.data->empty()) throw std::invalid_argument("run_chain: empty dataset");
  Rng rng = make_rng(seed);
  ChainState state = make_state(random_initial_tree(ctx, config.max_leaves, rng), ctx, config);
  ChainRun run;
  run.samples.reserve(config.retained_per_chain());
  const std::size_t steps = config.burn_in + config.post_burn_in;
  for (std::size_t step = 0; step < steps; ++step) {
    run.stats.record(mh_step(state, ctx, config, rng));
    if (step >= config.burn_in && (step - config.burn_in) % config.thinning == 0)
      run.samples.push_back({state.tree, restart_index, step, state.log_likelihood, state.log_prior});
  }
  return run;
}

inline ChainRun run_chain(const Dataset& data, const McmcConfig& config, std::size_t restart_index,
                          std::uint64_t seed) {
  const ChainContext ctx(data);
  return run_chain(ctx, config, restart_index, seed);
}

struct PosteriorEnsemble {
  std::vector<ChainSample> samples;
  std::size_t num_classes = 0;
  double alpha = 1.0;
  ChainStats stats;

  std::size_t size() const noexcept { return samples.size(); }
};

/// R independent chains (restart r seeded by derive_seed(config.seed, r)),
/// pooled with equal weight in restart order.
inline PosteriorEnsemble run_with_restarts(const Dataset& data, const McmcConfig& config) {
  config.validate();
  if (data.empty()) throw std::invalid_argument("run_with_restarts: empty dataset");
  const ChainContext ctx(data);
  std::vector<ChainRun> runs(config.restarts);
  parallel_for(
      config.restarts, [&](std::size_t r) { runs[r] = run_chain(ctx, config, r, derive_seed(config.seed, r)); },
      config.threads);
  PosteriorEnsemble ens;
  ens.num_classes = data.num_classes();
  ens.alpha = config.alpha;
  ens.samples.reserve(config.restarts * config.retained_per_chain());
  for (auto& run : runs) {
    ens.stats += run.stats;
    std::move(run.samples.begin(), run.samples.end(), std::back_inserter(ens.samples));
  }
  return ens;
}

/// Equal-weight predictive over the pooled samples. Average mode averages the
/// leaf posterior means (n_c + alpha) / (n + C alpha); vote mode counts argmaxes.
inline ClassPosterior bayes_predictive(const PosteriorEnsemble& ens, std::span<const double> x,
                                       PosteriorMode mode = PosteriorMode::Vote) {
  if (ens.samples.empty()) throw std::invalid_argument("bayes_predictive: empty ensemble");
  const std::size_t classes = ens.num_classes;
  std::vector<double> acc(classes, 0.0);
  const DecisionTree* last = nullptr;
  ClassPosterior leaf;
  for (const auto& s : ens.samples) {
    if (s.tree.get() != last) {
      leaf = predict(*s.tree, x, ens.alpha);
      last = s.tree.get();
    }
    if (mode == PosteriorMode::Vote) {
      acc[leaf.argmax()] += 1.0;
    } else {
      for (std::size_t c = 0; c < classes; ++c) acc[c] += leaf[c];
    }
  }
  for (double& v : acc) v /= static_cast<double>(ens.samples.size());
  return ClassPosterior(std::move(acc));
}

struct SizeSummary {
  double mean = 0.0;
  double std = 0.0;
};

/// Mean and sample standard deviation of a list of tree sizes.
inline SizeSummary size_summary(std::span<const double> sizes) {
  if (sizes.empty()) throw std::invalid_argument("size_summary: no sizes");
  double mean = 0.0;
  for (double s : sizes) mean += s;
  mean /= static_cast<double>(sizes.size());
  double ss = 0.0;
  for (double s : sizes) ss += (s - mean) * (s - mean);
  const double var = sizes.size() > 1 ? ss / static_cast<double>(sizes.size() - 1) : 0.0;
  return {mean, std::sqrt(var)};
}

inline SizeSummary ensemble_mean_size(const PosteriorEnsemble& ens) {
  std::vector<double> sizes;
  sizes.reserve(ens.samples.size());
  for (const auto& s : ens.samples) sizes.push_back(static_cast<double>(tree_size(*s.tree)));
  return size_summary(sizes);
}

/// Diagnostic trace, one line per retained sample.
inline void write_trace(std::ostream& out, const PosteriorEnsemble& ens) {
  out << "restart,step,leaves,log_likelihood,log_prior,log_posterior\n";
  for (const auto& s : ens.samples)
    out << s.restart_index << ',' << s.step_index << ',' << tree_size(*s.tree) << ',' << s.log_likelihood << ','
        << s.log_prior << ',' << (s.log_likelihood + s.log_prior) << '\n';
}

}  // namespace dtenv
