#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "dtenv/csv.hpp"
#include "dtenv/dataset.hpp"
#include "dtenv/mixture.hpp"
#include "oracles.hpp"

using namespace dtenv;

namespace {

std::string pima_like_csv(std::size_t rows) {
  std::ostringstream os;
  os << "preg,plas,pres,skin,insu,mass,pedi,age,class\n";
  for (std::size_t i = 0; i < rows; ++i) {
    for (int j = 0; j < 8; ++j) os << (i * 7 + j) % 13 << '.' << j << ',';
    os << (i % 3 == 0 ? "tested_positive" : "tested_negative") << '\n';
  }
  return os.str();
}

}  // namespace

TEST(Csv, PimaShapedFileLoads) {
  std::istringstream in(pima_like_csv(768));
  const Dataset d = parse_csv(in, std::string("class"));
  EXPECT_EQ(d.size(), 768u);
  EXPECT_EQ(d.num_features(), 8u);
  EXPECT_EQ(d.num_classes(), 2u);
}

TEST(Csv, LabelsEncodedInFirstAppearanceOrder) {
  std::istringstream in("f,label\n1.5,b\n2.5,a\n3.5,b\n");
  const Dataset d = parse_csv(in, std::size_t{1});
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(d.label(0), 0u);
  EXPECT_EQ(d.label(1), 1u);
  EXPECT_EQ(d.label(2), 0u);
  EXPECT_EQ(d.class_names(), (std::vector<std::string>{"b", "a"}));
}

TEST(Csv, TwoRowFile) {
  std::istringstream in("x,y\n0,a\n1,b\n");
  const Dataset d = parse_csv(in, std::string("y"));
  EXPECT_EQ(d.labels(), (std::vector<std::size_t>{0, 1}));
}

TEST(Csv, MissingValueReportsRowAndColumn) {
  std::istringstream in("a,b,c,d,label\n1,2,3,4,x\n1,2,3,?,y\n");
  try {
    parse_csv(in, std::string("label"));
    FAIL() << "expected IngestError";
  } catch (const IngestError& e) {
    EXPECT_EQ(e.row(), 2u);
    EXPECT_EQ(e.column(), 3u);
  }
}

TEST(Csv, SingleClassIsRejected) {
  std::istringstream in("a,label\n1,x\n2,x\n");
  EXPECT_THROW(parse_csv(in, std::string("label")), IngestError);
}

TEST(Csv, RaggedRowIsRejected) {
  std::istringstream in("a,b,label\n1,2,x\n1,y\n");
  EXPECT_THROW(parse_csv(in, std::string("label")), IngestError);
}

TEST(Csv, UnknownLabelColumn) {
  std::istringstream in("a,b\n1,x\n");
  EXPECT_THROW(parse_csv(in, std::string("class")), IngestError);
  std::istringstream in2("a,b\n1,x\n");
  EXPECT_THROW(parse_csv(in2, std::size_t{5}), IngestError);
}

TEST(Csv, WriteThenParsePreservesValues) {
  const Dataset d = sample_mixture(make_paper_mixture(), 50, 3);
  std::stringstream io;
  write_csv(io, d);
  const Dataset back = parse_csv(io, std::string("class"));
  ASSERT_EQ(back.size(), d.size());
  EXPECT_EQ(back.features(), d.features());
  // Dense re-encoding may permute ids; the partition into classes must match.
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = 0; j < d.size(); ++j)
      EXPECT_EQ(d.label(i) == d.label(j), back.label(i) == back.label(j));
}

TEST(Mixture, PaperComponents) {
  const auto spec = make_paper_mixture();
  ASSERT_EQ(spec.components.size(), 5u);
  double total = 0.0, class0 = 0.0;
  for (const auto& k : spec.components) {
    total += k.weight;
    if (k.label == 0) class0 += k.weight;
    EXPECT_DOUBLE_EQ(k.variance, 0.03);
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_NEAR(class0, 0.50, 1e-12);
  EXPECT_EQ(spec.components[3].mean, (std::array<double, 2>{-0.3, 0.7}));
  EXPECT_NO_THROW(spec.validate());
}

TEST(Mixture, SampleShapeAndDeterminism) {
  const auto spec = make_paper_mixture();
  const Dataset a = sample_mixture(spec, 250, 11);
  EXPECT_EQ(a.size(), 250u);
  EXPECT_EQ(a.num_features(), 2u);
  EXPECT_EQ(a.num_classes(), 2u);
  EXPECT_EQ(a, sample_mixture(spec, 250, 11));
  EXPECT_NE(a, sample_mixture(spec, 250, 12));
}

TEST(Mixture, ClassFrequencyAtOneMillion) {
  const Dataset d = sample_mixture(make_paper_mixture(), 1'000'000, 5);
  const auto counts = d.class_counts();
  EXPECT_NEAR(counts[0] / 1e6, 0.50, 0.002);
}

TEST(Mixture, ComponentFrequenciesMatchWeights) {
  // One label per component, so labels count component draws.
  GaussianMixtureSpec spec{{{0.16, {0, 0}, 1, 0}, {0.17, {0, 0}, 1, 1}, {0.17, {0, 0}, 1, 2},
                            {0.25, {0, 0}, 1, 3}, {0.25, {0, 0}, 1, 4}}};
  const Dataset d = sample_mixture(spec, 100'000, 9);
  const auto counts = d.class_counts();
  std::vector<double> obs(counts.begin(), counts.end()), exp;
  for (const auto& k : spec.components) exp.push_back(k.weight * 100'000);
  EXPECT_GT(oracle::chi_square_p(obs, exp), 0.001);
}

TEST(BayesPosterior, ClassZeroCentre) {
  const auto post = bayes_posterior(make_paper_mixture(), {1.0, 1.0});
  EXPECT_GT(post[0], 0.5);
  // Hand evaluation of the five weighted kernels at (1, 1).
  const double s = 0.06;
  const double k0 = 0.16 + 0.17 * std::exp(-(0.09 + 0.49) / s) + 0.17 * std::exp(-(0.49 + 0.49) / s);
  const double k1 = 0.25 * std::exp(-(1.69 + 0.09) / s) + 0.25 * std::exp(-(0.36 + 0.09) / s);
  EXPECT_NEAR(post[0], k0 / (k0 + k1), 1e-12);
}

TEST(BayesPosterior, SymmetricSpecGivesHalf) {
  GaussianMixtureSpec spec{{{0.5, {-1, 0}, 0.2, 0}, {0.5, {1, 0}, 0.2, 1}}};
  const auto post = bayes_posterior(spec, {0.0, 0.3});
  EXPECT_NEAR(post[0], 0.5, 1e-15);
  EXPECT_NEAR(post[1], 0.5, 1e-15);
}

TEST(BayesPosterior, NormalisedEverywhere) {
  const auto spec = make_paper_mixture();
  Rng rng(1);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int i = 0; i < 1000; ++i) {
    const auto post = bayes_posterior(spec, {u(rng), u(rng)});
    EXPECT_NEAR(post[0] + post[1], 1.0, 1e-12);
  }
}

TEST(BayesPosterior, UnderflowFallsBackToPriors) {
  const auto post = bayes_posterior(make_paper_mixture(), {100.0, 100.0});
  EXPECT_NEAR(post[0], 0.5, 1e-12);
  EXPECT_NEAR(post[1], 0.5, 1e-12);
}

TEST(BayesPosterior, InvariantToWeightScaling) {
  auto spec = make_paper_mixture();
  auto scaled = spec;
  for (auto& k : scaled.components) k.weight *= 7.5;
  Rng rng(2);
  std::uniform_real_distribution<double> u(-1, 2);
  for (int i = 0; i < 200; ++i) {
    std::array<double, 2> x{u(rng), u(rng)};
    const auto a = bayes_posterior(spec, x);
    const auto b = bayes_posterior(scaled, x);
    EXPECT_EQ(a.argmax(), b.argmax());
    EXPECT_NEAR(a[0], b[0], 1e-12);
  }
}

TEST(BayesError, QuadratureOracleValue) {
  // Frozen from the quadrature oracle; the printed mixture gives ~7.79%.
  EXPECT_NEAR(oracle::bayes_error_quadrature(make_paper_mixture(), -2.5, 2.5, 1000), 0.07788, 2e-4);
}

TEST(BayesError, MonteCarloMatchesQuadrature) {
  const auto spec = make_paper_mixture();
  const double mc = estimate_bayes_error(spec, 1'000'000, 21);
  const double quad = oracle::bayes_error_quadrature(spec, -2.5, 2.5, 1000);
  // 5 binomial standard errors at n = 1e6.
  EXPECT_NEAR(mc, quad, 5 * std::sqrt(quad * (1 - quad) / 1e6));
}

TEST(BayesError, SeparableAndIndistinguishable) {
  GaussianMixtureSpec sep{{{0.5, {-5, 0}, 1e-6, 0}, {0.5, {5, 0}, 1e-6, 1}}};
  EXPECT_NEAR(estimate_bayes_error(sep, 10'000, 1), 0.0, 1e-12);
  GaussianMixtureSpec same{{{0.5, {0, 0}, 1, 0}, {0.5, {0, 0}, 1, 1}}};
  EXPECT_NEAR(estimate_bayes_error(same, 100'000, 1), 0.5, 0.01);
}

TEST(KFold, FiveFoldsOfFifty) {
  const auto split = kfold_split(250, 5, 3);
  for (std::size_t f = 0; f < 5; ++f) EXPECT_EQ(split.members(f).size(), 50u);
}

TEST(KFold, RemainderDistribution) {
  const auto split = kfold_split(7, 3, 3);
  std::multiset<std::size_t> sizes;
  for (std::size_t f = 0; f < 3; ++f) sizes.insert(split.members(f).size());
  EXPECT_EQ(sizes, (std::multiset<std::size_t>{2, 2, 3}));
}

TEST(KFold, DeterministicAndPartition) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t n = 10 + seed * 7, k = 2 + seed % 6;
    const auto a = kfold_split(n, k, seed);
    EXPECT_EQ(a.fold_assignments, kfold_split(n, k, seed).fold_assignments);
    std::set<std::size_t> seen;
    std::size_t smallest = n, largest = 0;
    for (std::size_t f = 0; f < k; ++f) {
      const auto m = a.members(f);
      smallest = std::min(smallest, m.size());
      largest = std::max(largest, m.size());
      for (auto i : m) EXPECT_TRUE(seen.insert(i).second);
    }
    EXPECT_EQ(seen.size(), n);
    EXPECT_LE(largest - smallest, 1u);
  }
}

TEST(KFold, Preconditions) {
  EXPECT_THROW(kfold_split(3, 5, 1), std::invalid_argument);
  EXPECT_THROW(kfold_split(10, 1, 1), std::invalid_argument);
}

TEST(TrainTestSplit, CountsAndDisjointness) {
  const Dataset d = sample_mixture(make_paper_mixture(), 100, 4);
  const auto tt = train_test_split(d, 60, 40, 8);
  EXPECT_EQ(tt.train.size(), 60u);
  EXPECT_EQ(tt.test.size(), 40u);
  EXPECT_THROW(train_test_split(d, 60, 41, 8), std::invalid_argument);
}
