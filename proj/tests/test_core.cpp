#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "nldt/core.hpp"
#include "nldt/rng.hpp"

using namespace nldt;

namespace {

Dataset make_1d(const std::vector<std::pair<double, int>>& pts) {
  Dataset d(1);
  for (auto [x, l] : pts) {
    const double row[1] = {x};
    d.add(row, l);
  }
  return d;
}

SplitRule random_rule(Rng& rng, std::size_t d, const ExponentSet& e) {
  SplitRule r;
  r.b = BlockMatrix(3, d);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < d; ++j) r.b(i, j) = e[rng.index(e.size())];
  r.m = static_cast<int>(rng.index(2));
  for (int i = 0; i < 3; ++i) r.w.push_back(rng.uniform(-1, 1));
  for (int i = 0; i <= r.m; ++i) r.theta.push_back(rng.uniform(-1, 1));
  return r;
}

}  // namespace

TEST(PowerLaw, AllOnesInputIsOne) {
  const std::vector<double> x{1, 1, 1};
  const std::vector<int> row{2, 0, -1};
  EXPECT_EQ(power_law_term(x, row), 1.0);
}

TEST(PowerLaw, ZeroRowIsEmptyProduct) {
  const std::vector<double> x{2, 1};
  const std::vector<int> row{0, 0};
  EXPECT_EQ(power_law_term(x, row), 1.0);
}

TEST(PowerLaw, MixedExponents) {
  const std::vector<double> x{2, 1.5};
  const std::vector<int> row{1, -2};
  EXPECT_NEAR(power_law_term(x, row), 2.0 / 2.25, 1e-15);
}

TEST(PowerLaw, SingularInputIsDomainError) {
  const std::vector<double> x{0.0, 1.0};
  const std::vector<int> row{-1, 0};
  EXPECT_THROW(power_law_term(x, row), std::domain_error);
}

TEST(EvaluateRule, LinearReferenceCurveBoundaryGoesLeft) {
  SplitRule r{BlockMatrix{{1, 0}, {0, 1}, {0, 0}}, 0, {2, 1, 0}, {-3}};
  const std::vector<double> x{1, 1};
  EXPECT_EQ(evaluate_rule(r, x), 0.0);
  EXPECT_TRUE(goes_left(r, x));
}

TEST(EvaluateRule, ModulusWithZeroWeights) {
  SplitRule r{BlockMatrix{{1, 0}, {0, 1}, {0, 0}}, 1, {0, 0, 0}, {0, 0.5}};
  for (double a : {1.0, 1.3, 2.0}) {
    const std::vector<double> x{a, 3 - a};
    EXPECT_DOUBLE_EQ(evaluate_rule(r, x), -0.5);
  }
}

TEST(EvaluateRule, QuadraticTermGoesRight) {
  SplitRule r{BlockMatrix{{2, 0}, {0, 1}, {0, 0}}, 0, {1, 1, 0}, {-1}};
  const std::vector<double> x{1.2, 1.1};
  EXPECT_NEAR(evaluate_rule(r, x), 1.54, 1e-12);
  EXPECT_FALSE(goes_left(r, x));
}

TEST(Gini, Examples) {
  EXPECT_DOUBLE_EQ(gini({50, 50}), 0.5);
  EXPECT_DOUBLE_EQ(gini({10, 0}), 0.0);
  EXPECT_DOUBLE_EQ(gini({3, 1}), 0.375);
  EXPECT_DOUBLE_EQ(gini({0, 0}), 0.0);
}

TEST(Gini, SymmetricAndMaximalAtBalance) {
  for (std::size_t a = 0; a <= 40; ++a) {
    for (std::size_t b = 0; b <= 40; ++b) {
      if (a + b == 0) continue;
      EXPECT_EQ(gini({a, b}), gini({b, a}));
      EXPECT_LE(gini({a, b}), gini({(a + b), (a + b)}) + 1e-15);
    }
  }
}

TEST(NetImpurity, PerfectSplitIsZero) {
  auto d = make_1d({{1.1, 0}, {1.2, 0}, {1.8, 1}, {1.9, 1}});
  SplitRule r{BlockMatrix{{1}, {0}, {0}}, 0, {1, 0, 0}, {-1}};
  r.theta = {-0.75};
  r.w = {0.5, 0, 0};
  EXPECT_EQ(net_impurity(d, r), 0.0);
}

TEST(NetImpurity, DegenerateSplitIsParentGini) {
  auto d = make_1d({{1.1, 0}, {1.2, 1}, {1.8, 1}, {1.9, 1}});
  SplitRule r{BlockMatrix{{1}, {0}, {0}}, 0, {0, 0, 0}, {-1}};
  EXPECT_DOUBLE_EQ(net_impurity(d, r), gini({1, 3}));
}

TEST(NetImpurity, WeightedChildren) {
  // parent (5,5); left (3,1); right (2,4)
  auto d = make_1d({{1.2, 0}, {1.2, 0}, {1.2, 0}, {1.2, 1},
                    {1.8, 0}, {1.8, 0}, {1.8, 1}, {1.8, 1}, {1.8, 1}, {1.8, 1}});
  SplitRule r{BlockMatrix{{1}, {0}, {0}}, 0, {0.5, 0, 0}, {-0.75}};
  const double expected = 0.4 * 0.375 + 0.6 * (1.0 - (4.0 / 36 + 16.0 / 36));
  EXPECT_NEAR(net_impurity(d, r), expected, 1e-15);
  EXPECT_NEAR(net_impurity(d, r), 0.41667, 1e-5);
}

TEST(NetImpurity, AlwaysWithinGiniRange) {
  Rng rng(7);
  const ExponentSet e;
  for (int trial = 0; trial < 2000; ++trial) {
    Dataset d(3);
    const std::size_t n = 1 + rng.index(30);
    for (std::size_t i = 0; i < n; ++i) {
      const std::vector<double> x{rng.uniform(1, 2), rng.uniform(1, 2), rng.uniform(1, 2)};
      d.add(x, static_cast<int>(rng.index(2)));
    }
    auto r = random_rule(rng, 3, e);
    const double v = net_impurity(d, r);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 0.5);
  }
}

TEST(RuleComplexity, Examples) {
  EXPECT_EQ(rule_complexity(BlockMatrix(3, 4)), 0);
  EXPECT_EQ(rule_complexity(BlockMatrix{{2, 0, 0}, {0, 0, -1}, {0, 0, 0}}), 2);
  EXPECT_EQ(rule_complexity(BlockMatrix{{1, 2, 3, -1}, {-2, -3, 1, 1}, {2, 2, 2, 2}}), 12);
}

TEST(RuleComplexity, InvariantToRowPermutation) {
  Rng rng(11);
  const ExponentSet e;
  for (int trial = 0; trial < 500; ++trial) {
    auto r = random_rule(rng, 5, e);
    auto b = r.b;
    b.swap_rows(rng.index(3), rng.index(3));
    EXPECT_EQ(rule_complexity(b), rule_complexity(r.b));
  }
}

TEST(EvaluateRule, FiniteOnScaledInputs) {
  Rng rng(3);
  const ExponentSet e;
  for (int trial = 0; trial < 10000; ++trial) {
    auto r = random_rule(rng, 4, e);
    std::vector<double> x(4);
    for (double& v : x) v = rng.uniform(FeatureScaler::kClampLow, FeatureScaler::kClampHigh);
    EXPECT_TRUE(std::isfinite(evaluate_rule(r, x)));
  }
}

TEST(Scaler, EndpointsAndMidpoint) {
  auto d = make_1d({{0, 0}, {5, 1}, {10, 0}});
  auto s = FeatureScaler::fit(d);
  EXPECT_DOUBLE_EQ(s.apply(0, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(s.apply(0, 5.0), 1.5);
  EXPECT_DOUBLE_EQ(s.apply(0, 10.0), 2.0);
}

TEST(Scaler, ConstantColumnMapsToMidpoint) {
  auto d = make_1d({{7, 0}, {7, 1}, {7, 0}});
  auto s = FeatureScaler::fit(d);
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(s.apply(d.row(i))[0], 1.5);
  EXPECT_GT(s.gain()[0], 0.0);
}

TEST(Scaler, OutOfRangeValuesAreClamped) {
  auto d = make_1d({{0, 0}, {10, 1}});
  auto s = FeatureScaler::fit(d);
  EXPECT_EQ(s.apply(0, -100.0), 0.5);
  EXPECT_EQ(s.apply(0, 100.0), 2.5);
  EXPECT_DOUBLE_EQ(s.apply(0, 12.0), 2.2);
}

TEST(Scaler, RoundTripWithinRelativeTolerance) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    Dataset d(3);
    const double lo = rng.uniform(-1e3, 1e3), span = rng.uniform(1e-3, 1e3);
    for (int i = 0; i < 20; ++i) {
      const std::vector<double> x{lo + span * rng.uniform(), rng.uniform(-5, 5), lo};
      d.add(x, i % 2);
    }
    auto s = FeatureScaler::fit(d);
    for (std::size_t i = 0; i < d.size(); ++i) {
      auto back = s.invert(s.apply(d.row(i)));
      for (std::size_t j = 0; j < 3; ++j) {
        const double x = d.at(i, j);
        EXPECT_LE(std::abs(back[j] - x), 1e-12 * std::max(1.0, std::abs(x))) << x;
      }
    }
  }
}

TEST(Scaler, ScaledTrainingDataLiesInUnitBand) {
  Rng rng(9);
  Dataset d(2);
  for (int i = 0; i < 100; ++i) {
    const std::vector<double> x{rng.uniform(-3, 3), rng.uniform(0, 1e-2)};
    d.add(x, i % 2);
  }
  auto scaled = FeatureScaler::fit(d).apply(d);
  for (double v : scaled.values()) {
    EXPECT_GE(v, 1.0);
    EXPECT_LE(v, 2.0);
  }
}

TEST(SplitRule, ValidateChecksShapeAndRange) {
  SplitRule ok{BlockMatrix{{1, 0}, {0, 1}, {0, 0}}, 1, {0.1, -0.2, 0.3}, {0.5, 0.1}};
  EXPECT_NO_THROW(ok.validate());
  auto bad = ok;
  bad.theta = {0.5};
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = ok;
  bad.w[0] = 1.5;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(BlockMatrix, ValidateRejectsForeignExponentAndAmax) {
  const ExponentSet e;
  BlockMatrix b{{4, 0}, {0, 0}, {0, 0}};
  EXPECT_THROW(b.validate(e, 2), std::invalid_argument);
  BlockMatrix c{{1, 1}, {0, 0}, {0, 0}};
  EXPECT_NO_THROW(c.validate(e, 2));
  EXPECT_THROW(c.validate(e, 1), std::invalid_argument);
}

TEST(ExponentSet, ParseRangeAndList) {
  EXPECT_EQ(ExponentSet::parse("-3..3").values(), (std::vector<int>{-3, -2, -1, 0, 1, 2, 3}));
  EXPECT_EQ(ExponentSet::parse("-1,0,2").values(), (std::vector<int>{-1, 0, 2}));
  EXPECT_THROW(ExponentSet::parse("1..3"), std::invalid_argument);
}
