#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <tuple>

#include "nldt/baseline.hpp"
#include "nldt/datagen.hpp"

using namespace nldt;

namespace {

Dataset random_cart_data(Rng& rng, std::size_t n, std::size_t d) {
  for (;;) {
    Dataset out(d);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> x(d);
      // coarse values so ties between points are common
      for (double& v : x) v = static_cast<double>(rng.index(8)) / 4.0;
      out.add(x, static_cast<int>(rng.index(2)));
    }
    if (out.has_both_classes()) return out;
  }
}

// Every (feature, midpoint) candidate, scored independently.
double brute_min_impurity(const Dataset& d) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < d.dim(); ++f) {
    std::set<double> values;
    for (std::size_t i = 0; i < d.size(); ++i) values.insert(d.at(i, f));
    for (auto it = values.begin(); std::next(it) != values.end(); ++it) {
      const double t = (*it + *std::next(it)) / 2;
      ClassCounts l{0, 0}, r{0, 0};
      for (std::size_t i = 0; i < d.size(); ++i)
        ++(d.at(i, f) <= t ? l : r)[static_cast<std::size_t>(d.label(i))];
      best = std::min(best, net_impurity(l, r));
    }
  }
  return best;
}

}  // namespace

TEST(Cart, SingleMidpointSplit) {
  Dataset d(1);
  d.add(std::vector<double>{1.0}, 0);
  d.add(std::vector<double>{3.0}, 1);
  CartConfig cfg;
  cfg.n_min = 1;
  auto t = fit_cart(d, cfg);
  ASSERT_FALSE(t.root->leaf);
  EXPECT_EQ(t.root->feature, 0u);
  EXPECT_DOUBLE_EQ(t.root->threshold, 2.0);
  EXPECT_EQ(cart_rule_count(t), 1);
  EXPECT_EQ(predict_cart(t, std::vector<double>{2.0}), 0);  // tie goes left
  EXPECT_EQ(predict_cart(t, std::vector<double>{2.0000001}), 1);
}

TEST(Cart, PureDataIsLeaf) {
  Dataset d(2);
  for (int i = 0; i < 20; ++i) d.add(std::vector<double>{double(i), double(-i)}, 1);
  auto t = fit_cart(d);
  EXPECT_TRUE(t.root->leaf);
  EXPECT_EQ(t.root->class_label, 1);
  EXPECT_EQ(cart_rule_count(t), 0);
}

TEST(Cart, SeparableOneDimensionalAtDepthOne) {
  Rng rng(1);
  Dataset d(1);
  for (int i = 0; i < 40; ++i) {
    const double x = rng.uniform();
    d.add(std::vector<double>{x}, x > 0.37 ? 1 : 0);
  }
  CartConfig cfg;
  cfg.max_depth = 1;
  auto t = fit_cart(d, cfg);
  const auto p = predict_cart(t, d);
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(p[i], d.label(i));
}

TEST(Cart, GreedySplitMatchesBruteForce) {
  Rng rng(2);
  for (int trial = 0; trial < 300; ++trial) {
    auto d = random_cart_data(rng, 2 + rng.index(49), 1 + rng.index(3));
    std::vector<std::size_t> idx(d.size());
    std::iota(idx.begin(), idx.end(), 0);
    auto s = best_axis_split(d, idx);
    const double brute = brute_min_impurity(d);
    if (std::isinf(brute)) {
      EXPECT_FALSE(s.found);
      continue;
    }
    ASSERT_TRUE(s.found);
    EXPECT_NEAR(s.impurity, brute, 1e-12);
  }
}

TEST(Cart, PredictionMatchesRuleReplay) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    auto d = random_cart_data(rng, 60, 3);
    CartConfig cfg;
    cfg.n_min = 2;
    cfg.tau_min = 0.0;
    auto t = fit_cart(d, cfg);
    // independent replay: collect root-to-leaf paths as conjunctions
    struct Path {
      std::vector<std::tuple<std::size_t, double, bool>> tests;
      int label;
    };
    std::vector<Path> paths;
    auto walk = [&](auto&& self, const AxisNode* n, Path p) -> void {
      if (n->leaf) {
        p.label = n->class_label;
        paths.push_back(p);
        return;
      }
      Path l = p, r = p;
      l.tests.emplace_back(n->feature, n->threshold, true);
      r.tests.emplace_back(n->feature, n->threshold, false);
      self(self, n->left.get(), l);
      self(self, n->right.get(), r);
    };
    walk(walk, t.root.get(), Path{});
    for (int k = 0; k < 100; ++k) {
      std::vector<double> x{rng.uniform(-0.5, 2.5), rng.uniform(-0.5, 2.5), rng.uniform(-0.5, 2.5)};
      int matches = 0, label = -1;
      for (const auto& p : paths) {
        bool ok = true;
        for (auto [f, thr, le] : p.tests) ok &= (x[f] <= thr) == le;
        if (ok) {
          ++matches;
          label = p.label;
        }
      }
      ASSERT_EQ(matches, 1);
      EXPECT_EQ(predict_cart(t, x), label);
    }
  }
}

TEST(Cart, Ds1NeedsManyAxisRules) {
  auto s = split_train_test(gen_ds(ds_spec(1), 1), 1);
  CartConfig cfg;
  auto t = fit_cart(s.train, cfg);
  EXPECT_GE(cart_rule_count(t), 5);
}

TEST(Cart, DimensionMismatchIsRejected) {
  Dataset d(1);
  d.add(std::vector<double>{1.0}, 0);
  d.add(std::vector<double>{3.0}, 1);
  auto t = fit_cart(d);
  EXPECT_THROW(predict_cart(t, std::vector<double>{1.0, 2.0}), std::invalid_argument);
}
