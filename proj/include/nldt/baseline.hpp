#pragma once

#include <algorithm>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "nldt/core.hpp"
#include "nldt/dataset.hpp"

namespace nldt {

struct CartConfig {
  int max_depth = 5;
  std::size_t n_min = 10;
  double tau_min = 0.05;
};

/// Axis-parallel tree: x[feature] <= threshold goes left.
struct AxisNode {
  bool leaf = true;
  int class_label = 0;
  ClassCounts counts{0, 0};
  std::size_t feature = 0;
  double threshold = 0.0;
  std::unique_ptr<AxisNode> left, right;
};

struct AxisTree {
  std::unique_ptr<AxisNode> root;
  std::size_t dim = 0;
};

struct AxisSplit {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double impurity = 0.0;
};

/// Exhaustive scan of midpoints between consecutive distinct values of every
/// feature; first minimum wins (lowest feature, then lowest threshold).
inline AxisSplit best_axis_split(const Dataset& data, std::span<const std::size_t> idx) {
  AxisSplit best;
  ClassCounts total{0, 0};
  for (std::size_t i : idx) ++total[static_cast<std::size_t>(data.label(i))];
  std::vector<std::size_t> order(idx.begin(), idx.end());
  for (std::size_t f = 0; f < data.dim(); ++f) {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return data.at(a, f) < data.at(b, f); });
    ClassCounts left{0, 0};
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
      ++left[static_cast<std::size_t>(data.label(order[k]))];
      const double v = data.at(order[k], f), next = data.at(order[k + 1], f);
      if (!(next > v)) continue;
      const ClassCounts right{total[0] - left[0], total[1] - left[1]};
      const double imp = net_impurity(left, right);
      if (!best.found || imp < best.impurity) best = {true, f, v + (next - v) / 2.0, imp};
    }
  }
  return best;
}

namespace detail {

inline std::unique_ptr<AxisNode> grow_axis(const Dataset& data, std::vector<std::size_t> idx, int depth,
                                           const CartConfig& cfg) {
  auto n = std::make_unique<AxisNode>();
  for (std::size_t i : idx) ++n->counts[static_cast<std::size_t>(data.label(i))];
  n->class_label = n->counts[1] > n->counts[0] ? 1 : 0;
  if (depth >= cfg.max_depth || idx.size() < cfg.n_min || gini(n->counts) <= cfg.tau_min) return n;
  const auto split = best_axis_split(data, idx);
  if (!split.found) return n;
  std::vector<std::size_t> li, ri;
  for (std::size_t i : idx) (data.at(i, split.feature) <= split.threshold ? li : ri).push_back(i);
  n->leaf = false;
  n->feature = split.feature;
  n->threshold = split.threshold;
  n->left = grow_axis(data, std::move(li), depth + 1, cfg);
  n->right = grow_axis(data, std::move(ri), depth + 1, cfg);
  return n;
}

}  // namespace detail

/// Greedy Gini CART with the same stopping rules as NLDT induction.
inline AxisTree fit_cart(const Dataset& data, const CartConfig& cfg = {}) {
  if (data.empty()) throw std::invalid_argument("fit_cart: empty dataset");
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  return {detail::grow_axis(data, std::move(idx), 0, cfg), data.dim()};
}

inline int predict_cart(const AxisTree& tree, std::span<const double> x) {
  if (x.size() != tree.dim) throw std::invalid_argument("predict_cart: dimension mismatch");
  const AxisNode* n = tree.root.get();
  while (!n->leaf) n = x[n->feature] <= n->threshold ? n->left.get() : n->right.get();
  return n->class_label;
}

inline std::vector<int> predict_cart(const AxisTree& tree, const Dataset& data) {
  std::vector<int> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) out[i] = predict_cart(tree, data.row(i));
  return out;
}

inline int cart_rule_count(const AxisTree& tree) {
  auto count = [](auto&& self, const AxisNode* n) -> int {
    return n->leaf ? 0 : 1 + self(self, n->left.get()) + self(self, n->right.get());
  };
  return count(count, tree.root.get());
}

}  // namespace nldt
