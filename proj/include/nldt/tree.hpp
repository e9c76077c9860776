#pragma once

#include <cmath>
#include <cstdio>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nldt/core.hpp"
#include "nldt/llga.hpp"
#include "nldt/rng.hpp"
#include "nldt/ulga.hpp"

namespace nldt {

struct InductionConfig {
  int max_depth = 5;
  std::size_t n_min = 10;
  double tau_min = 0.05;
  double tau_prune = 0.03;

  void validate() const {
    if (max_depth < 0) throw std::invalid_argument("max_depth must be non-negative");
    if (tau_min < 0.0) throw std::invalid_argument("tau_min must be non-negative");
    if (tau_prune < 0.0 || tau_prune >= 1.0) throw std::invalid_argument("tau_prune must lie in [0, 1)");
  }
};

/// Majority label; ties go to class 0.
inline int majority_class(const ClassCounts& c) { return c[1] > c[0] ? 1 : 0; }

struct TreeNode {
  enum class Kind { leaf, conditional };

  Kind kind = Kind::leaf;
  int depth = 0;
  ClassCounts train_counts{0, 0};
  int class_label = 0;

  // conditional nodes only
  SplitRule rule;
  double fl = 0.0;
  int fu = 0;
  bool feasible = false;
  std::unique_ptr<TreeNode> left, right;

  TreeNode() = default;
  TreeNode(TreeNode&&) noexcept = default;
  TreeNode& operator=(TreeNode&&) noexcept = default;
  TreeNode(const TreeNode& o)
      : kind(o.kind), depth(o.depth), train_counts(o.train_counts), class_label(o.class_label), rule(o.rule),
        fl(o.fl), fu(o.fu), feasible(o.feasible),
        left(o.left ? std::make_unique<TreeNode>(*o.left) : nullptr),
        right(o.right ? std::make_unique<TreeNode>(*o.right) : nullptr) {}
  TreeNode& operator=(const TreeNode& o) {
    if (this != &o) *this = TreeNode(o);
    return *this;
  }

  bool is_leaf() const noexcept { return kind == Kind::leaf; }

  static TreeNode leaf(int depth, const ClassCounts& counts) {
    TreeNode n;
    n.depth = depth;
    n.train_counts = counts;
    n.class_label = majority_class(counts);
    return n;
  }

  void collapse() {
    kind = Kind::leaf;
    class_label = majority_class(train_counts);
    rule = SplitRule{};
    fl = 0.0;
    fu = 0;
    feasible = false;
    left.reset();
    right.reset();
  }

  friend bool operator==(const TreeNode& a, const TreeNode& b) {
    if (a.kind != b.kind || a.depth != b.depth || a.train_counts != b.train_counts) return false;
    if (a.is_leaf()) return a.class_label == b.class_label;
    return a.rule == b.rule && a.fl == b.fl && a.fu == b.fu && a.feasible == b.feasible && *a.left == *b.left &&
           *a.right == *b.right;
  }
};

struct NldtModel {
  TreeNode root;
  FeatureScaler scaler;
  std::vector<std::string> feature_names;
  InductionConfig induction;
  UlgaConfig ulga;
  LlgaConfig llga;
  std::uint64_t seed = 0;
  std::uint64_t dataset_hash = 0;
  bool pruned = false;

  std::size_t dim() const noexcept { return scaler.dim(); }

  friend bool operator==(const NldtModel& a, const NldtModel& b) {
    return a.root == b.root && a.scaler == b.scaler && a.feature_names == b.feature_names && a.seed == b.seed &&
           a.dataset_hash == b.dataset_hash && a.pruned == b.pruned;
  }
};

/// Leaf reached by an already-scaled point.
inline const TreeNode& route_scaled(const TreeNode& root, std::span<const double> scaled) {
  const TreeNode* n = &root;
  while (!n->is_leaf()) n = goes_left(n->rule, scaled) ? n->left.get() : n->right.get();
  return *n;
}

inline int predict(const NldtModel& model, std::span<const double> x) {
  if (x.size() != model.dim())
    throw std::invalid_argument("predict: expected " + std::to_string(model.dim()) + " features, got " +
                                std::to_string(x.size()));
  const auto s = model.scaler.apply(x);
  return route_scaled(model.root, s).class_label;
}

inline std::vector<int> predict(const NldtModel& model, const Dataset& data) {
  std::vector<int> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) out[i] = predict(model, data.row(i));
  return out;
}

inline double training_accuracy(const NldtModel& model, const Dataset& data) {
  if (data.empty()) return 0.0;
  std::size_t ok = 0;
  for (std::size_t i = 0; i < data.size(); ++i) ok += predict(model, data.row(i)) == data.label(i);
  return static_cast<double>(ok) / static_cast<double>(data.size());
}

namespace detail {

struct Inducer {
  const Dataset& scaled;
  const InductionConfig& cfg;
  const UlgaConfig& ulga;
  const LlgaConfig& llga;
  std::uint64_t seed;

  bool terminal(const Dataset& node, int depth) const {
    const auto c = node.class_counts();
    return depth >= cfg.max_depth || node.size() < cfg.n_min || gini(c) <= cfg.tau_min || c[0] == 0 || c[1] == 0;
  }

  // Node ids follow heap numbering (root 1, children 2k and 2k+1) so each
  // node's random stream is fixed by its position alone.
  TreeNode grow(const Dataset& node, int depth, std::uint64_t id) const {
    const auto counts = node.class_counts();
    if (terminal(node, depth)) return TreeNode::leaf(depth, counts);

    Rng rng(derive_seed(seed, "node", id));
    auto res = run_ulga(node, ulga, llga, rng);

    std::vector<std::size_t> li, ri;
    for (std::size_t i = 0; i < node.size(); ++i) (goes_left(res.rule, node.row(i)) ? li : ri).push_back(i);
    if (li.empty() || ri.empty()) return TreeNode::leaf(depth, counts);

    TreeNode n;
    n.kind = TreeNode::Kind::conditional;
    n.depth = depth;
    n.train_counts = counts;
    n.class_label = majority_class(counts);
    n.rule = std::move(res.rule);
    n.fl = res.fl;
    n.fu = res.fu;
    n.feasible = res.feasible;
    n.left = std::make_unique<TreeNode>(grow(node.subset(li), depth + 1, 2 * id));
    n.right = std::make_unique<TreeNode>(grow(node.subset(ri), depth + 1, 2 * id + 1));
    return n;
  }
};

}  // namespace detail

/// Recursive induction. The scaler is fitted once on the full training set
/// and every node's rule is expressed in the scaled features.
inline NldtModel induce(const Dataset& data, const InductionConfig& cfg, const UlgaConfig& ulga,
                        const LlgaConfig& llga, std::uint64_t seed) {
  cfg.validate();
  if (data.empty()) throw std::invalid_argument("induce: empty dataset");
  NldtModel model;
  model.scaler = FeatureScaler::fit(data);
  model.feature_names = data.feature_names();
  model.induction = cfg;
  model.ulga = ulga;
  model.llga = llga;
  model.seed = seed;
  model.dataset_hash = data.hash();
  const Dataset scaled = model.scaler.apply(data);
  detail::Inducer ind{scaled, cfg, ulga, llga, seed};
  model.root = ind.grow(scaled, 0, 1);
  return model;
}

namespace detail {

inline void collect_conditional(TreeNode& n, std::vector<TreeNode*>& out) {
  if (n.is_leaf()) return;
  out.push_back(&n);
  collect_conditional(*n.left, out);
  collect_conditional(*n.right, out);
}

}  // namespace detail

/// Greedy bottom-up pruning: repeatedly collapse the deepest non-root
/// conditional node whose removal keeps training accuracy at or above
/// (unpruned accuracy - tau_prune).
inline NldtModel prune(const NldtModel& model, const Dataset& train, const InductionConfig& cfg) {
  NldtModel out = model;
  const double floor = training_accuracy(model, train) - cfg.tau_prune;
  for (;;) {
    std::vector<TreeNode*> nodes;
    detail::collect_conditional(out.root, nodes);
    std::erase(nodes, &out.root);
    std::stable_sort(nodes.begin(), nodes.end(), [](const TreeNode* a, const TreeNode* b) { return a->depth > b->depth; });
    bool collapsed = false;
    for (TreeNode* n : nodes) {
      const int label = n->class_label;
      n->kind = TreeNode::Kind::leaf;
      n->class_label = majority_class(n->train_counts);
      if (training_accuracy(out, train) >= floor - 1e-12) {
        n->collapse();
        collapsed = true;
        break;
      }
      n->kind = TreeNode::Kind::conditional;
      n->class_label = label;
    }
    if (!collapsed) break;
  }
  out.pruned = true;
  return out;
}

struct ModelStats {
  int n_rules = 0;
  double fu_per_rule = 0.0;
  int rule_length = 0;
  int n_vars = 0;  // distinct variables summed over rules
  int depth = 0;
};

inline ModelStats model_stats(const NldtModel& model) {
  ModelStats s;
  auto visit = [&](auto&& self, const TreeNode& n) -> void {
    s.depth = std::max(s.depth, n.depth);
    if (n.is_leaf()) return;
    ++s.n_rules;
    s.rule_length += rule_complexity(n.rule.b);
    s.n_vars += distinct_variables(n.rule.b);
    self(self, *n.left);
    self(self, *n.right);
  };
  visit(visit, model.root);
  if (s.n_rules > 0) s.fu_per_rule = static_cast<double>(s.rule_length) / s.n_rules;
  return s;
}

namespace detail {

inline std::string superscript(int e) {
  static const char* digits[] = {"⁰", "¹", "²", "³", "⁴", "⁵", "⁶", "⁷", "⁸", "⁹"};
  std::string out = e < 0 ? "⁻" : "";
  for (char c : std::to_string(std::abs(e))) out += digits[c - '0'];
  return out;
}

inline std::string format_coef(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace detail

/// Human-readable algebra for one rule, e.g.
/// "|0.3·x2²·x3⁻¹ − 0.7·x1 + 0.12| − 0.05 ≤ 0". Variables are the scaled
/// features; all-zero rows are constants and fold into the bias.
inline std::string format_rule(const SplitRule& rule, const std::vector<std::string>& names = {}) {
  auto name = [&](std::size_t j) { return j < names.size() ? names[j] : "x" + std::to_string(j + 1); };
  double bias = rule.theta.empty() ? 0.0 : rule.theta[0];
  std::vector<std::pair<double, std::string>> terms;
  for (std::size_t i = 0; i < rule.b.rows(); ++i) {
    std::string mono;
    for (std::size_t j = 0; j < rule.b.cols(); ++j) {
      int e = rule.b(i, j);
      if (e == 0) continue;
      if (!mono.empty()) mono += "·";
      mono += name(j);
      if (e != 1) mono += detail::superscript(e);
    }
    if (mono.empty()) bias += rule.w[i];
    else terms.emplace_back(rule.w[i], mono);
  }
  std::string body;
  for (const auto& [w, mono] : terms) {
    if (body.empty()) body = (w < 0 ? "−" : "") + detail::format_coef(std::abs(w)) + "·" + mono;
    else body += (w < 0 ? " − " : " + ") + detail::format_coef(std::abs(w)) + "·" + mono;
  }
  if (body.empty()) body = detail::format_coef(bias);
  else if (bias != 0.0) body += (bias < 0 ? " − " : " + ") + detail::format_coef(std::abs(bias));
  if (rule.m) return "|" + body + "| − " + detail::format_coef(std::abs(rule.theta[1])) + " ≤ 0";
  return body + " ≤ 0";
}

inline std::string format_tree(const NldtModel& model) {
  std::ostringstream os;
  auto visit = [&](auto&& self, const TreeNode& n, const std::string& indent) -> void {
    const auto& c = n.train_counts;
    if (n.is_leaf()) {
      os << "class " << n.class_label << "  [" << c[0] << "/" << c[1] << "]\n";
      return;
    }
    os << "if " << format_rule(n.rule, model.feature_names) << "  [" << c[0] << "/" << c[1]
       << ", F_L=" << detail::format_coef(n.fl) << ", F_U=" << n.fu << (n.feasible ? "" : ", infeasible") << "]\n";
    os << indent << "├─ yes: ";
    self(self, *n.left, indent + "│  ");
    os << indent << "└─ no:  ";
    self(self, *n.right, indent + "   ");
  };
  visit(visit, model.root, "");
  return os.str();
}

}  // namespace nldt
