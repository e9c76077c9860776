#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iterator>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nldt/dataset.hpp"

namespace nldt {

/// Sorted set of admissible exponents. Always contains 0.
class ExponentSet {
 public:
  ExponentSet() : ExponentSet({-3, -2, -1, 0, 1, 2, 3}) {}

  explicit ExponentSet(std::vector<int> values) : values_(std::move(values)) {
    std::sort(values_.begin(), values_.end());
    values_.erase(std::unique(values_.begin(), values_.end()), values_.end());
    if (!std::binary_search(values_.begin(), values_.end(), 0))
      throw std::invalid_argument("exponent set must contain 0");
    if (values_.size() < 2) throw std::invalid_argument("exponent set needs a nonzero member");
  }

  /// Inclusive integer range, e.g. "-3..3".
  static ExponentSet parse(const std::string& text) {
    auto dots = text.find("..");
    if (dots != std::string::npos) {
      int lo = std::stoi(text.substr(0, dots));
      int hi = std::stoi(text.substr(dots + 2));
      if (lo > hi) throw std::invalid_argument("bad exponent range " + text);
      std::vector<int> v;
      for (int e = lo; e <= hi; ++e) v.push_back(e);
      return ExponentSet(std::move(v));
    }
    std::vector<int> v;
    std::size_t start = 0;
    while (start <= text.size()) {
      auto comma = text.find(',', start);
      auto tok = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      if (!tok.empty()) v.push_back(std::stoi(tok));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return ExponentSet(std::move(v));
  }

  std::size_t size() const noexcept { return values_.size(); }
  int operator[](std::size_t k) const { return values_[k]; }
  const std::vector<int>& values() const noexcept { return values_; }

  bool contains(int e) const { return std::binary_search(values_.begin(), values_.end(), e); }

  std::size_t index_of(int e) const {
    auto it = std::lower_bound(values_.begin(), values_.end(), e);
    if (it == values_.end() || *it != e) throw std::invalid_argument("exponent not in set");
    return static_cast<std::size_t>(it - values_.begin());
  }

  std::vector<int> nonzero() const {
    std::vector<int> out;
    std::copy_if(values_.begin(), values_.end(), std::back_inserter(out), [](int e) { return e != 0; });
    return out;
  }

  friend bool operator==(const ExponentSet&, const ExponentSet&) = default;

 private:
  std::vector<int> values_;
};

/// p x d matrix of integer exponents; row i defines the power-law term B_i.
class BlockMatrix {
 public:
  BlockMatrix() = default;
  BlockMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), e_(rows * cols, 0) {}
  BlockMatrix(std::initializer_list<std::initializer_list<int>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    for (const auto& r : rows) {
      if (r.size() != cols_) throw std::invalid_argument("ragged block matrix");
      e_.insert(e_.end(), r.begin(), r.end());
    }
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  int& operator()(std::size_t i, std::size_t j) { return e_[i * cols_ + j]; }
  int operator()(std::size_t i, std::size_t j) const { return e_[i * cols_ + j]; }

  std::span<const int> row(std::size_t i) const { return {e_.data() + i * cols_, cols_}; }
  std::span<int> row(std::size_t i) { return {e_.data() + i * cols_, cols_}; }
  const std::vector<int>& entries() const noexcept { return e_; }

  std::size_t row_nonzeros(std::size_t i) const {
    auto r = row(i);
    return static_cast<std::size_t>(std::count_if(r.begin(), r.end(), [](int e) { return e != 0; }));
  }

  void swap_rows(std::size_t a, std::size_t b) {
    for (std::size_t j = 0; j < cols_; ++j) std::swap((*this)(a, j), (*this)(b, j));
  }

  /// Throws unless every entry is in `exps` and no row exceeds `a_max` nonzeros.
  void validate(const ExponentSet& exps, std::size_t a_max) const {
    for (int e : e_)
      if (!exps.contains(e)) throw std::invalid_argument("exponent " + std::to_string(e) + " not allowed");
    for (std::size_t i = 0; i < rows_; ++i)
      if (row_nonzeros(i) > a_max) throw std::invalid_argument("row exceeds a_max active variables");
  }

  friend bool operator==(const BlockMatrix&, const BlockMatrix&) = default;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<int> e_;
};

/// f(x) = theta1 + sum_i w_i B_i(x)                 when m == 0
/// f(x) = |theta1 + sum_i w_i B_i(x)| - |theta2|    when m == 1
/// Points with f(x) <= 0 go to the left child.
struct SplitRule {
  BlockMatrix b;
  int m = 0;
  std::vector<double> w;
  std::vector<double> theta;

  std::size_t p() const noexcept { return b.rows(); }
  std::size_t dim() const noexcept { return b.cols(); }

  void validate() const {
    if (m != 0 && m != 1) throw std::invalid_argument("modulus flag must be 0 or 1");
    if (w.size() != b.rows()) throw std::invalid_argument("weight count must equal rows of B");
    if (theta.size() != static_cast<std::size_t>(m + 1))
      throw std::invalid_argument("theta must have m+1 entries");
    auto in_range = [](double v) { return std::isfinite(v) && v >= -1.0 && v <= 1.0; };
    if (!std::all_of(w.begin(), w.end(), in_range) || !std::all_of(theta.begin(), theta.end(), in_range))
      throw std::invalid_argument("rule coefficients must lie in [-1, 1]");
  }

  friend bool operator==(const SplitRule&, const SplitRule&) = default;
};

inline double int_pow(double x, int e) {
  double base = e < 0 ? 1.0 / x : x;
  unsigned n = static_cast<unsigned>(std::abs(e));
  double r = 1.0;
  while (n) {
    if (n & 1u) r *= base;
    base *= base;
    n >>= 1;
  }
  return r;
}

/// prod_k x_k^{row_k}. Expects scaled (strictly positive) inputs.
inline double power_law_term(std::span<const double> x, std::span<const int> row) {
  if (x.size() != row.size()) throw std::invalid_argument("power_law_term: dimension mismatch");
  double r = 1.0;
  for (std::size_t k = 0; k < row.size(); ++k)
    if (row[k] != 0) r *= int_pow(x[k], row[k]);
  if (!std::isfinite(r)) throw std::domain_error("power-law term is not finite; was the input scaled?");
  return r;
}

/// (B_1(x), ..., B_p(x)): the point in B-space.
inline std::vector<double> bspace_point(const BlockMatrix& b, std::span<const double> x) {
  std::vector<double> t(b.rows());
  for (std::size_t i = 0; i < b.rows(); ++i) t[i] = power_law_term(x, b.row(i));
  return t;
}

/// Rule value from precomputed B-space coordinates.
inline double evaluate_linear(std::span<const double> w, std::span<const double> theta, int m,
                              std::span<const double> t) {
  double s = theta[0];
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * t[i];
  return m ? std::abs(s) - std::abs(theta[1]) : s;
}

inline double evaluate_rule(const SplitRule& rule, std::span<const double> x) {
  auto t = bspace_point(rule.b, x);
  return evaluate_linear(rule.w, rule.theta, rule.m, t);
}

inline bool goes_left(const SplitRule& rule, std::span<const double> x) { return evaluate_rule(rule, x) <= 0.0; }

/// 1 - sum_k (n_k / N)^2; an empty node scores 0.
inline double gini(const ClassCounts& c) {
  const double n = static_cast<double>(c[0] + c[1]);
  if (n == 0.0) return 0.0;
  const double p0 = static_cast<double>(c[0]) / n, p1 = static_cast<double>(c[1]) / n;
  return 1.0 - (p0 * p0 + p1 * p1);
}

/// Size-weighted Gini of the two children.
inline double net_impurity(const ClassCounts& left, const ClassCounts& right) {
  const double nl = static_cast<double>(left[0] + left[1]);
  const double nr = static_cast<double>(right[0] + right[1]);
  const double n = nl + nr;
  if (n == 0.0) return 0.0;
  return (nl / n) * gini(left) + (nr / n) * gini(right);
}

inline double net_impurity(const Dataset& data, const SplitRule& rule) {
  if (data.empty()) throw std::invalid_argument("net_impurity: empty parent node");
  ClassCounts left{0, 0}, right{0, 0};
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto& side = goes_left(rule, data.row(i)) ? left : right;
    ++side[static_cast<std::size_t>(data.label(i))];
  }
  return net_impurity(left, right);
}

/// Number of nonzero exponents in B.
inline int rule_complexity(const BlockMatrix& b) {
  return static_cast<int>(std::count_if(b.entries().begin(), b.entries().end(), [](int e) { return e != 0; }));
}

/// Number of distinct features with a nonzero exponent in any row.
inline int distinct_variables(const BlockMatrix& b) {
  int n = 0;
  for (std::size_t j = 0; j < b.cols(); ++j) {
    for (std::size_t i = 0; i < b.rows(); ++i) {
      if (b(i, j) != 0) {
        ++n;
        break;
      }
    }
  }
  return n;
}

/// Per-feature affine map of the training range onto [1, 2]. Constant
/// features map to 1.5. Unseen values use the same map, clamped to [0.5, 2.5].
class FeatureScaler {
 public:
  static constexpr double kLow = 1.0, kHigh = 2.0, kClampLow = 0.5, kClampHigh = 2.5;

  FeatureScaler() = default;
  FeatureScaler(std::vector<double> offset, std::vector<double> gain, std::vector<bool> constant)
      : offset_(std::move(offset)), gain_(std::move(gain)), constant_(std::move(constant)) {
    if (offset_.size() != gain_.size() || gain_.size() != constant_.size())
      throw std::invalid_argument("scaler parameter lengths differ");
    for (double g : gain_)
      if (!(g > 0.0) || !std::isfinite(g)) throw std::invalid_argument("scaler gain must be positive");
  }

  static FeatureScaler fit(const Dataset& data) {
    if (data.empty()) throw std::invalid_argument("cannot fit scaler on empty data");
    const std::size_t d = data.dim();
    std::vector<double> lo(d, std::numeric_limits<double>::infinity());
    std::vector<double> hi(d, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < data.size(); ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        lo[j] = std::min(lo[j], data.at(i, j));
        hi[j] = std::max(hi[j], data.at(i, j));
      }
    }
    std::vector<double> gain(d);
    std::vector<bool> constant(d);
    for (std::size_t j = 0; j < d; ++j) {
      constant[j] = !(hi[j] > lo[j]);
      gain[j] = constant[j] ? 1.0 : 1.0 / (hi[j] - lo[j]);
      if (!std::isfinite(gain[j])) throw std::invalid_argument("feature range too small to scale");
    }
    return FeatureScaler(std::move(lo), std::move(gain), std::move(constant));
  }

  std::size_t dim() const noexcept { return offset_.size(); }
  const std::vector<double>& offset() const noexcept { return offset_; }
  const std::vector<double>& gain() const noexcept { return gain_; }
  const std::vector<bool>& constant() const noexcept { return constant_; }

  double apply(std::size_t j, double v) const {
    if (constant_[j]) return 1.5;
    double s = kLow + (v - offset_[j]) * gain_[j];
    return std::clamp(s, kClampLow, kClampHigh);
  }

  double invert(std::size_t j, double s) const {
    if (constant_[j]) return offset_[j];
    return offset_[j] + (s - kLow) / gain_[j];
  }

  std::vector<double> apply(std::span<const double> x) const {
    if (x.size() != dim()) throw std::invalid_argument("scaler: dimension mismatch");
    std::vector<double> out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = apply(j, x[j]);
    return out;
  }

  std::vector<double> invert(std::span<const double> s) const {
    if (s.size() != dim()) throw std::invalid_argument("scaler: dimension mismatch");
    std::vector<double> out(s.size());
    for (std::size_t j = 0; j < s.size(); ++j) out[j] = invert(j, s[j]);
    return out;
  }

  Dataset apply(const Dataset& data) const {
    Dataset out(data.dim(), data.feature_names());
    for (std::size_t i = 0; i < data.size(); ++i) out.add(apply(data.row(i)), data.label(i));
    return out;
  }

  friend bool operator==(const FeatureScaler&, const FeatureScaler&) = default;

 private:
  std::vector<double> offset_;
  std::vector<double> gain_;
  std::vector<bool> constant_;
};

}  // namespace nldt
