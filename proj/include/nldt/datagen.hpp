#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nldt/dataset.hpp"
#include "nldt/rng.hpp"

namespace nldt {

/// Reference curves for the customised 2-D sets.
enum class Curve { linear, quadratic };  // 2 x1 + x2 - 3 = 0  |  x1^2 + x2 - 1 = 0

struct Cluster {
  int label;
  std::size_t n;
  double delta;  // offset
  double sigma;  // spread
};

struct CurveSpec {
  Curve curve = Curve::linear;
  std::vector<Cluster> clusters;
};

/// x1 ~ U[lo, hi] on the curve, x2 solved from it, then x2 += delta + sigma r
/// with r ~ U[0, 1] drawn per point. Linear: x1 in [0, 1.5]; quadratic:
/// x1 in [-1, 1].
inline Dataset gen_ds(const CurveSpec& spec, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "datagen-curve"));
  Dataset out(2);
  const double lo = spec.curve == Curve::linear ? 0.0 : -1.0;
  const double hi = spec.curve == Curve::linear ? 1.5 : 1.0;
  for (const auto& c : spec.clusters) {
    if (c.n == 0) throw std::invalid_argument("gen_ds: cluster needs at least one point");
    for (std::size_t i = 0; i < c.n; ++i) {
      const double x1 = rng.uniform(lo, hi);
      double x2 = spec.curve == Curve::linear ? 3.0 - 2.0 * x1 : 1.0 - x1 * x1;
      x2 += c.delta + c.sigma * rng.uniform();
      const double row[2] = {x1, x2};
      out.add(row, c.label);
    }
  }
  return out;
}

inline CurveSpec ds_spec(int which) {
  const Cluster near{0, 100, 0.0, 0.01};
  switch (which) {
    case 1: return {Curve::linear, {near, {1, 100, 0.025, 0.2}}};
    case 2: return {Curve::linear, {{0, 10, 0.0, 0.01}, {1, 200, 0.025, 0.2}}};
    case 3: return {Curve::quadratic, {near, {1, 100, 0.025, 0.2}}};
    case 4: return {Curve::linear, {near, {1, 50, 0.025, 0.2}, {1, 50, -0.015, -0.2}}};
    default: throw std::invalid_argument("unknown DS dataset " + std::to_string(which));
  }
}

enum class MoFamily { zdt, dtlz };

struct MoSpec {
  MoFamily family = MoFamily::zdt;
  int variant = 1;              // ZDT1/ZDT2, DTLZ1/DTLZ2: identical Pareto sets
  std::size_t n_vars = 30;
  std::size_t n_obj = 2;        // DTLZ: position variables = n_obj - 1
  double sigma_spread = 0.3;
  double sigma_offset = 0.1;
  std::size_t n_pareto = 1000;
  std::size_t n_non_pareto = 1000;
  std::size_t max_perturbed = 0;  // 0: all g-variables; 500-variable sets use 28
};

/// 0-based index of the first variable entering g.
inline std::size_t first_g_variable(const MoSpec& s) { return s.family == MoFamily::zdt ? 1 : s.n_obj - 1; }

/// Pairs (i, i+1), 0-based, whose 1-based lower index is even and inside the
/// g-variables: on the Pareto set every pair satisfies x_i + x_{i+1} = 1.
inline std::vector<std::array<std::size_t, 2>> g_pairs(const MoSpec& s) {
  std::vector<std::array<std::size_t, 2>> out;
  for (std::size_t i = first_g_variable(s); i + 1 < s.n_vars; ++i)
    if ((i + 1) % 2 == 0) out.push_back({i, i + 1});
  return out;
}

/// g_zdt = 1 + 18/(n-1) sum (x_i + x_{i+1} - 1)^2;  g_dtlz = 100 sum (...)^2.
inline double g_value(const MoSpec& s, std::span<const double> x) {
  double acc = 0.0;
  for (auto [a, b] : g_pairs(s)) acc += (x[a] + x[b] - 1.0) * (x[a] + x[b] - 1.0);
  if (s.family == MoFamily::zdt) return 1.0 + 18.0 / static_cast<double>(s.n_vars - 1) * acc;
  return 100.0 * acc;
}

namespace detail {

inline std::vector<double> pareto_point(const MoSpec& s, Rng& rng) {
  std::vector<double> x(s.n_vars);
  for (double& v : x) v = rng.uniform();
  for (auto [a, b] : g_pairs(s)) x[b] = 1.0 - x[a];
  return x;
}

inline Dataset gen_mo(const MoSpec& s, std::uint64_t seed) {
  if (s.n_vars < 2 || s.n_pareto == 0 || s.n_non_pareto == 0) throw std::invalid_argument("bad MoSpec");
  if (s.family == MoFamily::dtlz && (s.n_obj < 2 || s.n_obj >= s.n_vars)) throw std::invalid_argument("bad n_obj");
  Rng rng(derive_seed(seed, s.family == MoFamily::zdt ? "datagen-mzdt" : "datagen-mdtlz",
                      static_cast<std::uint64_t>(s.variant)));
  Dataset out(s.n_vars);
  for (std::size_t i = 0; i < s.n_pareto; ++i) out.add(pareto_point(s, rng), 0);
  const std::size_t g0 = first_g_variable(s);
  const std::size_t n_g = s.n_vars - g0;
  const std::size_t n_mod = s.max_perturbed ? std::min(s.max_perturbed, n_g) : n_g;
  for (std::size_t i = 0; i < s.n_non_pareto; ++i) {
    auto x = pareto_point(s, rng);
    for (std::size_t k = g0; k < g0 + n_mod; ++k) {
      const double r1 = rng.bernoulli(0.5) ? 1.0 : -1.0;
      const double r2 = rng.uniform();
      x[k] = std::clamp(x[k] + r1 * (s.sigma_offset + r2 * s.sigma_spread), 0.0, 1.0);
    }
    out.add(x, 1);
  }
  return out;
}

}  // namespace detail

/// Label 0: Pareto set, label 1: perturbed (non-Pareto) points.
inline Dataset gen_mzdt(MoSpec spec, std::uint64_t seed) {
  spec.family = MoFamily::zdt;
  return detail::gen_mo(spec, seed);
}

inline Dataset gen_mdtlz(MoSpec spec, std::uint64_t seed) {
  spec.family = MoFamily::dtlz;
  return detail::gen_mo(spec, seed);
}

/// Parameter table for the named multi-objective sets, e.g. "m-zdt1-2-30".
inline MoSpec mo_spec(const std::string& name) {
  MoSpec s;
  unsigned variant = 0, n_obj = 0;
  unsigned long n_vars = 0;
  char family[8] = {};
  if (std::sscanf(name.c_str(), "m-%4[a-z]%u-%u-%lu", family, &variant, &n_obj, &n_vars) != 4)
    throw std::invalid_argument("unknown generator '" + name + "'");
  const std::string fam = family;
  if (fam == "zdt" && (variant == 1 || variant == 2) && n_obj == 2) {
    s.family = MoFamily::zdt;
    s.sigma_spread = 0.3;
    s.sigma_offset = 0.1;
  } else if (fam == "dtlz" && (variant == 1 || variant == 2) && n_obj == 3) {
    s.family = MoFamily::dtlz;
    s.sigma_spread = 0.05;
    s.sigma_offset = 0.0;
  } else {
    throw std::invalid_argument("unknown generator '" + name + "'");
  }
  if (n_vars != 30 && n_vars != 500) throw std::invalid_argument("unknown generator '" + name + "'");
  s.variant = static_cast<int>(variant);
  s.n_obj = n_obj;
  s.n_vars = n_vars;
  s.max_perturbed = n_vars == 500 ? 28 : 0;
  return s;
}

inline const std::vector<std::string>& generator_names() {
  static const std::vector<std::string> names = {
      "ds1",          "ds2",          "ds3",          "ds4",          "m-zdt1-2-30",   "m-zdt2-2-30",
      "m-zdt1-2-500", "m-zdt2-2-500", "m-dtlz1-3-30", "m-dtlz2-3-30", "m-dtlz1-3-500", "m-dtlz2-3-500"};
  return names;
}

inline Dataset generate(const std::string& name, std::uint64_t seed) {
  if (name.size() == 3 && name.starts_with("ds") && name[2] >= '1' && name[2] <= '4')
    return gen_ds(ds_spec(name[2] - '0'), seed);
  const auto& names = generator_names();
  if (std::find(names.begin(), names.end(), name) == names.end())
    throw std::invalid_argument("unknown generator '" + name + "'");
  auto spec = mo_spec(name);
  return spec.family == MoFamily::zdt ? gen_mzdt(spec, seed) : gen_mdtlz(spec, seed);
}

struct TrainTestSplit {
  Dataset train;
  Dataset test;
};

/// Stratified split: per class, round(train_fraction * n) rounded half-up
/// goes to train. Each class needs at least two points.
inline TrainTestSplit split_train_test(const Dataset& data, std::uint64_t seed,
                                       int train_parts = 7, int total_parts = 10) {
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < data.size(); ++i)
    by_class[static_cast<std::size_t>(data.label(i))].push_back(i);
  Rng rng(derive_seed(seed, "split"));
  std::vector<std::size_t> train_idx, test_idx;
  for (auto& idx : by_class) {
    if (idx.size() < 2) throw std::invalid_argument("split: every class needs at least 2 points");
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.index(i)]);
    std::size_t n_train =
        (idx.size() * static_cast<std::size_t>(train_parts) * 2 + static_cast<std::size_t>(total_parts)) /
        (2 * static_cast<std::size_t>(total_parts));
    train_idx.insert(train_idx.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    test_idx.insert(test_idx.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  return {data.subset(train_idx), data.subset(test_idx)};
}

}  // namespace nldt
