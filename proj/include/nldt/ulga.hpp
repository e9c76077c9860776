#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "nldt/core.hpp"
#include "nldt/llga.hpp"
#include "nldt/parallel.hpp"
#include "nldt/rng.hpp"

namespace nldt {

struct UlgaConfig {
  int pop_size = 0;             // 0: pop_per_dim * d
  int pop_per_dim = 10;
  int max_gen = 100;
  double crossover_prob = 0.9;
  double mutation_prob = -1.0;  // negative: min(0.33, 1 / d)
  double beta = 3.0;
  double p_zero = 0.75;
  double tau_i = 0.05;
  int p = 3;
  ExponentSet exponents{};
  int a_max = 0;                // 0: d
  int stall_generations = 20;
  unsigned threads = 1;

  std::size_t population(std::size_t d) const {
    return pop_size > 0 ? static_cast<std::size_t>(pop_size) : static_cast<std::size_t>(pop_per_dim) * d;
  }
  double mutation_rate(std::size_t d) const {
    return mutation_prob < 0.0 ? std::min(0.33, 1.0 / static_cast<double>(d)) : mutation_prob;
  }
  std::size_t max_active(std::size_t d) const { return a_max > 0 ? static_cast<std::size_t>(a_max) : d; }

  void validate() const {
    if (!(beta > 1.0)) throw std::invalid_argument("ulga: beta must exceed 1");
    if (!(tau_i > 0.0 && tau_i < 0.5)) throw std::invalid_argument("ulga: tau_I must lie in (0, 0.5)");
    if (p < 1) throw std::invalid_argument("ulga: p must be positive");
    if (pop_size < 0 || (pop_size == 0 && pop_per_dim < 1)) throw std::invalid_argument("ulga: bad population size");
    if (max_gen < 0 || stall_generations < 1) throw std::invalid_argument("ulga: bad generation limits");
    if (p_zero < 0.0 || p_zero > 1.0 || crossover_prob < 0.0 || crossover_prob > 1.0 || mutation_prob > 1.0)
      throw std::invalid_argument("ulga: probabilities must lie in [0, 1]");
  }
};

struct UpperIndividual {
  BlockMatrix b;
  int m = 0;
  std::vector<double> w;      // cached lower-level optimum
  std::vector<double> theta;
  double fl = 0.0;
  double cv = 0.0;            // fl - tau_I
  int fu = 0;
  bool evaluated = false;

  bool feasible() const noexcept { return cv <= 0.0; }
  bool same_genome(const UpperIndividual& o) const { return m == o.m && b == o.b; }
};

/// Hierarchical ranking over evaluated individuals. Infeasible pairs compare
/// on F_L; feasibility beats infeasibility; feasible pairs compare on F_U,
/// then F_L, then m. Exact ties return false both ways.
inline bool rank_better(const UpperIndividual& i, const UpperIndividual& j) {
  const bool fi = i.feasible(), fj = j.feasible();
  if (!fi && !fj) return i.fl < j.fl;
  if (fi != fj) return fi;
  if (i.fu != j.fu) return i.fu < j.fu;
  if (i.fl != j.fl) return i.fl < j.fl;
  return i.m < j.m;
}

/// Zero random surplus entries until every row has at most a_max nonzeros.
inline void enforce_a_max(BlockMatrix& b, std::size_t a_max, Rng& rng) {
  for (std::size_t i = 0; i < b.rows(); ++i) {
    while (b.row_nonzeros(i) > a_max) {
      std::vector<std::size_t> nz;
      for (std::size_t j = 0; j < b.cols(); ++j)
        if (b(i, j) != 0) nz.push_back(j);
      b(i, nz[rng.index(nz.size())]) = 0;
    }
  }
}

/// First min(pop, 2d) members carry one active exponent (each feature once
/// per m value, in shuffled order); the rest carry two.
inline std::vector<UpperIndividual> init_population(std::size_t d, const UlgaConfig& cfg, Rng& rng) {
  if (d == 0) throw std::invalid_argument("init_population: d must be positive");
  const std::size_t pop = cfg.population(d);
  const auto p = static_cast<std::size_t>(cfg.p);
  const auto nz = cfg.exponents.nonzero();
  auto random_nonzero = [&] { return nz[rng.index(nz.size())]; };

  std::vector<std::pair<std::size_t, int>> singles;
  for (std::size_t j = 0; j < d; ++j) {
    singles.emplace_back(j, 0);
    singles.emplace_back(j, 1);
  }
  for (std::size_t i = singles.size(); i > 1; --i) std::swap(singles[i - 1], singles[rng.index(i)]);

  std::vector<UpperIndividual> out;
  out.reserve(pop);
  for (std::size_t k = 0; k < std::min(pop, singles.size()); ++k) {
    UpperIndividual ind;
    ind.b = BlockMatrix(p, d);
    ind.b(0, singles[k].first) = random_nonzero();
    ind.m = singles[k].second;
    out.push_back(std::move(ind));
  }
  const std::size_t cells = p * d;
  const std::size_t a_max = cfg.max_active(d);
  while (out.size() < pop) {
    UpperIndividual ind;
    ind.b = BlockMatrix(p, d);
    std::size_t first = rng.index(cells);
    ind.b(first / d, first % d) = random_nonzero();
    if (cells > 1) {
      for (;;) {
        std::size_t second = rng.index(cells);
        if (second == first) continue;
        if (second / d == first / d && a_max < 2) continue;
        ind.b(second / d, second % d) = random_nonzero();
        break;
      }
    }
    ind.m = static_cast<int>(rng.index(2));
    out.push_back(std::move(ind));
  }
  return out;
}

/// Rows reordered by descending |w_i| of the cached lower-level optimum.
/// Unevaluated individuals keep genome order.
inline BlockMatrix sort_rows(const UpperIndividual& ind) {
  if (ind.w.size() != ind.b.rows()) return ind.b;
  std::vector<std::size_t> order(ind.b.rows());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t c) { return std::abs(ind.w[a]) > std::abs(ind.w[c]); });
  BlockMatrix out(ind.b.rows(), ind.b.cols());
  for (std::size_t r = 0; r < order.size(); ++r)
    for (std::size_t j = 0; j < ind.b.cols(); ++j) out(r, j) = ind.b(order[r], j);
  return out;
}

/// Element-wise uniform exchange between the row-sorted parents.
inline std::pair<UpperIndividual, UpperIndividual> crossover(const UpperIndividual& p1, const UpperIndividual& p2,
                                                             Rng& rng) {
  if (p1.m != p2.m) throw std::invalid_argument("upper crossover: parents must share the modulus flag");
  if (p1.b.rows() != p2.b.rows() || p1.b.cols() != p2.b.cols())
    throw std::invalid_argument("upper crossover: block matrix shapes differ");
  const BlockMatrix s1 = sort_rows(p1), s2 = sort_rows(p2);
  UpperIndividual c1, c2;
  c1.b = s1;
  c2.b = s2;
  c1.m = c2.m = p1.m;
  for (std::size_t i = 0; i < s1.rows(); ++i) {
    for (std::size_t j = 0; j < s1.cols(); ++j) {
      if (rng.uniform() > 0.5) {
        c1.b(i, j) = s2(i, j);
        c2.b(i, j) = s1(i, j);
      }
    }
  }
  return {std::move(c1), std::move(c2)};
}

/// Step on the sorted exponent index: -2, -1, +1, +2 with probabilities
/// alpha, beta*alpha, beta*alpha, alpha where alpha = 1 / (2 (1 + beta)).
/// A step leaving [0, n_e) is replaced by a uniform pick among the in-range
/// targets.
inline std::size_t mutate_exponent_index(std::size_t k, std::size_t n_e, double beta, Rng& rng) {
  static constexpr int kSteps[4] = {-2, -1, 1, 2};
  const double alpha = 1.0 / (2.0 * (1.0 + beta));
  const double r = rng.uniform();
  const double cum[3] = {alpha, alpha + beta * alpha, alpha + 2.0 * beta * alpha};
  int step = r < cum[0] ? kSteps[0] : r < cum[1] ? kSteps[1] : r < cum[2] ? kSteps[2] : kSteps[3];
  auto in_range = [&](int s) {
    const auto t = static_cast<long>(k) + s;
    return t >= 0 && t < static_cast<long>(n_e);
  };
  if (!in_range(step)) {
    std::vector<int> ok;
    for (int s : kSteps)
      if (in_range(s)) ok.push_back(s);
    if (ok.empty()) return k;
    step = ok[rng.index(ok.size())];
  }
  return static_cast<std::size_t>(static_cast<long>(k) + step);
}

inline UpperIndividual mutate(UpperIndividual ind, const UlgaConfig& cfg, Rng& rng) {
  const std::size_t d = ind.b.cols();
  const double rate = cfg.mutation_rate(d);
  const auto& e = cfg.exponents;
  bool changed = false;
  for (std::size_t i = 0; i < ind.b.rows(); ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (!rng.bernoulli(rate)) continue;
      int& entry = ind.b(i, j);
      const int before = entry;
      if (rng.bernoulli(cfg.p_zero)) {
        entry = 0;
      } else {
        entry = e[mutate_exponent_index(e.index_of(entry), e.size(), cfg.beta, rng)];
      }
      changed |= entry != before;
    }
  }
  if (rng.bernoulli(rate)) {
    const int m = static_cast<int>(rng.index(2));
    changed |= m != ind.m;
    ind.m = m;
  }
  enforce_a_max(ind.b, cfg.max_active(d), rng);
  if (changed) ind.evaluated = false;
  return ind;
}

/// Random single-entry reassignment B(i, j) = E(k) until all (B, m) genomes
/// are pairwise distinct, giving up after 100 * size reassignments.
inline void dedup(std::vector<UpperIndividual>& children, const UlgaConfig& cfg, Rng& rng) {
  if (children.empty()) return;
  std::size_t budget = 100 * children.size();
  const auto& e = cfg.exponents;
  for (;;) {
    bool any = false;
    for (std::size_t a = 1; a < children.size(); ++a) {
      for (std::size_t b = 0; b < a; ++b) {
        if (!children[a].same_genome(children[b])) continue;
        any = true;
        if (budget == 0) return;
        --budget;
        auto& ind = children[a];
        ind.b(rng.index(ind.b.rows()), rng.index(ind.b.cols())) = e[rng.index(e.size())];
        enforce_a_max(ind.b, cfg.max_active(ind.b.cols()), rng);
        ind.evaluated = false;
        break;
      }
    }
    if (!any) return;
  }
}

struct UlgaResult {
  SplitRule rule;
  double fl = 0.0;
  int fu = 0;
  bool feasible = false;
  int generations = 0;
  std::vector<UpperIndividual> final_population;
};

namespace detail {

inline void evaluate_upper(std::vector<UpperIndividual>& pop, const Dataset& scaled, const UlgaConfig& cfg,
                           const LlgaConfig& llga, std::uint64_t stream_base) {
  parallel_for(pop.size(), cfg.threads, [&](std::size_t i) {
    auto& ind = pop[i];
    if (ind.evaluated) return;
    Rng rng(derive_seed(stream_base, "llga", i));
    auto res = run_llga(scaled, ind.b, ind.m, llga, rng);
    ind.w = std::move(res.w);
    ind.theta = std::move(res.theta);
    ind.fl = res.fitness;
    ind.cv = res.fitness - cfg.tau_i;
    ind.fu = rule_complexity(ind.b);
    ind.evaluated = true;
  });
}

inline void sort_by_rank(std::vector<UpperIndividual>& pop) {
  std::stable_sort(pop.begin(), pop.end(), rank_better);
}

}  // namespace detail

/// Bilevel search for one split rule on scaled node data. Stops after
/// max_gen generations, or once the best individual is feasible and its
/// (F_U, F_L) has not changed for stall_generations generations. When no
/// individual is feasible the best-ranked one is still returned.
inline UlgaResult run_ulga(const Dataset& scaled, const UlgaConfig& cfg, const LlgaConfig& llga_cfg, Rng& rng) {
  cfg.validate();
  if (!scaled.has_both_classes()) throw std::invalid_argument("run_ulga: node must contain both classes");
  const std::size_t d = scaled.dim();
  const std::uint64_t base = rng.next();

  auto pop = init_population(d, cfg, rng);
  for (auto& ind : pop) enforce_a_max(ind.b, cfg.max_active(d), rng);
  detail::evaluate_upper(pop, scaled, cfg, llga_cfg, derive_seed(base, "generation", 0));
  detail::sort_by_rank(pop);
  const std::size_t mu = pop.size();

  auto tournament = [&]() -> const UpperIndividual& {
    const auto& a = pop[rng.index(mu)];
    const auto& b = pop[rng.index(mu)];
    if (rank_better(a, b)) return a;
    if (rank_better(b, a)) return b;
    return rng.bernoulli(0.5) ? a : b;
  };

  int stall = 0;
  int gen = 0;
  std::optional<std::pair<int, double>> best_key;
  while (gen < cfg.max_gen) {
    ++gen;
    std::vector<UpperIndividual> pool;
    pool.reserve(mu);
    for (std::size_t k = 0; k < mu; ++k) pool.push_back(tournament());

    std::vector<UpperIndividual> children;
    children.reserve(mu);
    for (int m = 0; m <= 1; ++m) {
      std::vector<const UpperIndividual*> cluster;
      for (const auto& ind : pool)
        if (ind.m == m) cluster.push_back(&ind);
      std::size_t k = 0;
      for (; k + 1 < cluster.size(); k += 2) {
        if (rng.bernoulli(cfg.crossover_prob)) {
          auto [c1, c2] = crossover(*cluster[k], *cluster[k + 1], rng);
          children.push_back(std::move(c1));
          children.push_back(std::move(c2));
        } else {
          children.push_back(*cluster[k]);
          children.push_back(*cluster[k + 1]);
        }
      }
      if (k < cluster.size()) children.push_back(*cluster[k]);
    }
    for (auto& c : children) c = mutate(std::move(c), cfg, rng);
    dedup(children, cfg, rng);
    detail::evaluate_upper(children, scaled, cfg, llga_cfg, derive_seed(base, "generation", static_cast<std::uint64_t>(gen)));

    pop.insert(pop.end(), std::make_move_iterator(children.begin()), std::make_move_iterator(children.end()));
    detail::sort_by_rank(pop);
    pop.resize(mu);

    const auto& best = pop.front();
    if (best.feasible()) {
      std::pair<int, double> key{best.fu, best.fl};
      if (best_key && *best_key == key) {
        if (++stall >= cfg.stall_generations) break;
      } else {
        best_key = key;
        stall = 0;
      }
    }
  }

  const auto& best = pop.front();
  UlgaResult res;
  res.rule = SplitRule{best.b, best.m, best.w, best.theta};
  res.fl = best.fl;
  res.fu = best.fu;
  res.feasible = best.feasible();
  res.generations = gen;
  res.final_population = std::move(pop);
  return res;
}

}  // namespace nldt
