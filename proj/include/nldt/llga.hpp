#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nldt/core.hpp"
#include "nldt/rng.hpp"

namespace nldt {

struct LlgaConfig {
  int pop_size = 50;
  int max_gen = 50;
  double crossover_prob = 0.9;
  double mutation_prob = -1.0;  // negative: 1 / n_var
  double eta_c = 2.0;
  double eta_m = 15.0;
  int stagnation_window = 10;
  double stagnation_rel_tol = 1e-4;

  double mutation_rate(std::size_t n_var) const {
    return mutation_prob < 0.0 ? 1.0 / static_cast<double>(n_var) : mutation_prob;
  }

  void validate() const {
    if (pop_size < 2 || max_gen < 0 || stagnation_window < 1)
      throw std::invalid_argument("llga: pop_size >= 2, max_gen >= 0, stagnation_window >= 1 required");
    if (crossover_prob < 0.0 || crossover_prob > 1.0 || mutation_prob > 1.0)
      throw std::invalid_argument("llga: probabilities must lie in [0, 1]");
    if (eta_c <= 0.0 || eta_m <= 0.0) throw std::invalid_argument("llga: distribution indices must be positive");
  }
};

/// Genome layout: w_1..w_p, theta_1[, theta_2]. Every gene in [-1, 1].
struct LowerIndividual {
  std::vector<double> genes;
  double fitness = 0.0;
  bool evaluated = false;

  std::span<const double> w(std::size_t p) const { return {genes.data(), p}; }
  std::span<const double> theta(std::size_t p) const { return {genes.data() + p, genes.size() - p}; }
};

inline std::size_t lower_genome_length(std::size_t p, int m) { return p + 1 + static_cast<std::size_t>(m); }

/// Node data projected into B-space: N x p term values plus labels. Built once
/// per (B, data) so every lower-level evaluation is a dot product per point.
///
/// The search itself runs on a per-node normalised copy of the terms: an
/// affine whitening map followed by a fit of each axis to [-1, 1]. Without
/// it, data far from the origin couples the bias to every weight and
/// near-collinear terms (x and x^2 on [1, 2]) hide the useful directions, so
/// the GA stalls on thin class gaps. to_raw() maps a genome back.
class BSpace {
 public:
  BSpace(const Dataset& scaled, const BlockMatrix& b) : n_(scaled.size()), p_(b.rows()) {
    if (scaled.dim() != b.cols()) throw std::invalid_argument("block matrix width differs from data dimension");
    raw_.resize(n_ * p_);
    labels_.reserve(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      auto x = scaled.row(i);
      for (std::size_t r = 0; r < p_; ++r) raw_[i * p_ + r] = power_law_term(x, b.row(r));
      labels_.push_back(scaled.label(i));
      ones_.push_back(labels_.back() == 1);
      ++totals_[static_cast<std::size_t>(labels_.back())];
    }
    for (std::size_t c = 0; c < 2; ++c)
      for (std::size_t i = 0; i < n_; ++i)
        if (labels_[i] == static_cast<int>(c)) members_[c].push_back(i);

    build_normalisation();
  }

  std::size_t size() const noexcept { return n_; }
  std::size_t p() const noexcept { return p_; }
  std::span<const double> point(std::size_t i) const { return {raw_.data() + i * p_, p_}; }
  std::span<const double> normalized_point(std::size_t i) const { return {norm_.data() + i * p_, p_}; }
  int label(std::size_t i) const { return labels_[i]; }
  const ClassCounts& totals() const noexcept { return totals_; }
  const std::vector<std::size_t>& members(int c) const { return members_[static_cast<std::size_t>(c)]; }

  /// Net impurity of a genome acting on normalised terms.
  double impurity(std::span<const double> genes, int m) const {
    // column-major pass so the inner loops vectorise
    thread_local std::vector<double> f;
    f.assign(n_, genes[p_]);
    for (std::size_t r = 0; r < p_; ++r) {
      const double g = genes[r];
      const double* col = cols_.data() + r * n_;
      for (std::size_t i = 0; i < n_; ++i) f[i] += g * col[i];
    }
    const double th2 = m ? std::abs(genes[p_ + 1]) : 0.0;
    std::size_t left = 0, left1 = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double v = m ? std::abs(f[i]) - th2 : f[i];
      const std::size_t in = v <= 0.0;
      left += in;
      left1 += in & ones_[i];
    }
    const ClassCounts l{left - left1, left1};
    return net_impurity(l, ClassCounts{totals_[0] - l[0], totals_[1] - l[1]});
  }

  /// Net impurity of raw coefficients acting on the actual term values.
  double raw_impurity(std::span<const double> genes, int m) const { return impurity_on(raw_, genes, m); }

  /// Raw-space genome with the same sign pattern on every point, rescaled so
  /// every gene lies in [-1, 1].
  std::vector<double> to_raw(std::span<const double> genes) const {
    std::vector<double> g(genes.begin(), genes.end());
    for (std::size_t c = 0; c < p_; ++c) {
      double wc = 0.0;
      for (std::size_t k = 0; k < p_; ++k) wc += genes[k] * map_[k * p_ + c];
      g[c] = wc;
    }
    for (std::size_t k = 0; k < p_; ++k) g[p_] += genes[k] * shift_[k];
    double scale = 1.0;
    for (double v : g) scale = std::max(scale, std::abs(v));
    for (double& v : g) v /= scale;
    return g;
  }

 private:
  double impurity_on(const std::vector<double>& terms, std::span<const double> genes, int m) const {
    ClassCounts left{0, 0};
    const double* t = terms.data();
    const double th1 = genes[p_];
    const double th2 = m ? std::abs(genes[p_ + 1]) : 0.0;
    for (std::size_t i = 0; i < n_; ++i, t += p_) {
      double s = th1;
      for (std::size_t r = 0; r < p_; ++r) s += genes[r] * t[r];
      if (m) s = std::abs(s) - th2;
      if (s <= 0.0) ++left[static_cast<std::size_t>(labels_[i])];
    }
    ClassCounts right{totals_[0] - left[0], totals_[1] - left[1]};
    return net_impurity(left, right);
  }

  // z = map_ * t + shift_: whiten the terms (principal axes with unit
  // variance, degenerate directions dropped) and then fit each axis to [-1, 1].
  void build_normalisation() {
    map_.assign(p_ * p_, 0.0);
    shift_.assign(p_, 0.0);
    norm_.assign(n_ * p_, 0.0);
    if (n_ == 0 || p_ == 0) return;
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> t(
        raw_.data(), static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(p_));
    const Eigen::RowVectorXd mean = t.colwise().mean();
    const Eigen::MatrixXd centred = t.rowwise() - mean;
    const Eigen::MatrixXd cov = centred.transpose() * centred / static_cast<double>(n_);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    const Eigen::VectorXd lambda = eig.eigenvalues();
    const double floor = 1e-12 * std::max(lambda.maxCoeff(), 1e-300);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p_), static_cast<Eigen::Index>(p_));
    for (Eigen::Index k = 0; k < a.rows(); ++k)
      if (lambda(k) > floor) a.row(k) = eig.eigenvectors().col(k).transpose() / std::sqrt(lambda(k));
    const Eigen::MatrixXd z = centred * a.transpose();
    Eigen::VectorXd off = -(a * mean.transpose());
    for (Eigen::Index k = 0; k < a.rows(); ++k) {
      const double lo = z.col(k).minCoeff(), hi = z.col(k).maxCoeff();
      const double half = 0.5 * (hi - lo);
      if (half <= 0.0) {
        a.row(k).setZero();
        off(k) = 0.0;
        continue;
      }
      const double mid = 0.5 * (hi + lo);
      a.row(k) /= half;
      off(k) = (off(k) - mid) / half;
    }
    for (std::size_t k = 0; k < p_; ++k) {
      shift_[k] = off(static_cast<Eigen::Index>(k));
      for (std::size_t c = 0; c < p_; ++c) map_[k * p_ + c] = a(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c));
    }
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t k = 0; k < p_; ++k) {
        double v = shift_[k];
        for (std::size_t c = 0; c < p_; ++c) v += map_[k * p_ + c] * raw_[i * p_ + c];
        norm_[i * p_ + k] = v;
      }
    cols_.resize(n_ * p_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t k = 0; k < p_; ++k) cols_[k * n_ + i] = norm_[i * p_ + k];
  }

  std::size_t n_, p_;
  std::vector<double> raw_, norm_, cols_, map_, shift_;
  std::vector<std::size_t> ones_;
  std::vector<int> labels_;
  ClassCounts totals_{0, 0};
  std::array<std::vector<std::size_t>, 2> members_;
};

/// Hyperplane through the mixed dipole (x_a, x_b): w = x_a - x_b and the
/// plane crosses the segment at fraction delta from x_a towards x_b.
/// The genome encodes f(t) = w.t - theta_h, i.e. theta_1 = -theta_h, so
/// f(x_a) = delta |w|^2 >= 0 and f(x_b) = -(1 - delta) |w|^2 <= 0. The whole
/// genome is divided by max(1, max |gene|) to land in [-1, 1].
inline std::vector<double> dipole_genome(std::span<const double> x_a, std::span<const double> x_b, double delta,
                                         int m) {
  const std::size_t p = x_a.size();
  std::vector<double> g(lower_genome_length(p, m));
  double wa = 0.0, wb = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    g[i] = x_a[i] - x_b[i];
    wa += g[i] * x_a[i];
    wb += g[i] * x_b[i];
  }
  const double theta_h = delta * wb + (1.0 - delta) * wa;
  g[p] = -theta_h;
  if (m) g[p + 1] = std::min(delta, 1.0 - delta);
  double scale = 1.0;
  for (double v : g) scale = std::max(scale, std::abs(v));
  for (double& v : g) v /= scale;
  return g;
}

/// Random mixed dipole in normalised B-space: x_a from label 0, x_b from
/// label 1, delta ~ U[0, 1].
inline LowerIndividual dipole_init(const BSpace& space, int m, Rng& rng) {
  const auto& c0 = space.members(0);
  const auto& c1 = space.members(1);
  if (c0.empty() || c1.empty()) throw std::invalid_argument("dipole_init: node must contain both classes");
  auto a = space.normalized_point(c0[rng.index(c0.size())]);
  auto b = space.normalized_point(c1[rng.index(c1.size())]);
  double delta = rng.uniform();
  return {dipole_genome(a, b, delta, m), 0.0, false};
}

namespace detail {

inline double clip_gene(double v) { return std::clamp(v, -1.0, 1.0); }

/// SBX spread factor for a uniform draw u.
inline double sbx_beta(double u, double eta) {
  return u <= 0.5 ? std::pow(2.0 * u, 1.0 / (eta + 1.0)) : std::pow(1.0 / (2.0 * (1.0 - u)), 1.0 / (eta + 1.0));
}

/// Gene-wise SBX without bound handling. Each gene pair is recombined with
/// probability 0.5; the children's mean always equals the parents' mean.
inline std::pair<std::vector<double>, std::vector<double>> sbx_unclipped(std::span<const double> a,
                                                                          std::span<const double> b,
                                                                          double eta, Rng& rng) {
  std::vector<double> c1(a.begin(), a.end()), c2(b.begin(), b.end());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!rng.bernoulli(0.5) || std::abs(a[i] - b[i]) < 1e-14) continue;
    const double beta = sbx_beta(rng.uniform(), eta);
    c1[i] = 0.5 * ((1.0 + beta) * a[i] + (1.0 - beta) * b[i]);
    c2[i] = 0.5 * ((1.0 - beta) * a[i] + (1.0 + beta) * b[i]);
  }
  return {std::move(c1), std::move(c2)};
}

}  // namespace detail

inline std::pair<LowerIndividual, LowerIndividual> sbx_crossover(const LowerIndividual& a, const LowerIndividual& b,
                                                                 const LlgaConfig& cfg, Rng& rng) {
  if (a.genes.size() != b.genes.size()) throw std::invalid_argument("sbx: genome lengths differ");
  if (!rng.bernoulli(cfg.crossover_prob)) return {a, b};
  auto [g1, g2] = detail::sbx_unclipped(a.genes, b.genes, cfg.eta_c, rng);
  for (double& v : g1) v = detail::clip_gene(v);
  for (double& v : g2) v = detail::clip_gene(v);
  return {LowerIndividual{std::move(g1), 0.0, false}, LowerIndividual{std::move(g2), 0.0, false}};
}

/// Bounded polynomial mutation on [-1, 1].
inline LowerIndividual polynomial_mutation(LowerIndividual ind, const LlgaConfig& cfg, Rng& rng) {
  const double rate = cfg.mutation_rate(ind.genes.size());
  const double lo = -1.0, hi = 1.0, span = hi - lo;
  const double pw = 1.0 / (cfg.eta_m + 1.0);
  bool changed = false;
  for (double& y : ind.genes) {
    if (!rng.bernoulli(rate)) continue;
    const double d1 = (y - lo) / span, d2 = (hi - y) / span;
    const double r = rng.uniform();
    double dq;
    if (r < 0.5) {
      const double val = 2.0 * r + (1.0 - 2.0 * r) * std::pow(1.0 - d1, cfg.eta_m + 1.0);
      dq = std::pow(val, pw) - 1.0;
    } else {
      const double val = 2.0 * (1.0 - r) + 2.0 * (r - 0.5) * std::pow(1.0 - d2, cfg.eta_m + 1.0);
      dq = 1.0 - std::pow(val, pw);
    }
    y = detail::clip_gene(y + dq * span);
    changed = true;
  }
  if (changed) ind.evaluated = false;
  return ind;
}

struct LlgaResult {
  double fitness = 0.0;
  std::vector<double> w;
  std::vector<double> theta;
  int generations = 0;
  std::vector<double> best_history;  // best F_L after each generation, index 0 = initial population
};

/// Minimise net impurity over (w, theta) for a fixed structure. `space` must
/// hold both classes. The reported fitness is recomputed on the returned raw
/// coefficients, so it always agrees with net_impurity of the final rule.
inline LlgaResult run_llga(const BSpace& space, int m, const LlgaConfig& cfg, Rng& rng) {
  cfg.validate();
  if (space.totals()[0] == 0 || space.totals()[1] == 0)
    throw std::invalid_argument("run_llga: node is pure, nothing to split");
  const std::size_t p = space.p();
  const auto mu = static_cast<std::size_t>(cfg.pop_size);

  auto evaluate = [&](LowerIndividual& ind) {
    ind.fitness = space.impurity(ind.genes, m);
    ind.evaluated = true;
  };
  auto by_fitness = [](const LowerIndividual& a, const LowerIndividual& b) { return a.fitness < b.fitness; };

  std::vector<LowerIndividual> pop;
  pop.reserve(2 * mu);
  for (std::size_t i = 0; i < mu; ++i) {
    pop.push_back(dipole_init(space, m, rng));
    evaluate(pop.back());
  }
  std::stable_sort(pop.begin(), pop.end(), by_fitness);

  LlgaResult res;
  res.best_history.push_back(pop.front().fitness);

  auto tournament = [&]() -> const LowerIndividual& {
    const auto& a = pop[rng.index(mu)];
    const auto& b = pop[rng.index(mu)];
    if (a.fitness < b.fitness) return a;
    if (b.fitness < a.fitness) return b;
    return rng.bernoulli(0.5) ? a : b;
  };

  int gen = 0;
  while (gen < cfg.max_gen && pop.front().fitness > 0.0) {
    ++gen;
    std::vector<LowerIndividual> offspring;
    offspring.reserve(mu + 1);
    while (offspring.size() < mu) {
      const LowerIndividual& pa = tournament();
      const LowerIndividual& pb = tournament();
      auto [c1, c2] = sbx_crossover(pa, pb, cfg, rng);
      offspring.push_back(polynomial_mutation(std::move(c1), cfg, rng));
      if (offspring.size() < mu) offspring.push_back(polynomial_mutation(std::move(c2), cfg, rng));
    }
    for (auto& c : offspring) evaluate(c);
    pop.insert(pop.end(), std::make_move_iterator(offspring.begin()), std::make_move_iterator(offspring.end()));
    std::stable_sort(pop.begin(), pop.end(), by_fitness);
    pop.resize(mu);
    res.best_history.push_back(pop.front().fitness);

    const auto window = static_cast<std::size_t>(cfg.stagnation_window);
    const std::size_t g = res.best_history.size() - 1;
    if (g >= window) {
      const double before = res.best_history[g - window];
      const double rel = (before - pop.front().fitness) / std::max(before, 1e-12);
      if (rel < cfg.stagnation_rel_tol) break;
    }
  }

  const auto raw = space.to_raw(pop.front().genes);
  res.fitness = space.raw_impurity(raw, m);
  res.w.assign(raw.begin(), raw.begin() + static_cast<std::ptrdiff_t>(p));
  res.theta.assign(raw.begin() + static_cast<std::ptrdiff_t>(p), raw.end());
  res.generations = gen;
  return res;
}

inline LlgaResult run_llga(const Dataset& scaled, const BlockMatrix& b, int m, const LlgaConfig& cfg, Rng& rng) {
  return run_llga(BSpace(scaled, b), m, cfg, rng);
}

}  // namespace nldt
