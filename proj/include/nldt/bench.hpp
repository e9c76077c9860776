#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nldt/baseline.hpp"
#include "nldt/datagen.hpp"
#include "nldt/metrics.hpp"
#include "nldt/tree.hpp"

namespace nldt {

struct BenchConfig {
  InductionConfig induction;
  UlgaConfig ulga;
  LlgaConfig llga;
  CartConfig cart;
  bool prune = true;
};

struct RunOutcome {
  EvalReport nldt_train, nldt_test, cart_train, cart_test;
  NldtModel model;
  int root_m = -1;  // modulus flag of the root rule, -1 for a single-leaf tree
};

inline EvalReport with_stats(EvalReport r, const ModelStats& s) {
  r.n_rules = s.n_rules;
  r.fu_per_rule = s.fu_per_rule;
  r.rule_length = s.rule_length;
  return r;
}

/// split 7:3 -> NLDT (induce, optionally prune) and CART -> evaluate.
inline RunOutcome run_once(const Dataset& data, std::uint64_t seed, const BenchConfig& cfg) {
  auto [train, test] = split_train_test(data, seed);
  RunOutcome out;
  out.model = induce(train, cfg.induction, cfg.ulga, cfg.llga, derive_seed(seed, "induce"));
  if (cfg.prune) out.model = prune(out.model, train, cfg.induction);
  const auto stats = model_stats(out.model);
  out.nldt_train = with_stats(evaluate(predict(out.model, train), train.labels()), stats);
  out.nldt_test = with_stats(evaluate(predict(out.model, test), test.labels()), stats);
  if (!out.model.root.is_leaf()) out.root_m = out.model.root.rule.m;

  const auto cart = fit_cart(train, cfg.cart);
  ModelStats cs;
  cs.n_rules = cart_rule_count(cart);
  cs.fu_per_rule = cs.n_rules ? 1.0 : 0.0;
  cs.rule_length = cs.n_rules;
  out.cart_train = with_stats(evaluate(predict_cart(cart, train), train.labels()), cs);
  out.cart_test = with_stats(evaluate(predict_cart(cart, test), test.labels()), cs);
  return out;
}

/// `source(seed)` supplies the dataset for each seed (regenerated for
/// synthetic sets, fixed for files). Seeds are 1..n_seeds.
inline std::vector<RunOutcome> run_seeds(const std::function<Dataset(std::uint64_t)>& source, int n_seeds,
                                         const BenchConfig& cfg,
                                         const std::function<void(int, const RunOutcome&)>& progress = {}) {
  std::vector<RunOutcome> out;
  for (int s = 1; s <= n_seeds; ++s) {
    const auto seed = static_cast<std::uint64_t>(s);
    out.push_back(run_once(source(seed), seed, cfg));
    if (progress) progress(s, out.back());
  }
  return out;
}

inline std::vector<TableRow> summarize(const std::string& name, const std::vector<RunOutcome>& runs) {
  std::vector<EvalReport> ntr, nte, ctr, cte;
  for (const auto& r : runs) {
    ntr.push_back(r.nldt_train);
    nte.push_back(r.nldt_test);
    ctr.push_back(r.cart_train);
    cte.push_back(r.cart_test);
  }
  return {{name, "NLDT", aggregate(ntr), aggregate(nte)}, {name, "CART", aggregate(ctr), aggregate(cte)}};
}

}  // namespace nldt
