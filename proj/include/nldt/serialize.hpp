#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "nldt/tree.hpp"

namespace nldt {

inline constexpr const char* kModelFormat = "nldt-model/1";

namespace detail {

using nlohmann::json;

inline std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline json node_to_json(const TreeNode& n) {
  json j;
  j["depth"] = n.depth;
  j["train_counts"] = {n.train_counts[0], n.train_counts[1]};
  if (n.is_leaf()) {
    j["kind"] = "leaf";
    j["class"] = n.class_label;
    return j;
  }
  j["kind"] = "conditional";
  json b = json::array();
  for (std::size_t i = 0; i < n.rule.b.rows(); ++i) {
    auto r = n.rule.b.row(i);
    b.push_back(std::vector<int>(r.begin(), r.end()));
  }
  j["rule"] = {{"m", n.rule.m}, {"b", b}, {"w", n.rule.w}, {"theta", n.rule.theta}};
  j["f_l"] = n.fl;
  j["f_u"] = n.fu;
  j["feasible"] = n.feasible;
  j["left"] = node_to_json(*n.left);
  j["right"] = node_to_json(*n.right);
  return j;
}

inline TreeNode node_from_json(const json& j) {
  TreeNode n;
  n.depth = j.at("depth").get<int>();
  n.train_counts = {j.at("train_counts").at(0).get<std::size_t>(), j.at("train_counts").at(1).get<std::size_t>()};
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "leaf") {
    n.class_label = j.at("class").get<int>();
    return n;
  }
  if (kind != "conditional") throw std::runtime_error("model: unknown node kind '" + kind + "'");
  n.kind = TreeNode::Kind::conditional;
  n.class_label = majority_class(n.train_counts);
  const auto& r = j.at("rule");
  const auto& rows = r.at("b");
  const std::size_t p = rows.size();
  const std::size_t d = p ? rows.at(0).size() : 0;
  n.rule.b = BlockMatrix(p, d);
  for (std::size_t i = 0; i < p; ++i) {
    if (rows.at(i).size() != d) throw std::runtime_error("model: ragged block matrix");
    for (std::size_t k = 0; k < d; ++k) n.rule.b(i, k) = rows.at(i).at(k).get<int>();
  }
  n.rule.m = r.at("m").get<int>();
  n.rule.w = r.at("w").get<std::vector<double>>();
  n.rule.theta = r.at("theta").get<std::vector<double>>();
  n.rule.validate();
  n.fl = j.at("f_l").get<double>();
  n.fu = j.at("f_u").get<int>();
  n.feasible = j.at("feasible").get<bool>();
  n.left = std::make_unique<TreeNode>(node_from_json(j.at("left")));
  n.right = std::make_unique<TreeNode>(node_from_json(j.at("right")));
  return n;
}

}  // namespace detail

inline nlohmann::json model_to_json(const NldtModel& model) {
  using nlohmann::json;
  const auto& u = model.ulga;
  const auto& l = model.llga;
  const auto& c = model.induction;
  json j;
  j["format"] = kModelFormat;
  j["feature_names"] = model.feature_names;
  j["seed"] = model.seed;
  j["dataset_hash"] = detail::hex64(model.dataset_hash);
  j["pruned"] = model.pruned;
  j["config"] = {
      {"induction", {{"max_depth", c.max_depth}, {"n_min", c.n_min}, {"tau_min", c.tau_min}, {"tau_prune", c.tau_prune}}},
      {"ulga",
       {{"pop_size", u.pop_size},
        {"pop_per_dim", u.pop_per_dim},
        {"max_gen", u.max_gen},
        {"crossover_prob", u.crossover_prob},
        {"mutation_prob", u.mutation_prob},
        {"beta", u.beta},
        {"p_zero", u.p_zero},
        {"tau_i", u.tau_i},
        {"p", u.p},
        {"exponents", u.exponents.values()},
        {"a_max", u.a_max},
        {"stall_generations", u.stall_generations}}},
      {"llga",
       {{"pop_size", l.pop_size},
        {"max_gen", l.max_gen},
        {"crossover_prob", l.crossover_prob},
        {"mutation_prob", l.mutation_prob},
        {"eta_c", l.eta_c},
        {"eta_m", l.eta_m},
        {"stagnation_window", l.stagnation_window},
        {"stagnation_rel_tol", l.stagnation_rel_tol}}}};
  std::vector<int> constant(model.scaler.constant().begin(), model.scaler.constant().end());
  j["scaler"] = {{"offset", model.scaler.offset()}, {"gain", model.scaler.gain()}, {"constant", constant}};
  j["tree"] = detail::node_to_json(model.root);
  return j;
}

inline NldtModel model_from_json(const nlohmann::json& j) {
  if (!j.contains("format") || j.at("format") != kModelFormat)
    throw std::runtime_error(std::string("model: expected format tag ") + kModelFormat);
  NldtModel m;
  m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.dataset_hash = std::stoull(j.at("dataset_hash").get<std::string>(), nullptr, 16);
  m.pruned = j.at("pruned").get<bool>();

  const auto& cfg = j.at("config");
  const auto& c = cfg.at("induction");
  m.induction.max_depth = c.at("max_depth").get<int>();
  m.induction.n_min = c.at("n_min").get<std::size_t>();
  m.induction.tau_min = c.at("tau_min").get<double>();
  m.induction.tau_prune = c.at("tau_prune").get<double>();
  const auto& u = cfg.at("ulga");
  m.ulga.pop_size = u.at("pop_size").get<int>();
  m.ulga.pop_per_dim = u.at("pop_per_dim").get<int>();
  m.ulga.max_gen = u.at("max_gen").get<int>();
  m.ulga.crossover_prob = u.at("crossover_prob").get<double>();
  m.ulga.mutation_prob = u.at("mutation_prob").get<double>();
  m.ulga.beta = u.at("beta").get<double>();
  m.ulga.p_zero = u.at("p_zero").get<double>();
  m.ulga.tau_i = u.at("tau_i").get<double>();
  m.ulga.p = u.at("p").get<int>();
  m.ulga.exponents = ExponentSet(u.at("exponents").get<std::vector<int>>());
  m.ulga.a_max = u.at("a_max").get<int>();
  m.ulga.stall_generations = u.at("stall_generations").get<int>();
  const auto& l = cfg.at("llga");
  m.llga.pop_size = l.at("pop_size").get<int>();
  m.llga.max_gen = l.at("max_gen").get<int>();
  m.llga.crossover_prob = l.at("crossover_prob").get<double>();
  m.llga.mutation_prob = l.at("mutation_prob").get<double>();
  m.llga.eta_c = l.at("eta_c").get<double>();
  m.llga.eta_m = l.at("eta_m").get<double>();
  m.llga.stagnation_window = l.at("stagnation_window").get<int>();
  m.llga.stagnation_rel_tol = l.at("stagnation_rel_tol").get<double>();

  const auto& s = j.at("scaler");
  auto constant = s.at("constant").get<std::vector<int>>();
  m.scaler = FeatureScaler(s.at("offset").get<std::vector<double>>(), s.at("gain").get<std::vector<double>>(),
                           std::vector<bool>(constant.begin(), constant.end()));
  if (m.feature_names.size() != m.scaler.dim()) throw std::runtime_error("model: feature name count mismatch");
  m.root = detail::node_from_json(j.at("tree"));
  return m;
}

inline std::string save_model(const NldtModel& model) { return model_to_json(model).dump(2) + "\n"; }

inline void save_model(const NldtModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << save_model(model);
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline NldtModel load_model_text(const std::string& text) { return model_from_json(nlohmann::json::parse(text)); }

inline NldtModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_model_text(ss.str());
}

}  // namespace nldt
