// nldt: generate data, train and inspect nonlinear decision trees, run benchmarks.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "nldt/nldt.hpp"

using namespace nldt;

namespace {

struct Flags {
  std::uint64_t seed = 1;
  double tau_i = 0.05, tau_prune = 0.03, tau_min = 0.05;
  int max_depth = 5, p = 3, upper_gen = 100, lower_pop = 50, lower_gen = 50;
  std::size_t n_min = 10;
  std::string exponents = "-3..3", upper_pop = "10d";
  unsigned threads = 1;

  void attach(CLI::App* app) {
    app->add_option("--seed", seed, "master seed")->capture_default_str();
    app->add_option("--tau-i", tau_i, "feasibility threshold on net impurity")->capture_default_str();
    app->add_option("--tau-prune", tau_prune, "allowed training-accuracy loss when pruning")->capture_default_str();
    app->add_option("--max-depth", max_depth, "maximum tree depth")->capture_default_str();
    app->add_option("--n-min", n_min, "nodes with fewer points become leaves")->capture_default_str();
    app->add_option("--tau-min", tau_min, "nodes with Gini at or below this become leaves")->capture_default_str();
    app->add_option("--p", p, "power-law terms per rule")->capture_default_str();
    app->add_option("--exponents", exponents, "exponent set, \"lo..hi\" or a comma list")->capture_default_str();
    app->add_option("--upper-pop", upper_pop, "upper population: a count or \"<k>d\"")->capture_default_str();
    app->add_option("--upper-gen", upper_gen, "upper generations")->capture_default_str();
    app->add_option("--lower-pop", lower_pop, "lower population")->capture_default_str();
    app->add_option("--lower-gen", lower_gen, "lower generations")->capture_default_str();
    app->add_option("--threads", threads, "worker threads for lower-level solves (0: all cores)")->capture_default_str();
  }

  BenchConfig config() const {
    BenchConfig c;
    c.induction.max_depth = max_depth;
    c.induction.n_min = n_min;
    c.induction.tau_min = tau_min;
    c.induction.tau_prune = tau_prune;
    c.ulga.tau_i = tau_i;
    c.ulga.p = p;
    c.ulga.exponents = ExponentSet::parse(exponents);
    c.ulga.max_gen = upper_gen;
    c.ulga.threads = threads;
    if (!upper_pop.empty() && upper_pop.back() == 'd') {
      const auto k = upper_pop.substr(0, upper_pop.size() - 1);
      c.ulga.pop_size = 0;
      c.ulga.pop_per_dim = k.empty() ? 1 : std::stoi(k);
    } else {
      c.ulga.pop_size = std::stoi(upper_pop);
    }
    c.llga.pop_size = lower_pop;
    c.llga.max_gen = lower_gen;
    c.cart.max_depth = max_depth;
    c.cart.n_min = n_min;
    c.cart.tau_min = tau_min;
    c.induction.validate();
    c.ulga.validate();
    c.llga.validate();
    return c;
  }
};

void print_report(std::ostream& os, const char* what, const EvalReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s accuracy %.4f  type-1 error %.4f  type-2 error %.4f\n", what, r.accuracy,
                r.type1_error, r.type2_error);
  os << buf;
}

void print_stats(std::ostream& os, const NldtModel& m) {
  const auto s = model_stats(m);
  os << "rules " << s.n_rules << "  F_U/rule " << s.fu_per_rule << "  rule length " << s.rule_length
     << "  variables " << s.n_vars << "  depth " << s.depth << "\n";
}

int cmd_datagen(const std::string& name, std::uint64_t seed, const std::string& out) {
  const auto data = generate(name, seed);
  if (out.empty() || out == "-") {
    write_csv(std::cout, data);
  } else {
    write_csv(out, data);
  }
  const auto c = data.class_counts();
  std::cerr << name << ": " << data.size() << " rows, " << data.dim() << " features, class 0/1 = " << c[0] << "/"
            << c[1] << "\n";
  return 0;
}

int cmd_train(const std::string& path, const Flags& f, bool no_prune, const std::string& out) {
  const auto data = read_csv(path);
  if (!data.has_both_classes()) throw std::runtime_error("training data must contain both classes");
  const auto cfg = f.config();
  auto model = induce(data, cfg.induction, cfg.ulga, cfg.llga, f.seed);
  const double before = training_accuracy(model, data);
  if (!no_prune) model = prune(model, data, cfg.induction);
  std::cout << format_tree(model);
  print_stats(std::cout, model);
  std::cout << "training accuracy " << training_accuracy(model, data);
  if (!no_prune) std::cout << " (unpruned " << before << ")";
  std::cout << "\n";
  if (!out.empty()) save_model(model, out);
  return 0;
}

int cmd_eval(const std::string& model_path, const std::string& data_path) {
  const auto model = load_model(model_path);
  const auto data = read_csv(data_path);
  print_report(std::cout, "NLDT", evaluate(predict(model, data), data.labels()));
  return 0;
}

int cmd_bench(const std::string& suite, const std::string& file, int seeds, const Flags& f, bool no_prune,
              const std::string& csv) {
  auto cfg = f.config();
  cfg.prune = !no_prune;
  std::vector<std::string> names;
  if (suite == "ds-all") names = {"ds1", "ds2", "ds3", "ds4"};
  else if (suite == "file") {
    if (file.empty()) throw std::runtime_error("bench file needs --data");
    names = {file};
  } else {
    generate(suite, 1);  // rejects unknown names before any work starts
    names = {suite};
  }
  std::vector<TableRow> rows;
  for (const auto& name : names) {
    std::optional<Dataset> fixed;
    if (suite == "file") fixed = read_csv(file);
    auto source = [&](std::uint64_t seed) { return fixed ? *fixed : generate(name, seed); };
    auto progress = [&](int s, const RunOutcome& r) {
      std::fprintf(stderr, "%s seed %d: NLDT test %.4f rules %d | CART test %.4f rules %d\n", name.c_str(), s,
                   r.nldt_test.accuracy, static_cast<int>(r.nldt_test.n_rules), r.cart_test.accuracy,
                   static_cast<int>(r.cart_test.n_rules));
    };
    const auto runs = run_seeds(source, seeds, cfg, progress);
    for (auto& row : summarize(name, runs)) rows.push_back(std::move(row));
  }
  write_table_text(std::cout, rows);
  if (!csv.empty()) {
    std::ofstream os(csv);
    if (!os) throw std::runtime_error("cannot write " + csv);
    write_table_csv(os, rows);
  }
  return 0;
}

int cmd_export_bspace(const std::string& model_path, const std::string& data_path, const std::string& out) {
  const auto model = load_model(model_path);
  if (model.root.is_leaf()) throw std::runtime_error("model has no split rule to export");
  const auto data = read_csv(data_path);
  const auto& rule = model.root.rule;
  std::ofstream file;
  if (!out.empty() && out != "-") {
    file.open(out);
    if (!file) throw std::runtime_error("cannot write " + out);
  }
  std::ostream& os = file.is_open() ? static_cast<std::ostream&>(file) : std::cout;
  os.precision(17);
  for (std::size_t r = 0; r < rule.b.rows(); ++r) os << "B" << r + 1 << ",";
  os << "label,f\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto s = model.scaler.apply(data.row(i));
    for (double t : bspace_point(rule.b, s)) os << t << ",";
    os << data.label(i) << "," << evaluate_rule(rule, s) << "\n";
  }
  return 0;
}

int cmd_print_tree(const std::string& model_path) {
  const auto model = load_model(model_path);
  std::cout << format_tree(model);
  print_stats(std::cout, model);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlinear decision trees from bilevel evolutionary search.\n"
               "Labels: 0 is Class-1, 1 is Class-2. CSV files carry a header row and the label in the last column."};
  app.require_subcommand(1);

  std::string name, out, data_path, model_path, suite, file, csv;
  std::uint64_t gen_seed = 1;
  int seeds = 20;
  bool no_prune = false;
  Flags train_flags, bench_flags;

  auto* dg = app.add_subcommand("datagen", "write a generated dataset as CSV");
  dg->add_option("name", name, "ds1..ds4, m-zdt{1,2}-2-{30,500}, m-dtlz{1,2}-3-{30,500}")->required();
  dg->add_option("--seed", gen_seed, "generator seed")->capture_default_str();
  dg->add_option("-o,--out", out, "output path (default: stdout)");

  auto* tr = app.add_subcommand("train", "induce (and prune) a tree from a CSV file");
  tr->add_option("data", data_path, "training CSV")->required()->check(CLI::ExistingFile);
  tr->add_option("-o,--model", out, "write the model here");
  tr->add_flag("--no-prune", no_prune, "skip pruning");
  train_flags.attach(tr);

  auto* ev = app.add_subcommand("eval", "accuracy and type errors of a model on a CSV file");
  ev->add_option("model", model_path, "model file")->required()->check(CLI::ExistingFile);
  ev->add_option("data", data_path, "CSV file")->required()->check(CLI::ExistingFile);

  auto* be = app.add_subcommand("bench", "split 7:3, train NLDT and CART per seed, print mean ± std");
  be->add_option("suite", suite, "ds-all, a generator name, or file")->required();
  be->add_option("--data", file, "CSV for the file suite")->check(CLI::ExistingFile);
  be->add_option("--seeds", seeds, "number of seeds (1..n)")->capture_default_str()->check(CLI::Range(2, 1000));
  be->add_option("--csv", csv, "also write the table as CSV");
  be->add_flag("--no-prune", no_prune, "skip pruning");
  bench_flags.attach(be);

  auto* ex = app.add_subcommand("export-bspace", "root-rule terms, label and f(x) per point as CSV");
  ex->add_option("model", model_path, "model file")->required()->check(CLI::ExistingFile);
  ex->add_option("data", data_path, "CSV file")->required()->check(CLI::ExistingFile);
  ex->add_option("-o,--out", out, "output path (default: stdout)");

  auto* pt = app.add_subcommand("print-tree", "render a saved model");
  pt->add_option("model", model_path, "model file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*dg) return cmd_datagen(name, gen_seed, out);
    if (*tr) return cmd_train(data_path, train_flags, no_prune, out);
    if (*ev) return cmd_eval(model_path, data_path);
    if (*be) return cmd_bench(suite, file, seeds, bench_flags, no_prune, csv);
    if (*ex) return cmd_export_bspace(model_path, data_path, out);
    if (*pt) return cmd_print_tree(model_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
