#pragma once

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nldt {

/// Label 0 is Class-1, label 1 is Class-2. type1 is the fraction of Class-1
/// points predicted as Class-2; type2 the reverse. A class absent from the
/// labels has error 0.
struct EvalReport {
  double accuracy = 0.0;
  double type1_error = 0.0;
  double type2_error = 0.0;
  double n_rules = 0.0;
  double fu_per_rule = 0.0;
  double rule_length = 0.0;
};

inline EvalReport evaluate(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) throw std::invalid_argument("evaluate: length mismatch");
  if (labels.empty()) throw std::invalid_argument("evaluate: no items");
  std::size_t correct = 0, n[2] = {0, 0}, wrong[2] = {0, 0};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto c = static_cast<std::size_t>(labels[i]);
    ++n[c];
    if (predictions[i] == labels[i]) ++correct;
    else ++wrong[c];
  }
  EvalReport r;
  r.accuracy = static_cast<double>(correct) / static_cast<double>(labels.size());
  r.type1_error = n[0] ? static_cast<double>(wrong[0]) / static_cast<double>(n[0]) : 0.0;
  r.type2_error = n[1] ? static_cast<double>(wrong[1]) / static_cast<double>(n[1]) : 0.0;
  return r;
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

/// Arithmetic mean and (n - 1) sample standard deviation.
inline MeanStd mean_std(std::span<const double> v) {
  if (v.size() < 2) throw std::invalid_argument("aggregate: need at least 2 values");
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

struct AggregateReport {
  MeanStd accuracy, type1_error, type2_error, n_rules, fu_per_rule, rule_length;
  std::size_t runs = 0;
};

inline AggregateReport aggregate(std::span<const EvalReport> reports) {
  if (reports.size() < 2) throw std::invalid_argument("aggregate: need at least 2 reports");
  auto field = [&](double EvalReport::*f) {
    std::vector<double> v;
    v.reserve(reports.size());
    for (const auto& r : reports) v.push_back(r.*f);
    return mean_std(v);
  };
  return {field(&EvalReport::accuracy),    field(&EvalReport::type1_error), field(&EvalReport::type2_error),
          field(&EvalReport::n_rules),     field(&EvalReport::fu_per_rule), field(&EvalReport::rule_length),
          reports.size()};
}

/// One row of a comparison table: train and test aggregates for a method.
struct TableRow {
  std::string dataset;
  std::string method;
  AggregateReport train;
  AggregateReport test;
};

inline std::string format_pm(const MeanStd& v, double scale, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f ± %.*f", precision, v.mean * scale, precision, v.std * scale);
  return buf;
}

inline void write_table_text(std::ostream& os, std::span<const TableRow> rows) {
  const char* headers[] = {"Dataset", "Method", "Training Accuracy", "Testing Accuracy", "#Rules", "F_U/Rule",
                           "Rule Length"};
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows)
    cells.push_back({r.dataset, r.method, format_pm(r.train.accuracy, 100.0, 2), format_pm(r.test.accuracy, 100.0, 2),
                     format_pm(r.train.n_rules, 1.0, 2), format_pm(r.train.fu_per_rule, 1.0, 2),
                     format_pm(r.train.rule_length, 1.0, 2)});
  // "±" is two bytes but one column wide
  auto width = [](const std::string& s) {
    std::size_t w = 0;
    for (unsigned char c : s) w += (c & 0xC0) != 0x80;
    return w;
  };
  std::vector<std::size_t> w(7);
  for (std::size_t k = 0; k < 7; ++k) {
    w[k] = width(headers[k]);
    for (const auto& row : cells) w[k] = std::max(w[k], width(row[k]));
  }
  auto line = [&](auto get) {
    for (std::size_t k = 0; k < 7; ++k) {
      std::string s = get(k);
      os << s << std::string(w[k] - width(s) + (k + 1 < 7 ? 2 : 0), ' ');
    }
    os << '\n';
  };
  line([&](std::size_t k) { return std::string(headers[k]); });
  std::size_t total = 0;
  for (auto x : w) total += x + 2;
  os << std::string(total - 2, '-') << '\n';
  for (const auto& row : cells) line([&](std::size_t k) { return row[k]; });
}

inline void write_table_csv(std::ostream& os, std::span<const TableRow> rows) {
  os << "dataset,method,runs,train_acc_mean,train_acc_std,test_acc_mean,test_acc_std,test_type1_mean,"
        "test_type2_mean,rules_mean,rules_std,fu_per_rule_mean,fu_per_rule_std,rule_length_mean,rule_length_std\n";
  os << std::setprecision(6);
  for (const auto& r : rows) {
    os << r.dataset << ',' << r.method << ',' << r.test.runs << ',' << r.train.accuracy.mean << ','
       << r.train.accuracy.std << ',' << r.test.accuracy.mean << ',' << r.test.accuracy.std << ','
       << r.test.type1_error.mean << ',' << r.test.type2_error.mean << ',' << r.train.n_rules.mean << ','
       << r.train.n_rules.std << ',' << r.train.fu_per_rule.mean << ',' << r.train.fu_per_rule.std << ','
       << r.train.rule_length.mean << ',' << r.train.rule_length.std << '\n';
  }
}

}  // namespace nldt
