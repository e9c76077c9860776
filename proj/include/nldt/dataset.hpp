#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nldt/rng.hpp"

namespace nldt {

using ClassCounts = std::array<std::size_t, 2>;

/// Two-class labelled feature matrix, stored row-major.
///
/// Label 0 is "Class-1" and label 1 is "Class-2" in reports (Type-1 error is
/// the misclassified fraction of label 0).
class Dataset {
 public:
  Dataset() = default;

  Dataset(std::size_t n_features, std::vector<std::string> names = {})
      : n_features_(n_features), names_(std::move(names)) {
    if (n_features_ == 0) throw std::invalid_argument("dataset needs at least one feature");
    if (names_.empty()) {
      for (std::size_t j = 0; j < n_features_; ++j) names_.push_back("x" + std::to_string(j + 1));
    }
    if (names_.size() != n_features_)
      throw std::invalid_argument("feature name count does not match dimension");
  }

  void add(std::span<const double> row, int label) {
    if (row.size() != n_features_) throw std::invalid_argument("row has wrong dimension");
    if (label != 0 && label != 1) throw std::invalid_argument("labels must be 0 or 1");
    for (double v : row)
      if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature value");
    values_.insert(values_.end(), row.begin(), row.end());
    labels_.push_back(label);
  }

  std::size_t size() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }
  std::size_t dim() const noexcept { return n_features_; }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * n_features_, n_features_};
  }
  std::span<double> row(std::size_t i) { return {values_.data() + i * n_features_, n_features_}; }
  double at(std::size_t i, std::size_t j) const { return values_[i * n_features_ + j]; }
  int label(std::size_t i) const { return labels_[i]; }

  const std::vector<int>& labels() const noexcept { return labels_; }
  const std::vector<double>& values() const noexcept { return values_; }
  const std::vector<std::string>& feature_names() const noexcept { return names_; }

  ClassCounts class_counts() const {
    ClassCounts c{0, 0};
    for (int l : labels_) ++c[static_cast<std::size_t>(l)];
    return c;
  }

  bool has_both_classes() const {
    auto c = class_counts();
    return c[0] > 0 && c[1] > 0;
  }

  Dataset subset(std::span<const std::size_t> indices) const {
    Dataset out(n_features_, names_);
    out.values_.reserve(indices.size() * n_features_);
    out.labels_.reserve(indices.size());
    for (std::size_t i : indices) {
      auto r = row(i);
      out.values_.insert(out.values_.end(), r.begin(), r.end());
      out.labels_.push_back(labels_[i]);
    }
    return out;
  }

  /// FNV-1a over the raw bytes of features and labels.
  std::uint64_t hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](const void* p, std::size_t n) {
      const auto* b = static_cast<const unsigned char*>(p);
      for (std::size_t i = 0; i < n; ++i) {
        h ^= b[i];
        h *= 0x100000001b3ULL;
      }
    };
    feed(values_.data(), values_.size() * sizeof(double));
    feed(labels_.data(), labels_.size() * sizeof(int));
    return h;
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::size_t n_features_ = 0;
  std::vector<std::string> names_;
  std::vector<double> values_;
  std::vector<int> labels_;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    std::size_t start = cell.find_first_not_of(' ');
    out.push_back(start == std::string::npos ? std::string{} : cell.substr(start));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_double(const std::string& s, std::size_t line_no) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("csv line " + std::to_string(line_no) + ": cannot parse '" + s + "'");
  }
}

}  // namespace detail

/// Headered CSV: d feature columns followed by an integer label column.
inline Dataset read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: empty input");
  auto header = detail::split_csv_line(line);
  if (header.size() < 2) throw std::runtime_error("csv: need at least one feature and a label column");
  std::vector<std::string> names(header.begin(), header.end() - 1);
  Dataset data(names.size(), names);
  std::vector<double> row(names.size());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size())
      throw std::runtime_error("csv line " + std::to_string(line_no) + ": expected " +
                               std::to_string(header.size()) + " columns, got " +
                               std::to_string(cells.size()));
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = detail::parse_double(cells[j], line_no);
    double lab = detail::parse_double(cells.back(), line_no);
    if (lab != 0.0 && lab != 1.0)
      throw std::runtime_error("csv line " + std::to_string(line_no) + ": label must be 0 or 1");
    data.add(row, static_cast<int>(lab));
  }
  if (data.empty()) throw std::runtime_error("csv: no data rows");
  return data;
}

inline Dataset read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_csv(in);
}

/// Values are written with 17 significant digits so ingesting the file
/// reproduces every double exactly.
inline void write_csv(std::ostream& out, const Dataset& data) {
  const auto& names = data.feature_names();
  for (const auto& n : names) out << n << ',';
  out << "label\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.row(i)) out << v << ',';
    out << data.label(i) << '\n';
  }
}

inline void write_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_csv(out, data);
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace nldt
