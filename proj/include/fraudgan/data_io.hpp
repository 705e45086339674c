/*
 * Copyright 2026 The fraudgan Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Datasets: CSV ingestion of the transaction schema (a header row and a
// binary `Class` column), per-feature standardization, and a Gaussian-mixture
// generator for imbalanced test data.

#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fraudgan/matrix.hpp"
#include "fraudgan/neural.hpp"
#include "fraudgan/random.hpp"

namespace fraudgan {

inline constexpr const char* kLabelColumn = "Class";

struct Dataset {
  Matrix features;
  std::vector<int> labels;           // 0 = normal, 1 = fraud
  std::vector<std::string> columns;  // feature names, label column excluded

  std::size_t rows() const { return features.rows(); }
  std::size_t width() const { return features.cols(); }

  std::size_t count(int label) const {
    std::size_t n = 0;
    for (int l : labels) n += (l == label);
    return n;
  }

  std::vector<std::size_t> indices_of(int label) const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == label) idx.push_back(i);
    return idx;
  }

  Dataset subset(std::span<const std::size_t> rows_to_take) const {
    Dataset out;
    out.features = take_rows(features, rows_to_take);
    out.labels.reserve(rows_to_take.size());
    for (std::size_t r : rows_to_take) out.labels.push_back(labels[r]);
    out.columns = columns;
    return out;
  }
};

// Per-feature affine scaling x' = (x - mean) / stddev.
struct Scaler {
  std::vector<double> mean;
  std::vector<double> stddev;
  // Columns with zero variance; they are passed through with stddev 1.
  std::vector<bool> constant;

  std::size_t width() const { return mean.size(); }
  bool has_constant_columns() const {
    for (bool c : constant)
      if (c) return true;
    return false;
  }

  static Scaler identity(std::size_t width) {
    return Scaler{std::vector<double>(width, 0.0), std::vector<double>(width, 1.0),
                  std::vector<bool>(width, false)};
  }

  // Fits on the given rows only (all rows when `rows` is empty).
  static Scaler fit(const Matrix& x, std::span<const std::size_t> rows = {}) {
    const std::size_t d = x.cols();
    const std::size_t n = rows.empty() ? x.rows() : rows.size();
    if (n == 0) throw DataError("cannot fit a scaler on zero rows");
    Scaler s{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0),
             std::vector<bool>(d, false)};
    auto row_at = [&](std::size_t i) { return rows.empty() ? i : rows[i]; };
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < d; ++c) s.mean[c] += x(row_at(i), c);
    for (double& m : s.mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < d; ++c) {
        const double t = x(row_at(i), c) - s.mean[c];
        s.stddev[c] += t * t;
      }
    for (std::size_t c = 0; c < d; ++c) {
      s.stddev[c] = std::sqrt(s.stddev[c] / static_cast<double>(n));
      if (!(s.stddev[c] > 0.0)) {
        s.stddev[c] = 1.0;
        s.constant[c] = true;
      }
    }
    return s;
  }

  Matrix transform(const Matrix& x) const {
    check(x);
    Matrix out(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r)
      for (std::size_t c = 0; c < x.cols(); ++c) out(r, c) = (x(r, c) - mean[c]) / stddev[c];
    return out;
  }

  Matrix inverse_transform(const Matrix& x) const {
    check(x);
    Matrix out(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r)
      for (std::size_t c = 0; c < x.cols(); ++c) out(r, c) = x(r, c) * stddev[c] + mean[c];
    return out;
  }

 private:
  void check(const Matrix& x) const {
    if (x.cols() != mean.size()) {
      throw ShapeError("scaler fitted on " + std::to_string(mean.size()) +
                       " features applied to " + x.shape_string());
    }
  }
};

struct Standardized {
  Dataset data;
  Scaler scaler;
};

inline Standardized standardize(const Dataset& dataset) {
  Standardized out{dataset, Scaler::fit(dataset.features)};
  out.data.features = out.scaler.transform(dataset.features);
  return out;
}

namespace detail {

inline std::string_view trim_field(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim_field(line.substr(start)));
      return fields;
    }
    fields.push_back(trim_field(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

inline bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace detail

// Parses a CSV stream. Rows are numbered by file line (the header is row 1),
// which is what error messages report.
inline Dataset parse_csv(std::istream& in, const std::string& source = "<stream>") {
  std::string line;
  if (!std::getline(in, line)) throw DataError(source + ": empty file, header row expected");
  const auto header = detail::split_csv_line(line);
  std::size_t label_col = header.size();
  Dataset ds;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == kLabelColumn) {
      label_col = c;
    } else {
      ds.columns.emplace_back(header[c]);
    }
  }
  if (label_col == header.size()) {
    throw DataError(source + ": no `" + std::string(kLabelColumn) + "` column in header");
  }
  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim_field(line).empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != header.size()) {
      throw DataError(source + ": row " + std::to_string(line_no) + " has " +
                      std::to_string(fields.size()) + " fields, header has " +
                      std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      double v = 0.0;
      if (!detail::parse_double(fields[c], v)) {
        throw DataError(source + ": malformed numeric cell at row " + std::to_string(line_no) +
                        ", column \"" + std::string(header[c]) + "\": '" +
                        std::string(fields[c]) + "'");
      }
      if (c == label_col) {
        if (v != 0.0 && v != 1.0) {
          throw DataError(source + ": unknown label value '" + std::string(fields[c]) +
                          "' at row " + std::to_string(line_no) + "; expected 0 or 1");
        }
        ds.labels.push_back(static_cast<int>(v));
      } else {
        values.push_back(v);
      }
    }
  }
  if (ds.labels.empty()) throw DataError(source + ": no data rows");
  ds.features = Matrix(ds.labels.size(), ds.columns.size(), std::move(values));
  return ds;
}

inline Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file '" + path + "'");
  return parse_csv(in, path);
}

inline void write_csv(std::ostream& out, const Dataset& ds) {
  for (const std::string& c : ds.columns) out << c << ',';
  out << kLabelColumn << '\n';
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    for (std::size_t c = 0; c < ds.width(); ++c) out << format_double(ds.features(r, c)) << ',';
    out << ds.labels[r] << '\n';
  }
}

inline void save_csv(const std::string& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  write_csv(out, ds);
}

// ---------------------------------------------------------------------------
// Synthetic imbalanced data.

struct SynthSpec {
  std::size_t majority_count = 9900;
  std::size_t minority_count = 100;
  std::size_t dim = 10;
  // Mixture component means per class; rows are assigned to components
  // round-robin so component shares are exact.
  std::vector<std::vector<double>> majority_means;
  std::vector<std::vector<double>> minority_means;
  // Isotropic standard deviation shared by every component.
  double spread = 1.0;
  std::uint64_t seed = 0;

  // Two majority components around the origin, one minority component shifted
  // by `separation` (Euclidean) along the diagonal.
  static SynthSpec standard(std::size_t majority, std::size_t minority, std::size_t dim,
                            std::uint64_t seed, double separation = 2.5) {
    SynthSpec s;
    s.majority_count = majority;
    s.minority_count = minority;
    s.dim = dim;
    s.seed = seed;
    std::vector<double> a(dim, 0.0), b(dim, 0.0), f(dim, 0.0);
    a[0] = 0.75;
    b[0] = -0.75;
    const double step = separation / std::sqrt(static_cast<double>(dim));
    for (double& v : f) v = step;
    s.majority_means = {a, b};
    s.minority_means = {f};
    return s;
  }

  void validate() const {
    if (majority_count < 1 || minority_count < 1) {
      throw ParameterError("synthetic class counts must be >= 1");
    }
    if (dim == 0) throw ParameterError("synthetic dimension must be >= 1");
    if (majority_means.empty() || minority_means.empty()) {
      throw ParameterError("synthetic spec needs at least one component per class");
    }
    for (const auto* group : {&majority_means, &minority_means})
      for (const auto& m : *group)
        if (m.size() != dim) throw ParameterError("component mean width differs from dim");
    if (!(spread > 0.0)) throw ParameterError("synthetic spread must be > 0");
  }

  std::vector<double> class_mean(int label) const {
    const auto& comps = label == 1 ? minority_means : majority_means;
    const std::size_t n = label == 1 ? minority_count : majority_count;
    std::vector<double> m(dim, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < dim; ++c) m[c] += comps[i % comps.size()][c];
    for (double& v : m) v /= static_cast<double>(n);
    return m;
  }
};

inline Dataset synth_dataset(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  std::normal_distribution<double> noise(0.0, spec.spread);
  const std::size_t n = spec.majority_count + spec.minority_count;
  Matrix x(n, spec.dim);
  std::vector<int> y(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const bool fraud = i >= spec.majority_count;
    const auto& comps = fraud ? spec.minority_means : spec.majority_means;
    const std::size_t k = fraud ? i - spec.majority_count : i;
    const auto& mu = comps[k % comps.size()];
    for (std::size_t c = 0; c < spec.dim; ++c) x(i, c) = mu[c] + noise(rng);
    y[i] = fraud ? 1 : 0;
  }
  // Interleave the classes so files look like a transaction log.
  const auto order = shuffled_indices(n, rng);
  Dataset ds;
  ds.features = take_rows(x, order);
  for (std::size_t i : order) ds.labels.push_back(y[i]);
  for (std::size_t c = 0; c < spec.dim; ++c) ds.columns.push_back("V" + std::to_string(c + 1));
  return ds;
}

}  // namespace fraudgan
