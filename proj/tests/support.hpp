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

// Shared oracles for the unit tests and the acceptance binary.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "fraudgan/fraudgan.hpp"

namespace fraudgan::testing {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double sd = 1.0) {
  std::normal_distribution<double> n(0.0, sd);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = n(rng);
  return m;
}

inline Matrix uniform_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = u(rng);
  return m;
}

// Central finite differences against analytic gradients.
//
// `params` are perturbed in place; `loss` must re-evaluate from them. When
// `pattern` is given it returns the sign pattern of every piecewise-linear
// pre-activation; a probe whose +h or -h evaluation flips that pattern sits on
// a kink, so it is retried with a smaller step and skipped only if the kink is
// still inside the interval.
struct GradCheck {
  std::size_t checked = 0;
  std::size_t failed = 0;
  std::size_t kink_skipped = 0;
  double worst_abs = 0.0;
  double worst_rel = 0.0;

  bool ok() const { return failed == 0 && checked > 0; }
};

inline bool grad_close(double analytic, double numeric, double rel_tol = 1e-5,
                       double abs_tol = 1e-8) {
  const double err = std::abs(analytic - numeric);
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  return err <= abs_tol || err <= rel_tol * scale;
}

inline GradCheck check_gradients(const std::vector<Matrix*>& params,
                                 const std::vector<Matrix>& analytic,
                                 const std::function<double()>& loss,
                                 const std::function<std::vector<bool>()>& pattern = {},
                                 double h = 1e-5, double rel_tol = 1e-5, double abs_tol = 1e-8) {
  GradCheck out;
  const std::vector<bool> base = pattern ? pattern() : std::vector<bool>{};
  for (std::size_t p = 0; p < params.size(); ++p) {
    Matrix& m = *params[p];
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double saved = m[i];
      double step = h;
      bool kink = false;
      double numeric = 0.0;
      for (int attempt = 0; attempt < 3; ++attempt, step *= 1e-2) {
        m[i] = saved + step;
        const double up = loss();
        const bool up_same = !pattern || pattern() == base;
        m[i] = saved - step;
        const double down = loss();
        const bool down_same = !pattern || pattern() == base;
        m[i] = saved;
        numeric = (up - down) / (2.0 * step);
        kink = !(up_same && down_same);
        if (!kink) break;
      }
      if (kink) {
        out.kink_skipped += 1;
        continue;
      }
      const double a = analytic[p][i];
      const double err = std::abs(a - numeric);
      out.worst_abs = std::max(out.worst_abs, err);
      const double scale = std::max(std::abs(a), std::abs(numeric));
      if (scale > 0.0) out.worst_rel = std::max(out.worst_rel, err / scale);
      out.checked += 1;
      if (!grad_close(a, numeric, rel_tol, abs_tol)) out.failed += 1;
    }
  }
  return out;
}

// Signs of every hidden pre-activation of an MLP on `x` (eval mode).
inline void append_pattern(const MlpParams& params, const Matrix& x, std::vector<bool>& out) {
  Matrix h = x;
  for (std::size_t i = 0; i < params.weights.size(); ++i) {
    Matrix pre = add_row(matmul(h, params.weights[i]), params.biases[i]);
    if (i + 1 == params.weights.size()) break;
    for (double v : pre.values()) out.push_back(v > 0.0);
    h = map(pre, [](double v) { return v > 0.0 ? v : 0.2 * v; });
  }
}

inline std::vector<Matrix*> param_ptrs(MlpParams& p) {
  std::vector<Matrix*> out;
  for (std::size_t i = 0; i < p.weights.size(); ++i) {
    out.push_back(&p.weights[i]);
    out.push_back(&p.biases[i]);
  }
  return out;
}

inline std::vector<Matrix> grad_list(const MlpGrads& g) {
  std::vector<Matrix> out;
  for (std::size_t i = 0; i < g.weights.size(); ++i) {
    out.push_back(g.weights[i]);
    out.push_back(g.biases[i]);
  }
  return out;
}

// Brute-force AUC: pairwise comparisons with half credit for ties.
inline double pairwise_auc(const std::vector<double>& s, const std::vector<int>& y) {
  double credit = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1.0;
      credit += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return credit / pairs;
}

// Brute-force average precision: for every distinct threshold t taken from
// the scores (descending), recall gained at t times precision at t.
inline double rank_walk_ap(const std::vector<double>& s, const std::vector<int>& y) {
  std::vector<double> thresholds = s;
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  const double positives = static_cast<double>(std::count(y.begin(), y.end(), 1));
  double ap = 0.0, prev_recall = 0.0;
  for (double t : thresholds) {
    double tp = 0.0, predicted = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] >= t) {
        predicted += 1.0;
        tp += y[i] == 1 ? 1.0 : 0.0;
      }
    }
    const double recall = tp / positives;
    ap += (recall - prev_recall) * (tp / predicted);
    prev_recall = recall;
  }
  return ap;
}

}  // namespace fraudgan::testing
