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

// Ranking and threshold metrics for binary scores. Label 1 is the positive
// (fraud) class.

#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "fraudgan/errors.hpp"

namespace fraudgan {

struct RocCurve {
  // Points ordered by decreasing threshold, from (0,0) to (1,1).
  std::vector<double> fpr;
  std::vector<double> tpr;
};

namespace detail {

inline void check_scores(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw ShapeError("metrics: " + std::to_string(scores.size()) + " scores vs " +
                     std::to_string(labels.size()) + " labels");
  }
}

// Distinct-threshold sweep: calls visit(true_positives, false_positives) after
// each group of tied scores, highest scores first.
template <typename Visit>
void sweep_thresholds(std::span<const double> scores, std::span<const int> labels,
                      Visit&& visit) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      (labels[order[i]] == 1 ? tp : fp) += 1;
      ++i;
    }
    visit(tp, fp);
  }
}

}  // namespace detail

inline RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels) {
  detail::check_scores(scores, labels);
  const auto pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) throw DataError("ROC needs both classes present");
  RocCurve roc;
  roc.fpr.push_back(0.0);
  roc.tpr.push_back(0.0);
  detail::sweep_thresholds(scores, labels, [&](std::size_t tp, std::size_t fp) {
    roc.fpr.push_back(static_cast<double>(fp) / static_cast<double>(neg));
    roc.tpr.push_back(static_cast<double>(tp) / static_cast<double>(pos));
  });
  return roc;
}

inline double trapezoid_area(const RocCurve& roc) {
  double area = 0.0;
  for (std::size_t i = 1; i < roc.fpr.size(); ++i) {
    area += (roc.fpr[i] - roc.fpr[i - 1]) * (roc.tpr[i] + roc.tpr[i - 1]) * 0.5;
  }
  return area;
}

// Trapezoidal area under the ROC curve. Tied scores produce a diagonal segment,
// i.e. half credit, matching the Mann-Whitney statistic.
inline double auc(std::span<const double> scores, std::span<const int> labels) {
  return trapezoid_area(roc_curve(scores, labels));
}

// Average precision: sum over thresholds of (recall step) x precision, with no
// interpolation between PR points.
inline double auprc(std::span<const double> scores, std::span<const int> labels) {
  detail::check_scores(scores, labels);
  const auto pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  if (pos == 0) throw DataError("AUPRC needs at least one positive");
  double ap = 0.0;
  std::size_t prev_tp = 0;
  detail::sweep_thresholds(scores, labels, [&](std::size_t tp, std::size_t fp) {
    if (tp != prev_tp) {
      const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
      ap += static_cast<double>(tp - prev_tp) / static_cast<double>(pos) * precision;
      prev_tp = tp;
    }
  });
  return ap;
}

struct ClassificationMetrics {
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
  // Set when the corresponding denominator was zero and the value defaulted
  // to 0.
  bool recall_undefined = false;
  bool precision_undefined = false;
  bool f1_undefined = false;
};

// Confusion-matrix metrics; a score >= threshold predicts the positive class.
inline ClassificationMetrics classification_metrics(std::span<const double> scores,
                                                    std::span<const int> labels,
                                                    double threshold = 0.5) {
  detail::check_scores(scores, labels);
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    const bool actual = labels[i] == 1;
    tp += predicted && actual;
    fp += predicted && !actual;
    fn += !predicted && actual;
  }
  ClassificationMetrics m;
  if (tp + fn == 0) {
    m.recall_undefined = true;
  } else {
    m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  }
  if (tp + fp == 0) {
    m.precision_undefined = true;
  } else {
    m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  }
  if (m.precision + m.recall > 0.0) {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  } else {
    m.f1_undefined = true;
  }
  return m;
}

}  // namespace fraudgan
