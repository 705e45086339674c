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

// Minority oversampling: random duplication, SMOTE, ADASYN, GAN-generated
// rows, and k-means condition labels for the conditional GANs.
//
// All distance computations assume standardized features.

#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fraudgan/data_io.hpp"
#include "fraudgan/gan.hpp"
#include "fraudgan/matrix.hpp"
#include "fraudgan/random.hpp"

namespace fraudgan {

// Receives non-fatal diagnostics (e.g. the ADASYN fallback). Defaults to
// stderr; tests swap it out.
inline std::function<void(const std::string&)>& warning_sink() {
  static std::function<void(const std::string&)> sink = [](const std::string& msg) {
    std::cerr << "warning: " << msg << '\n';
  };
  return sink;
}

inline void warn(const std::string& msg) {
  if (warning_sink()) warning_sink()(msg);
}

namespace detail {

// Indices of the k nearest rows of `pool` to `query`, nearest first; ties go
// to the lower index. `skip` excludes one pool row (the query itself).
inline std::vector<std::size_t> nearest(const Matrix& pool, std::span<const double> query,
                                        std::size_t k, std::optional<std::size_t> skip) {
  std::vector<std::pair<double, std::size_t>> d;
  d.reserve(pool.rows());
  for (std::size_t i = 0; i < pool.rows(); ++i) {
    if (skip && *skip == i) continue;
    d.emplace_back(squared_distance(query, pool.row(i)), i);
  }
  k = std::min(k, d.size());
  std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = d[i].second;
  return out;
}

inline void interpolate_into(std::span<double> out, std::span<const double> from,
                             std::span<const double> to, double u) {
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = from[c] + u * (to[c] - from[c]);
}

}  // namespace detail

// n_new rows, each a copy of a uniformly drawn minority row.
inline Matrix ros(const Matrix& minority, std::size_t n_new, std::uint64_t seed) {
  if (minority.rows() == 0) throw DataError("ros: minority class is empty");
  Rng rng(seed);
  std::vector<std::size_t> pick(n_new);
  for (std::size_t& p : pick) p = uniform_index(rng, minority.rows());
  return take_rows(minority, pick);
}

// x + u (x_nn - x), u ~ U[0,1], x_nn one of x's k nearest minority neighbours.
inline Matrix smote(const Matrix& minority, std::size_t n_new, std::size_t k, std::uint64_t seed) {
  if (k < 1) throw ParameterError("smote: k must be >= 1");
  if (minority.rows() <= k) {
    throw ParameterError("smote: " + std::to_string(minority.rows()) +
                         " minority rows cannot supply k = " + std::to_string(k) +
                         " neighbours; use k <= " +
                         std::to_string(minority.rows() == 0 ? 0 : minority.rows() - 1));
  }
  Matrix out(n_new, minority.cols());
  if (n_new == 0) return out;
  std::vector<std::vector<std::size_t>> neighbours(minority.rows());
  for (std::size_t i = 0; i < minority.rows(); ++i)
    neighbours[i] = detail::nearest(minority, minority.row(i), k, i);
  Rng rng(seed);
  for (std::size_t s = 0; s < n_new; ++s) {
    const std::size_t base = uniform_index(rng, minority.rows());
    const std::size_t nn = neighbours[base][uniform_index(rng, k)];
    detail::interpolate_into(out.row(s), minority.row(base), minority.row(nn), uniform01(rng));
  }
  return out;
}

struct AdasynPlan {
  // Majority neighbours among each minority row's k nearest in the full data.
  std::vector<std::size_t> majority_neighbours;
  // Synthetic rows allocated to each minority row; sums to n_new.
  std::vector<std::size_t> allocation;
};

// Density weights r_i = delta_i / k, normalized, then apportioned to n_new by
// largest remainder. Empty allocation when every delta_i is zero.
inline AdasynPlan adasyn_allocation(const Matrix& minority, const Matrix& majority,
                                    std::size_t n_new, std::size_t k) {
  if (k < 1) throw ParameterError("adasyn: k must be >= 1");
  if (minority.rows() == 0) throw DataError("adasyn: minority class is empty");
  if (minority.rows() + majority.rows() <= k) {
    throw ParameterError("adasyn: not enough rows for k = " + std::to_string(k) + " neighbours");
  }
  const Matrix all = vstack(minority, majority);
  AdasynPlan plan;
  std::vector<double> r(minority.rows());
  for (std::size_t i = 0; i < minority.rows(); ++i) {
    std::size_t delta = 0;
    for (std::size_t j : detail::nearest(all, minority.row(i), k, i)) delta += (j >= minority.rows());
    plan.majority_neighbours.push_back(delta);
    r[i] = static_cast<double>(delta) / static_cast<double>(k);
  }
  double total = 0.0;
  for (double v : r) total += v;
  if (total > 0.0) plan.allocation = apportion(n_new, r);
  return plan;
}

inline Matrix adasyn(const Matrix& minority, const Matrix& majority, std::size_t n_new,
                     std::size_t k, std::uint64_t seed) {
  const AdasynPlan plan = adasyn_allocation(minority, majority, n_new, k);
  if (plan.allocation.empty()) {
    warn("adasyn: no minority row has majority neighbours; falling back to SMOTE");
    return smote(minority, n_new, std::min(k, minority.rows() - 1), seed);
  }
  Matrix out(n_new, minority.cols());
  if (n_new == 0) return out;
  const std::size_t k_min = std::min(k, minority.rows() - 1);
  Rng rng(seed);
  std::size_t s = 0;
  for (std::size_t i = 0; i < minority.rows(); ++i) {
    if (plan.allocation[i] == 0) continue;
    const auto nn = k_min ? detail::nearest(minority, minority.row(i), k_min, i)
                          : std::vector<std::size_t>{i};
    for (std::size_t j = 0; j < plan.allocation[i]; ++j, ++s) {
      const std::size_t target = nn[uniform_index(rng, nn.size())];
      detail::interpolate_into(out.row(s), minority.row(i), minority.row(target), uniform01(rng));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// k-means condition labels

struct ConditionLabels {
  std::vector<int> labels;  // cluster index per minority row
  Matrix centroids;         // classes x width
  std::size_t iterations = 0;
};

// Called after each Lloyd iteration with the within-cluster sum of squares.
using KmeansObserver = std::function<void(std::size_t iteration, double wcss)>;

inline double within_cluster_ss(const Matrix& x, const std::vector<int>& labels,
                                const Matrix& centroids) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i)
    s += squared_distance(x.row(i), centroids.row(static_cast<std::size_t>(labels[i])));
  return s;
}

// Lloyd's iterations from k-means++ seeding, until the assignment stops
// changing or `max_iterations` is reached. An empty cluster takes the point
// farthest from its centroid in the largest cluster.
inline ConditionLabels kmeans(const Matrix& x, std::size_t classes, std::uint64_t seed,
                              const KmeansObserver& observer = {},
                              std::size_t max_iterations = 100) {
  if (classes < 1) throw ParameterError("kmeans: classes must be >= 1");
  if (x.rows() < classes) {
    throw ParameterError("kmeans: " + std::to_string(x.rows()) + " rows cannot form " +
                         std::to_string(classes) + " clusters");
  }
  const std::size_t n = x.rows(), d = x.cols();
  Rng rng(seed);
  Matrix centroids(classes, d);
  {
    std::size_t first = uniform_index(rng, n);
    std::copy(x.row(first).begin(), x.row(first).end(), centroids.row(0).begin());
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    for (std::size_t c = 1; c < classes; ++c) {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        dist[i] = std::min(dist[i], squared_distance(x.row(i), centroids.row(c - 1)));
        total += dist[i];
      }
      std::size_t pick = 0;
      if (total > 0.0) {
        double u = uniform01(rng) * total;
        for (pick = 0; pick + 1 < n; ++pick) {
          if (u < dist[pick]) break;
          u -= dist[pick];
        }
      } else {
        pick = uniform_index(rng, n);
      }
      std::copy(x.row(pick).begin(), x.row(pick).end(), centroids.row(c).begin());
    }
  }

  ConditionLabels out;
  std::vector<int> labels(n, -1);
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < classes; ++c) {
        const double dc = squared_distance(x.row(i), centroids.row(c));
        if (dc < best_d) {
          best_d = dc;
          best = static_cast<int>(c);
        }
      }
      if (labels[i] != best) {
        labels[i] = best;
        changed = true;
      }
    }
    // Repair empty clusters.
    std::vector<std::size_t> sizes(classes, 0);
    for (int l : labels) sizes[static_cast<std::size_t>(l)] += 1;
    for (std::size_t c = 0; c < classes; ++c) {
      if (sizes[c] != 0) continue;
      const auto largest = static_cast<std::size_t>(
          std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] != static_cast<int>(largest)) continue;
        const double di = squared_distance(x.row(i), centroids.row(largest));
        if (di > far_d) {
          far_d = di;
          far = i;
        }
      }
      labels[far] = static_cast<int>(c);
      sizes[largest] -= 1;
      sizes[c] = 1;
      changed = true;
    }
    // Update.
    centroids = Matrix(classes, d);
    for (std::size_t i = 0; i < n; ++i) {
      auto dst = centroids.row(static_cast<std::size_t>(labels[i]));
      auto src = x.row(i);
      for (std::size_t f = 0; f < d; ++f) dst[f] += src[f];
    }
    for (std::size_t c = 0; c < classes; ++c)
      for (double& v : centroids.row(c)) v /= static_cast<double>(sizes[c]);
    out.iterations = it;
    if (observer) observer(it, within_cluster_ss(x, labels, centroids));
    if (!changed) break;
  }
  out.labels = std::move(labels);
  out.centroids = std::move(centroids);
  return out;
}

// ---------------------------------------------------------------------------
// Balancing

enum class Method { none, ros, smote, adasyn, gan, cgan, wgan, wcgan };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::none: return "none";
    case Method::ros: return "ros";
    case Method::smote: return "smote";
    case Method::adasyn: return "adasyn";
    case Method::gan: return "gan";
    case Method::cgan: return "cgan";
    case Method::wgan: return "wgan";
    case Method::wcgan: return "wcgan";
  }
  return "?";
}

inline Method parse_method(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  for (Method m : {Method::none, Method::ros, Method::smote, Method::adasyn, Method::gan,
                   Method::cgan, Method::wgan, Method::wcgan}) {
    if (s == to_string(m)) return m;
  }
  throw ParameterError("unknown sampling method '" + s +
                       "' (expected none, ros, smote, adasyn, gan, cgan, wgan, wcgan)");
}

inline bool is_gan_method(Method m) {
  return m == Method::gan || m == Method::cgan || m == Method::wgan || m == Method::wcgan;
}

inline Framework framework_of(Method m) {
  switch (m) {
    case Method::gan: return Framework::gan;
    case Method::cgan: return Framework::cgan;
    case Method::wgan: return Framework::wgan;
    case Method::wcgan: return Framework::wcgan;
    default: throw ParameterError(std::string("method '") + to_string(m) + "' is not a GAN");
  }
}

struct BalancePlan {
  Method method = Method::none;
  std::uint64_t seed = 0;
  std::size_t smote_k = 5;
  std::size_t adasyn_k = 5;
  // ADASYN balance level; 1 equalizes the classes.
  double adasyn_beta = 1.0;
  // Trained model whose output space is the dataset's feature space.
  const GanModel* gan = nullptr;
};

struct AugmentedDataset {
  Dataset data;
  // true marks a synthetic row; synthetic rows are appended after the originals.
  std::vector<bool> synthetic;

  std::size_t synthetic_count() const {
    return static_cast<std::size_t>(std::count(synthetic.begin(), synthetic.end(), true));
  }
};

inline AugmentedDataset as_original(const Dataset& ds) {
  return {ds, std::vector<bool>(ds.rows(), false)};
}

// Adds synthetic minority rows until the minority count reaches the majority
// count. Original rows are kept as-is and in order.
inline AugmentedDataset balance(const Dataset& dataset, const BalancePlan& plan) {
  const std::size_t pos = dataset.count(1), neg = dataset.count(0);
  if (pos == 0 || neg == 0) throw DataError("balance: dataset must contain both classes");
  AugmentedDataset out = as_original(dataset);
  if (plan.method == Method::none || pos == neg) return out;

  const int minority_label = pos < neg ? 1 : 0;
  const auto minority_rows = dataset.indices_of(minority_label);
  const auto majority_rows = dataset.indices_of(1 - minority_label);
  const Matrix minority = take_rows(dataset.features, minority_rows);
  std::size_t n_new = majority_rows.size() - minority_rows.size();

  Matrix extra;
  switch (plan.method) {
    case Method::none:
      break;
    case Method::ros:
      extra = ros(minority, n_new, plan.seed);
      break;
    case Method::smote:
      extra = smote(minority, n_new, plan.smote_k, plan.seed);
      break;
    case Method::adasyn: {
      n_new = static_cast<std::size_t>(std::llround(plan.adasyn_beta * static_cast<double>(n_new)));
      extra = adasyn(minority, take_rows(dataset.features, majority_rows), n_new, plan.adasyn_k,
                     plan.seed);
      break;
    }
    case Method::gan:
    case Method::cgan:
    case Method::wgan:
    case Method::wcgan: {
      if (plan.gan == nullptr) throw ParameterError("balance: GAN method needs a trained model");
      if (plan.gan->config.framework != framework_of(plan.method)) {
        throw ParameterError(std::string("balance: model framework ") +
                             to_string(plan.gan->config.framework) + " does not match method " +
                             to_string(plan.method));
      }
      if (plan.gan->data_width != dataset.width()) {
        throw ShapeError("balance: GAN generates " + std::to_string(plan.gan->data_width) +
                         " features, dataset has " + std::to_string(dataset.width()));
      }
      extra = generate_mixed(*plan.gan, n_new, plan.seed);
      if (!extra.all_finite()) throw NumericalError("balance: generator produced non-finite rows");
      break;
    }
  }
  out.data.features = vstack(dataset.features, extra);
  out.data.labels.insert(out.data.labels.end(), extra.rows(), minority_label);
  out.synthetic.insert(out.synthetic.end(), extra.rows(), true);
  return out;
}

}  // namespace fraudgan
