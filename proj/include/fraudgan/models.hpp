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

// Classifiers: L2-regularized logistic regression and depth-limited
// gradient-boosted trees (Newton boosting on the logistic loss, exact greedy
// splits), plus the real-vs-generated probe built on the latter.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "fraudgan/autodiff.hpp"
#include "fraudgan/cross_validation.hpp"
#include "fraudgan/data_io.hpp"
#include "fraudgan/matrix.hpp"
#include "fraudgan/random.hpp"

namespace fraudgan {

namespace detail {

inline void require_both_classes(std::span<const int> labels, const char* who) {
  const bool has_pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
  const bool has_neg = std::find(labels.begin(), labels.end(), 0) != labels.end();
  if (!has_pos || !has_neg) {
    throw DataError(std::string(who) + ": training data must contain both classes");
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Logistic regression

struct LogisticConfig {
  double learning_rate = 0.1;
  std::size_t max_epochs = 5000;
  double l2 = 1e-3;
  // Stop once the full-batch gradient norm drops below this.
  double tolerance = 1e-6;
};

struct LogisticModel {
  std::vector<double> weights;
  double bias = 0.0;
  LogisticConfig config;
  std::size_t epochs_run = 0;
};

// Gradient of mean log-loss + (l2/2)|w|^2; the bias is not regularized.
// Layout: [d weights..., bias].
inline std::vector<double> logistic_gradient(const LogisticModel& model, const Matrix& x,
                                             std::span<const int> y) {
  const std::size_t n = x.rows(), d = x.cols();
  const auto xe = detail::as_eigen(x);
  const Eigen::Map<const Eigen::VectorXd> w(model.weights.data(), static_cast<Eigen::Index>(d));
  Eigen::VectorXd err = xe * w;
  // 1 / (1 + e^-z) saturates cleanly to 0 or 1 when e^-z overflows.
  err = (1.0 + (-(err.array() + model.bias)).exp()).inverse().matrix();
  for (std::size_t r = 0; r < n; ++r) err[static_cast<Eigen::Index>(r)] -= static_cast<double>(y[r]);
  const Eigen::VectorXd gw = xe.transpose() * err;
  std::vector<double> g(d + 1, 0.0);
  for (std::size_t c = 0; c < d; ++c) g[c] = gw[static_cast<Eigen::Index>(c)];
  g[d] = err.sum();
  for (double& v : g) v /= static_cast<double>(n);
  for (std::size_t c = 0; c < d; ++c) g[c] += model.config.l2 * model.weights[c];
  return g;
}

inline double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Full-batch gradient descent, deterministic.
inline LogisticModel fit_logistic(const Matrix& x, std::span<const int> y,
                                  const LogisticConfig& config = {}) {
  if (x.rows() != y.size()) throw ShapeError("fit_logistic: feature rows differ from labels");
  detail::require_both_classes(y, "fit_logistic");
  LogisticModel model;
  model.config = config;
  model.weights.assign(x.cols(), 0.0);
  const std::size_t d = x.cols();
  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    const auto g = logistic_gradient(model, x, y);
    if (norm2(g) < config.tolerance) break;
    for (std::size_t c = 0; c < d; ++c) model.weights[c] -= config.learning_rate * g[c];
    model.bias -= config.learning_rate * g[d];
    model.epochs_run = epoch + 1;
  }
  return model;
}

inline LogisticModel fit_logistic(const Dataset& ds, const LogisticConfig& config = {}) {
  return fit_logistic(ds.features, ds.labels, config);
}

inline std::vector<double> predict_proba(const LogisticModel& model, const Matrix& x) {
  if (x.cols() != model.weights.size()) {
    throw ShapeError("predict_proba: model expects " + std::to_string(model.weights.size()) +
                     " features, got " + x.shape_string());
  }
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double z = model.bias;
    for (std::size_t c = 0; c < x.cols(); ++c) z += model.weights[c] * x(r, c);
    out[r] = stable_sigmoid(z);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Gradient-boosted trees

struct BoostConfig {
  std::size_t rounds = 100;
  std::size_t max_depth = 4;
  double shrinkage = 0.1;
  double lambda = 1.0;
  // Minimum hessian mass per child.
  double min_child_weight = 1.0;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  double value = 0.0;  // leaf output, shrinkage already applied
  int left = -1;       // rows with x[feature] < threshold
  int right = -1;

  bool is_leaf() const { return feature < 0; }
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(std::span<const double> row) const {
    int i = 0;
    while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
      const TreeNode& n = nodes[static_cast<std::size_t>(i)];
      i = row[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
  }

  std::size_t depth() const { return depth_from(0); }

 private:
  std::size_t depth_from(int i) const {
    const TreeNode& n = nodes[static_cast<std::size_t>(i)];
    if (n.is_leaf()) return 0;
    return 1 + std::max(depth_from(n.left), depth_from(n.right));
  }
};

struct BoostedTreesModel {
  std::vector<RegressionTree> trees;
  double base_score = 0.0;  // log-odds of the training prior
  std::size_t features = 0;
  BoostConfig config;

  double margin(std::span<const double> row) const {
    double m = base_score;
    for (const RegressionTree& t : trees) m += t.predict(row);
    return m;
  }
};

namespace detail {

struct SplitCandidate {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

struct NodeStats {
  double g = 0.0;
  double h = 0.0;
};

// Grows one tree level by level. `sorted[f]` lists all rows ordered by
// feature f; each level is one pass over those lists.
inline RegressionTree grow_tree(const Matrix& x, const std::vector<std::vector<std::size_t>>& sorted,
                                std::span<const double> grad, std::span<const double> hess,
                                const BoostConfig& cfg) {
  const std::size_t n = x.rows(), d = x.cols();
  RegressionTree tree;
  tree.nodes.emplace_back();
  std::vector<int> node_of(n, 0);
  std::vector<int> frontier{0};
  std::vector<NodeStats> stats(1);
  for (std::size_t r = 0; r < n; ++r) {
    stats[0].g += grad[r];
    stats[0].h += hess[r];
  }
  auto score = [&](double g, double h) { return g * g / (h + cfg.lambda); };

  for (std::size_t depth = 0; depth < cfg.max_depth && !frontier.empty(); ++depth) {
    // Local slot per frontier node.
    std::vector<int> slot(tree.nodes.size(), -1);
    for (std::size_t i = 0; i < frontier.size(); ++i) slot[static_cast<std::size_t>(frontier[i])] = static_cast<int>(i);
    std::vector<SplitCandidate> best(frontier.size());
    std::vector<NodeStats> left(frontier.size());
    std::vector<double> last(frontier.size());
    std::vector<bool> seen(frontier.size());
    for (std::size_t f = 0; f < d; ++f) {
      std::fill(left.begin(), left.end(), NodeStats{});
      std::fill(seen.begin(), seen.end(), false);
      for (std::size_t r : sorted[f]) {
        const int node = node_of[r];
        if (node < 0 || slot[static_cast<std::size_t>(node)] < 0) continue;
        const auto s = static_cast<std::size_t>(slot[static_cast<std::size_t>(node)]);
        const double v = x(r, f);
        if (seen[s] && v != last[s]) {
          const NodeStats& tot = stats[static_cast<std::size_t>(node)];
          const double gl = left[s].g, hl = left[s].h;
          const double gr = tot.g - gl, hr = tot.h - hl;
          if (hl >= cfg.min_child_weight && hr >= cfg.min_child_weight) {
            const double gain = score(gl, hl) + score(gr, hr) - score(tot.g, tot.h);
            if (gain > best[s].gain + 1e-12) {
              best[s] = SplitCandidate{gain, static_cast<int>(f), 0.5 * (last[s] + v)};
            }
          }
        }
        left[s].g += grad[r];
        left[s].h += hess[r];
        last[s] = v;
        seen[s] = true;
      }
    }
    std::vector<int> next;
    for (std::size_t i = 0; i < frontier.size(); ++i) {
      if (best[i].feature < 0) continue;
      const int id = frontier[i];
      const int l = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      TreeNode& parent = tree.nodes[static_cast<std::size_t>(id)];
      parent.feature = best[i].feature;
      parent.threshold = best[i].threshold;
      parent.left = l;
      parent.right = l + 1;
      next.push_back(l);
      next.push_back(l + 1);
    }
    stats.resize(tree.nodes.size());
    for (int id : next) stats[static_cast<std::size_t>(id)] = NodeStats{};
    for (std::size_t r = 0; r < n; ++r) {
      const int node = node_of[r];
      if (node < 0) continue;
      const TreeNode& t = tree.nodes[static_cast<std::size_t>(node)];
      if (t.is_leaf()) {
        node_of[r] = -1 - node;  // finished; remember the leaf
        continue;
      }
      const int child = x(r, static_cast<std::size_t>(t.feature)) < t.threshold ? t.left : t.right;
      node_of[r] = child;
      stats[static_cast<std::size_t>(child)].g += grad[r];
      stats[static_cast<std::size_t>(child)].h += hess[r];
    }
    frontier = std::move(next);
  }
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    TreeNode& t = tree.nodes[i];
    if (t.is_leaf()) t.value = -cfg.shrinkage * stats[i].g / (stats[i].h + cfg.lambda);
  }
  return tree;
}

}  // namespace detail

// Observes the training log-loss after each round (round 0 = base score).
using RoundObserver = std::function<void(std::size_t round, double train_logloss)>;

inline double mean_logloss(std::span<const double> margins, std::span<const int> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double p = stable_sigmoid(margins[i]);
    s -= y[i] == 1 ? guarded_log(p) : guarded_log(1.0 - p);
  }
  return s / static_cast<double>(y.size());
}

inline BoostedTreesModel fit_boosted(const Matrix& x, std::span<const int> y,
                                     const BoostConfig& cfg = {},
                                     const RoundObserver& observer = {}) {
  if (x.rows() != y.size()) throw ShapeError("fit_boosted: feature rows differ from labels");
  detail::require_both_classes(y, "fit_boosted");
  if (cfg.max_depth == 0) throw ParameterError("fit_boosted: max depth must be >= 1");
  const std::size_t n = x.rows(), d = x.cols();
  BoostedTreesModel model;
  model.config = cfg;
  model.features = d;
  const double prior =
      static_cast<double>(std::count(y.begin(), y.end(), 1)) / static_cast<double>(n);
  model.base_score = std::log(prior / (1.0 - prior));

  std::vector<std::vector<std::size_t>> sorted(d, std::vector<std::size_t>(n));
  for (std::size_t f = 0; f < d; ++f) {
    std::iota(sorted[f].begin(), sorted[f].end(), std::size_t{0});
    std::stable_sort(sorted[f].begin(), sorted[f].end(),
                     [&](std::size_t a, std::size_t b) { return x(a, f) < x(b, f); });
  }
  std::vector<double> margin(n, model.base_score), grad(n), hess(n);
  if (observer) observer(0, mean_logloss(margin, y));
  for (std::size_t round = 0; round < cfg.rounds; ++round) {
    for (std::size_t r = 0; r < n; ++r) {
      const double p = stable_sigmoid(margin[r]);
      grad[r] = p - static_cast<double>(y[r]);
      hess[r] = std::max(p * (1.0 - p), 1e-16);
    }
    model.trees.push_back(detail::grow_tree(x, sorted, grad, hess, cfg));
    const RegressionTree& tree = model.trees.back();
    for (std::size_t r = 0; r < n; ++r) margin[r] += tree.predict(x.row(r));
    if (observer) observer(round + 1, mean_logloss(margin, y));
  }
  return model;
}

inline BoostedTreesModel fit_boosted(const Dataset& ds, const BoostConfig& cfg = {}) {
  return fit_boosted(ds.features, ds.labels, cfg);
}

inline std::vector<double> predict_proba(const BoostedTreesModel& model, const Matrix& x) {
  if (x.cols() != model.features) {
    throw ShapeError("predict_proba: model expects " + std::to_string(model.features) +
                     " features, got " + x.shape_string());
  }
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = stable_sigmoid(model.margin(x.row(r)));
  return out;
}

// ---------------------------------------------------------------------------
// Text formats.
//
//   logistic <d> <bias>
//   <d weights>
//
//   boosted <d> <rounds> <base_score> <shrinkage>
//   tree <node count>
//   <feature> <threshold>   (split, preorder: node, left subtree, right subtree)
//   leaf <value>

inline void write_model(std::ostream& out, const LogisticModel& m) {
  out << "logistic " << m.weights.size() << ' ' << format_double(m.bias) << '\n';
  for (std::size_t c = 0; c < m.weights.size(); ++c)
    out << (c ? " " : "") << format_double(m.weights[c]);
  out << '\n';
}

namespace detail {

inline void write_preorder(std::ostream& out, const RegressionTree& t, int i) {
  const TreeNode& n = t.nodes[static_cast<std::size_t>(i)];
  if (n.is_leaf()) {
    out << "leaf " << format_double(n.value) << '\n';
    return;
  }
  out << n.feature << ' ' << format_double(n.threshold) << '\n';
  write_preorder(out, t, n.left);
  write_preorder(out, t, n.right);
}

inline int read_preorder(std::istream& in, RegressionTree& t) {
  std::string head;
  if (!(in >> head)) throw DataError("truncated tree");
  const int id = static_cast<int>(t.nodes.size());
  t.nodes.emplace_back();
  if (head == "leaf") {
    double v = 0.0;
    if (!(in >> v)) throw DataError("malformed leaf value");
    t.nodes[static_cast<std::size_t>(id)].value = v;
    return id;
  }
  TreeNode n;
  try {
    n.feature = std::stoi(head);
  } catch (const std::exception&) {
    throw DataError("malformed split feature '" + head + "'");
  }
  if (!(in >> n.threshold)) throw DataError("malformed split threshold");
  n.left = read_preorder(in, t);
  n.right = read_preorder(in, t);
  t.nodes[static_cast<std::size_t>(id)] = n;
  return id;
}

inline std::size_t count_nodes(const RegressionTree& t, int i) {
  const TreeNode& n = t.nodes[static_cast<std::size_t>(i)];
  return n.is_leaf() ? 1 : 1 + count_nodes(t, n.left) + count_nodes(t, n.right);
}

}  // namespace detail

inline void write_model(std::ostream& out, const BoostedTreesModel& m) {
  out << "boosted " << m.features << ' ' << m.trees.size() << ' ' << format_double(m.base_score)
      << ' ' << format_double(m.config.shrinkage) << '\n';
  for (const RegressionTree& t : m.trees) {
    out << "tree " << detail::count_nodes(t, 0) << '\n';
    detail::write_preorder(out, t, 0);
  }
}

inline LogisticModel read_logistic(std::istream& in) {
  std::string tag;
  std::size_t d = 0;
  LogisticModel m;
  if (!(in >> tag >> d >> m.bias) || tag != "logistic") throw DataError("not a logistic model");
  m.weights.resize(d);
  for (double& w : m.weights)
    if (!(in >> w)) throw DataError("truncated logistic weights");
  return m;
}

inline BoostedTreesModel read_boosted(std::istream& in) {
  std::string tag;
  std::size_t rounds = 0;
  BoostedTreesModel m;
  if (!(in >> tag >> m.features >> rounds >> m.base_score >> m.config.shrinkage) ||
      tag != "boosted") {
    throw DataError("not a boosted-trees model");
  }
  for (std::size_t i = 0; i < rounds; ++i) {
    std::size_t count = 0;
    if (!(in >> tag >> count) || tag != "tree") throw DataError("missing tree header");
    RegressionTree t;
    detail::read_preorder(in, t);
    if (t.nodes.size() != count) throw DataError("tree node count mismatch");
    for (const TreeNode& n : t.nodes) {
      if (!n.is_leaf() && static_cast<std::size_t>(n.feature) >= m.features) {
        throw DataError("tree split references feature " + std::to_string(n.feature));
      }
    }
    m.trees.push_back(std::move(t));
  }
  m.config.rounds = rounds;
  return m;
}

// ---------------------------------------------------------------------------
// Real-vs-generated probe

struct ProbeConfig {
  std::size_t folds = 3;
  BoostConfig boost{};
  std::uint64_t seed = 0;
};

namespace detail {

// Stratified folds in which identical rows always share a fold. A generator
// that copies real rows would otherwise be scored against its own copies with
// the opposite label, which pushes accuracy well below 0.5.
inline std::vector<FoldSplit> grouped_folds(const Matrix& x, std::span<const int> y,
                                            std::size_t k, std::uint64_t seed) {
  const std::size_t n = x.rows();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto less = [&](std::size_t a, std::size_t b) {
    const auto ra = x.row(a), rb = x.row(b);
    return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
  };
  std::stable_sort(order.begin(), order.end(), less);
  // Groups by kind: all label 1, all label 0, mixed.
  std::vector<std::vector<std::size_t>> kinds[3];
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && !less(order[i], order[j])) ++j;
    std::vector<std::size_t> g(order.begin() + static_cast<std::ptrdiff_t>(i),
                               order.begin() + static_cast<std::ptrdiff_t>(j));
    std::size_t pos = 0;
    for (std::size_t r : g) pos += y[r] == 1;
    kinds[pos == g.size() ? 0 : (pos == 0 ? 1 : 2)].push_back(std::move(g));
    i = j;
  }
  Rng rng(seed);
  std::vector<FoldSplit> folds(k);
  std::vector<std::size_t> fold_of(n);
  std::size_t next = 0;
  for (auto& groups : kinds) {
    std::shuffle(groups.begin(), groups.end(), rng);
    for (const auto& g : groups) {
      for (std::size_t r : g) fold_of[r] = next % k;
      ++next;
    }
  }
  for (std::size_t f = 0; f < k; ++f) folds[f].fold = f;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t f = 0; f < k; ++f) (fold_of[i] == f ? folds[f].test : folds[f].train).push_back(i);
  return folds;
}

}  // namespace detail

// Cross-validated boosted-trees accuracy at telling real rows (label 1) from
// generated rows (label 0). The generated side is resampled to the real row
// count so the task is class balanced; 0.5 means indistinguishable.
inline double probe_accuracy(const Matrix& real, const Matrix& generated,
                             const ProbeConfig& cfg = {}) {
  if (real.rows() == 0 || generated.rows() == 0) {
    throw DataError("probe_accuracy: both real and generated inputs must be non-empty");
  }
  if (real.cols() != generated.cols()) {
    throw ShapeError("probe_accuracy: real " + real.shape_string() + " vs generated " +
                     generated.shape_string());
  }
  const std::size_t n = real.rows();
  if (n < cfg.folds) throw DataError("probe_accuracy: fewer real rows than folds");
  Rng rng(cfg.seed);
  std::vector<std::size_t> pick;
  if (generated.rows() >= n) {
    pick = shuffled_indices(generated.rows(), rng);
    pick.resize(n);
  } else {
    pick.resize(n);
    for (std::size_t i = 0; i < n; ++i) pick[i] = i < generated.rows() ? i : uniform_index(rng, generated.rows());
  }
  const Matrix x = vstack(real, take_rows(generated, pick));
  std::vector<int> y(2 * n, 0);
  std::fill(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n), 1);

  std::size_t correct = 0;
  for (const FoldSplit& fold : detail::grouped_folds(x, y, cfg.folds, derive_seed(cfg.seed, 1))) {
    std::vector<int> ytrain;
    for (std::size_t i : fold.train) ytrain.push_back(y[i]);
    const auto model = fit_boosted(take_rows(x, fold.train), ytrain, cfg.boost);
    const auto p = predict_proba(model, take_rows(x, fold.test));
    for (std::size_t i = 0; i < fold.test.size(); ++i) {
      correct += (p[i] >= 0.5 ? 1 : 0) == y[fold.test[i]];
    }
  }
  return static_cast<double>(correct) / static_cast<double>(x.rows());
}

}  // namespace fraudgan
