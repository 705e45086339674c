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

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "fraudgan/metrics.hpp"
#include "fraudgan/models.hpp"
#include "support.hpp"

namespace fraudgan {
namespace {

using testing::random_matrix;

Dataset noisy_two_class(std::size_t n, std::uint64_t seed) {
  SynthSpec s = SynthSpec::standard(n, n, 3, seed, 1.5);
  return synth_dataset(s);
}

// ---------------------------------------------------------------------------
// Logistic regression

TEST(Logistic, SymmetricDataGivesHalf) {
  const Matrix x = Matrix::from_rows({{-1}, {1}, {-1}, {1}});
  const std::vector<int> y{0, 0, 1, 1};
  const LogisticModel m = fit_logistic(x, y);
  for (double p : predict_proba(m, Matrix::from_rows({{-3}, {0}, {2}}))) EXPECT_NEAR(p, 0.5, 1e-12);
}

TEST(Logistic, SeparatesTwoPoints) {
  const Matrix x = Matrix::from_rows({{-1, 0.5}, {2, -1}});
  const std::vector<int> y{0, 1};
  const auto p = predict_proba(fit_logistic(x, y), x);
  EXPECT_LT(p[0], 0.5);
  EXPECT_GT(p[1], 0.5);
}

TEST(Logistic, ConvergesToStationaryPoint) {
  const Dataset ds = noisy_two_class(200, 4);
  const LogisticModel m = fit_logistic(ds);
  EXPECT_LT(m.epochs_run, m.config.max_epochs);
  EXPECT_LE(norm2(logistic_gradient(m, ds.features, ds.labels)), 1e-4);
}

TEST(Logistic, GradientMatchesFiniteDifferences) {
  const Dataset ds = noisy_two_class(30, 2);
  LogisticModel m;
  m.weights = {0.3, -0.2, 0.1};
  m.bias = 0.05;
  m.config.l2 = 0.01;
  auto objective = [&](const LogisticModel& mm) {
    const auto p = predict_proba(mm, ds.features);
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
      s -= ds.labels[i] ? std::log(p[i]) : std::log(1.0 - p[i]);
    double w2 = 0.0;
    for (double w : mm.weights) w2 += w * w;
    return s / static_cast<double>(p.size()) + 0.5 * mm.config.l2 * w2;
  };
  const auto g = logistic_gradient(m, ds.features, ds.labels);
  for (std::size_t i = 0; i <= 3; ++i) {
    LogisticModel up = m, down = m;
    double& u = i < 3 ? up.weights[i] : up.bias;
    double& d = i < 3 ? down.weights[i] : down.bias;
    u += 1e-6;
    d -= 1e-6;
    EXPECT_NEAR(g[i], (objective(up) - objective(down)) / 2e-6, 1e-8);
  }
}

TEST(Logistic, ZeroWeightsPredictHalf) {
  LogisticModel m;
  m.weights = {0, 0};
  Rng rng(1);
  for (double p : predict_proba(m, random_matrix(5, 2, rng))) EXPECT_EQ(p, 0.5);
}

TEST(Logistic, Errors) {
  const Matrix x = Matrix::from_rows({{1}, {2}});
  EXPECT_THROW(fit_logistic(x, std::vector<int>{1, 1}), DataError);
  EXPECT_THROW(fit_logistic(x, std::vector<int>{1}), ShapeError);
  LogisticModel m;
  m.weights = {0, 0};
  EXPECT_THROW(predict_proba(m, x), ShapeError);
}

// ---------------------------------------------------------------------------
// Boosted trees

TEST(Boosted, SeparableLineReachesPerfectAuc) {
  const Matrix x = Matrix::from_rows({{1}, {2}, {3}, {4}, {5}, {6}, {7}, {8}});
  const std::vector<int> y{0, 0, 0, 0, 1, 1, 1, 1};
  BoostConfig cfg;
  cfg.rounds = 5;
  cfg.min_child_weight = 0.0;
  EXPECT_DOUBLE_EQ(auc(predict_proba(fit_boosted(x, y, cfg), x), y), 1.0);
}

TEST(Boosted, ZeroRoundsPredictsPrior) {
  Rng rng(3);
  const Matrix x = random_matrix(10, 2, rng);
  const std::vector<int> y{1, 0, 0, 1, 0, 0, 0, 1, 0, 0};
  BoostConfig cfg;
  cfg.rounds = 0;
  for (double p : predict_proba(fit_boosted(x, y, cfg), x)) EXPECT_NEAR(p, 0.3, 1e-12);
}

TEST(Boosted, TrainingLossNeverIncreases) {
  const Dataset ds = noisy_two_class(150, 5);
  BoostConfig cfg;
  cfg.rounds = 40;
  std::vector<double> losses;
  fit_boosted(ds.features, ds.labels, cfg, [&](std::size_t, double l) { losses.push_back(l); });
  ASSERT_EQ(losses.size(), 41u);
  for (std::size_t i = 1; i < losses.size(); ++i) EXPECT_LE(losses[i], losses[i - 1] + 1e-12);
}

TEST(Boosted, HandTracedStump) {
  // x = 1..5, y = 0 0 1 1 1. Prior 0.6, so every row has g = p - y and
  // h = 0.24. Candidate gains (lambda = 1):
  //   split 1.5: 0.36/1.24 + 0        - 0.36/2.2 = 0.127
  //   split 2.5: 1.44/1.48 + 1.44/1.72 - 0.36/2.2 = 1.647
  //   split 3.5: 0.64/1.72 + 0.64/1.48 - 0.36/2.2 = 0.641
  //   split 4.5: 0.04/1.96 + 0.16/1.24 - 0.36/2.2 = -0.014
  // so the stump splits at 2.5 with leaves -0.1 * G / (H + 1).
  const Matrix x = Matrix::from_rows({{1}, {2}, {3}, {4}, {5}});
  const std::vector<int> y{0, 0, 1, 1, 1};
  BoostConfig cfg;
  cfg.rounds = 1;
  cfg.max_depth = 1;
  cfg.shrinkage = 0.1;
  cfg.lambda = 1.0;
  cfg.min_child_weight = 0.0;
  const BoostedTreesModel m = fit_boosted(x, y, cfg);
  EXPECT_NEAR(m.base_score, std::log(1.5), 1e-15);
  ASSERT_EQ(m.trees.size(), 1u);
  const RegressionTree& t = m.trees[0];
  ASSERT_EQ(t.nodes.size(), 3u);
  EXPECT_EQ(t.nodes[0].feature, 0);
  EXPECT_DOUBLE_EQ(t.nodes[0].threshold, 2.5);
  EXPECT_NEAR(t.nodes[static_cast<std::size_t>(t.nodes[0].left)].value, -0.1 * 1.2 / 1.48, 1e-12);
  EXPECT_NEAR(t.nodes[static_cast<std::size_t>(t.nodes[0].right)].value, 0.1 * 1.2 / 1.72, 1e-12);
  const auto p = predict_proba(m, x);
  const double low = 1.0 / (1.0 + std::exp(-(std::log(1.5) - 0.12 / 1.48)));
  const double high = 1.0 / (1.0 + std::exp(-(std::log(1.5) + 0.12 / 1.72)));
  const double expected[] = {low, low, high, high, high};
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(p[i], expected[i], 1e-12);
}

TEST(Boosted, MinChildWeightBlocksTinyLeaves) {
  const Matrix x = Matrix::from_rows({{1}, {2}, {3}, {4}, {5}});
  const std::vector<int> y{0, 0, 1, 1, 1};
  BoostConfig cfg;
  cfg.rounds = 1;
  // Every row carries hessian 0.24, so no child can reach weight 1.
  cfg.min_child_weight = 1.0;
  EXPECT_EQ(fit_boosted(x, y, cfg).trees[0].nodes.size(), 1u);
}

TEST(Boosted, DepthIsBounded) {
  const Dataset ds = noisy_two_class(100, 6);
  BoostConfig cfg;
  cfg.rounds = 5;
  cfg.max_depth = 2;
  for (const RegressionTree& t : fit_boosted(ds, cfg).trees) EXPECT_LE(t.depth(), 2u);
}

// ---------------------------------------------------------------------------
// Serialization

TEST(Serialization, LogisticRoundTrip) {
  const Dataset ds = noisy_two_class(40, 1);
  const LogisticModel m = fit_logistic(ds);
  std::stringstream ss;
  write_model(ss, m);
  const LogisticModel back = read_logistic(ss);
  EXPECT_EQ(back.weights, m.weights);
  EXPECT_EQ(back.bias, m.bias);
}

TEST(Serialization, BoostedRoundTrip) {
  const Dataset ds = noisy_two_class(60, 2);
  BoostConfig cfg;
  cfg.rounds = 8;
  const BoostedTreesModel m = fit_boosted(ds, cfg);
  std::stringstream ss;
  write_model(ss, m);
  const BoostedTreesModel back = read_boosted(ss);
  EXPECT_EQ(predict_proba(back, ds.features), predict_proba(m, ds.features));
}

TEST(Serialization, RejectsGarbage) {
  std::stringstream a("boosted 2 1 0 0.1\ntree 3\n0 0.5\nleaf 1\n");
  EXPECT_THROW(read_boosted(a), DataError);
  std::stringstream b("logistic 3 0\n1 2\n");
  EXPECT_THROW(read_logistic(b), DataError);
  std::stringstream c("boosted 1 1 0 0.1\ntree 3\n4 0.5\nleaf 1\nleaf 2\n");
  EXPECT_THROW(read_boosted(c), DataError);
}

// ---------------------------------------------------------------------------
// Probe

TEST(Probe, ShuffledCopyIsIndistinguishable) {
  Rng rng(7);
  const Matrix real = random_matrix(400, 2, rng);
  const auto order = shuffled_indices(400, rng);
  const double acc = probe_accuracy(real, take_rows(real, order));
  EXPECT_NEAR(acc, 0.5, 0.1);
}

TEST(Probe, DuplicateRowsShareAFold) {
  const Matrix x = Matrix::from_rows({{1, 1}, {2, 2}, {1, 1}, {3, 3}, {2, 2}, {4, 4}, {5, 5}});
  const std::vector<int> y{1, 1, 0, 1, 0, 0, 0};
  const auto folds = detail::grouped_folds(x, y, 3, 4);
  std::vector<std::size_t> fold_of(7);
  std::size_t seen = 0;
  for (const FoldSplit& f : folds) {
    for (std::size_t i : f.test) fold_of[i] = f.fold;
    seen += f.test.size();
    EXPECT_EQ(f.test.size() + f.train.size(), 7u);
  }
  EXPECT_EQ(seen, 7u);
  EXPECT_EQ(fold_of[0], fold_of[2]);
  EXPECT_EQ(fold_of[1], fold_of[4]);
}

TEST(Probe, LargeOffsetIsObvious) {
  Rng rng(8);
  const Matrix real = random_matrix(300, 2, rng);
  Matrix fake = random_matrix(300, 2, rng);
  for (double& v : fake.values()) v += 10.0;
  EXPECT_GE(probe_accuracy(real, fake), 0.95);
}

TEST(Probe, ResamplesGeneratedSide) {
  Rng rng(9);
  const Matrix real = random_matrix(60, 2, rng);
  const Matrix fake = random_matrix(20, 2, rng);
  const double a = probe_accuracy(real, fake);
  EXPECT_GE(a, 0.0);
  EXPECT_LE(a, 1.0);
  EXPECT_EQ(a, probe_accuracy(real, fake));
  EXPECT_THROW(probe_accuracy(real, Matrix(0, 2)), DataError);
  EXPECT_THROW(probe_accuracy(real, Matrix(3, 3)), ShapeError);
}

}  // namespace
}  // namespace fraudgan
