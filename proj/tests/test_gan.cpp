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
#include <string>

#include "fraudgan/gan.hpp"
#include "support.hpp"

namespace fraudgan {
namespace {

using testing::random_matrix;
using testing::uniform_matrix;

const double kLog2 = std::log(2.0);

Matrix filled(std::size_t r, std::size_t c, double v) {
  Matrix m(r, c);
  for (double& x : m.values()) x = v;
  return m;
}

double column_mean(const Matrix& m, std::size_t c) {
  double s = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r) s += m(r, c);
  return s / static_cast<double>(m.rows());
}

double column_var(const Matrix& m, std::size_t c) {
  const double mu = column_mean(m, c);
  double s = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r) s += (m(r, c) - mu) * (m(r, c) - mu);
  return s / static_cast<double>(m.rows());
}

GanConfig small_wgan(std::uint64_t seed = 0) {
  GanConfig c = tuned_preset(Framework::wgan);
  c.hidden_nodes = 16;
  c.noise_dim = 4;
  c.batch_size = 32;
  c.max_iterations = 20;
  c.seed = seed;
  return c;
}

// N(3, 1) in one column.
Matrix normal_column(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> d(3.0, 1.0);
  Matrix m(n, 1);
  for (double& v : m.values()) v = d(rng);
  return m;
}

// Discriminator whose output layer is all zeros: D = sigmoid(0) = 0.5.
void neutralize_output(MlpParams& d) {
  for (double& v : d.weights.back().values()) v = 0.0;
  for (double& v : d.biases.back().values()) v = 0.0;
}

// ---------------------------------------------------------------------------

TEST(Presets, TunedValues) {
  const GanConfig g = tuned_preset(Framework::gan);
  EXPECT_DOUBLE_EQ(g.learning_rate, 0.029);
  EXPECT_DOUBLE_EQ(g.dropout_rate, 0.5);
  EXPECT_EQ(g.hidden_nodes, 85u);
  const GanConfig c = tuned_preset(Framework::cgan);
  EXPECT_DOUBLE_EQ(c.learning_rate, 0.036);
  EXPECT_DOUBLE_EQ(c.dropout_rate, 0.4);
  EXPECT_EQ(c.hidden_nodes, 46u);
  const GanConfig w = tuned_preset(Framework::wgan);
  EXPECT_DOUBLE_EQ(w.learning_rate, 0.011);
  EXPECT_DOUBLE_EQ(w.dropout_rate, 0.5);
  EXPECT_EQ(w.hidden_nodes, 63u);
  EXPECT_EQ(w.critic_steps, 5u);
  const GanConfig wc = tuned_preset(Framework::wcgan);
  EXPECT_DOUBLE_EQ(wc.learning_rate, 0.022);
  EXPECT_DOUBLE_EQ(wc.dropout_rate, 0.22);
  EXPECT_EQ(wc.hidden_nodes, 5u);
  EXPECT_EQ(g.critic_steps, 1u);
}

TEST(Presets, ValidationRejectsBadValues) {
  GanConfig c = small_wgan();
  c.clip_value = 0.0;
  EXPECT_THROW(c.validate(), ParameterError);
  c = tuned_preset(Framework::cgan);
  c.condition_classes = 1;
  EXPECT_THROW(c.validate(), ParameterError);
  c = small_wgan();
  c.dropout_rate = 1.0;
  EXPECT_THROW(c.validate(), ParameterError);
}

TEST(Noise, MomentsWithinThreeSigma) {
  Rng rng(5);
  const Matrix z = sample_noise(10000, 1, rng);
  const double n = 1e4;
  EXPECT_LT(std::abs(column_mean(z, 0)), 3.0 / std::sqrt(n));
  EXPECT_LT(std::abs(column_var(z, 0) - 1.0), 3.0 * std::sqrt(2.0 / n));
}

TEST(Noise, DeterministicAndShaped) {
  Rng a(9), b(9);
  const Matrix za = sample_noise(7, 3, a);
  EXPECT_EQ(za, sample_noise(7, 3, b));
  EXPECT_EQ(za.rows(), 7u);
  EXPECT_EQ(za.cols(), 3u);
  EXPECT_THROW(sample_noise(0, 3, a), ParameterError);
}

// ---------------------------------------------------------------------------
// Losses

TEST(Losses, GanDiscriminatorAtHalfIsTwoLog2) {
  EXPECT_NEAR(d_loss_gan(filled(8, 1, 0.5), filled(8, 1, 0.5)), 2.0 * kLog2, 1e-15);
}

TEST(Losses, GanDiscriminatorPerfectIsNearZero) {
  EXPECT_LT(d_loss_gan(filled(8, 1, 1.0 - 1e-12), filled(8, 1, 1e-12)), 1e-10);
}

TEST(Losses, GanDiscriminatorMatchesDirectSum) {
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const Matrix r = uniform_matrix(11, 1, rng, 0.01, 0.99);
    const Matrix f = uniform_matrix(11, 1, rng, 0.01, 0.99);
    double s = 0.0;
    for (std::size_t i = 0; i < 11; ++i) s += std::log(r[i]) + std::log(1.0 - f[i]);
    EXPECT_NEAR(d_loss_gan(r, f), -s / 11.0, 1e-12);

    Tape tape;
    EXPECT_NEAR(scalar(d_loss_gan(tape.constant(r), tape.constant(f))), -s / 11.0, 1e-12);
  }
}

TEST(Losses, NonSaturatingGenerator) {
  EXPECT_LT(g_loss_nonsaturating(filled(4, 1, 1.0 - 1e-12)), 1e-10);
  EXPECT_NEAR(g_loss_nonsaturating(filled(4, 1, 0.5)), kLog2, 1e-15);
}

TEST(Losses, NonSaturatingGradientDominatesWhenFakeIsRejected) {
  const Matrix d = filled(4, 1, 1e-3);
  Tape t1;
  Var a = t1.variable(d);
  t1.backward(g_loss_nonsaturating(a));
  Tape t2;
  Var b = t2.variable(d);
  t2.backward(g_loss_saturating(b));
  EXPECT_GT(std::abs(t1.grad(a)[0]), 100.0 * std::abs(t2.grad(b)[0]));
}

TEST(Losses, ConditionalSingleClassHalvesGanCost) {
  // With one condition class the one-hot block is constant and the
  // conditional cost reduces to half the plain discriminator cost.
  Rng rng(8);
  const Matrix r = uniform_matrix(6, 1, rng, 0.05, 0.95);
  const Matrix f = uniform_matrix(6, 1, rng, 0.05, 0.95);
  EXPECT_NEAR(cgan_d_loss(r, f), 0.5 * d_loss_gan(r, f), 1e-15);
}

GanModel small_cgan(std::size_t width, std::uint64_t seed) {
  GanConfig c = tuned_preset(Framework::cgan);
  c.hidden_nodes = 8;
  c.noise_dim = 3;
  c.condition_classes = 2;
  c.dropout_rate = 0.0;
  c.seed = seed;
  return make_gan_model(c, width, Scaler::identity(width));
}

TEST(Losses, ConditionalAtHalfIsLog2Pair) {
  GanModel m = small_cgan(3, 1);
  neutralize_output(m.discriminator);
  Rng rng(2);
  const Matrix x = random_matrix(5, 3, rng);
  const Matrix z = random_matrix(5, 3, rng);
  const Matrix y = one_hot(std::vector<int>{0, 1, 1, 0, 1}, 2);
  const LossPair p = cgan_losses(m, x, y, z);
  EXPECT_NEAR(p.discriminator, kLog2, 1e-15);
  EXPECT_NEAR(p.generator, kLog2, 1e-15);
}

TEST(Losses, ConditionalMatchesSummation) {
  const GanModel m = small_cgan(3, 4);
  Rng rng(6);
  const Matrix x = random_matrix(7, 3, rng);
  const Matrix z = random_matrix(7, 3, rng);
  const Matrix y = one_hot(std::vector<int>{0, 1, 1, 0, 1, 0, 0}, 2);
  const Matrix fake = forward(m.generator, m.generator_spec, hstack(z, y));
  const Matrix dr = forward(m.discriminator, m.discriminator_spec, hstack(x, y));
  const Matrix df = forward(m.discriminator, m.discriminator_spec, hstack(fake, y));
  double jd = 0.0, jg = 0.0;
  for (std::size_t i = 0; i < 7; ++i) {
    jd += std::log(dr[i]) + std::log(1.0 - df[i]);
    jg += std::log(df[i]);
  }
  const LossPair p = cgan_losses(m, x, y, z);
  EXPECT_NEAR(p.discriminator, -jd / 14.0, 1e-12);
  EXPECT_NEAR(p.generator, -jg / 7.0, 1e-12);
}

TEST(Losses, ConditionalLabelWidthMismatch) {
  const GanModel m = small_cgan(3, 4);
  Rng rng(6);
  const Matrix x = random_matrix(2, 3, rng);
  EXPECT_THROW(cgan_losses(m, x, one_hot(std::vector<int>{0, 2}, 3), x), ShapeError);
}

TEST(Losses, WassersteinValues) {
  EXPECT_DOUBLE_EQ(wgan_losses(filled(4, 1, 0.3), filled(4, 1, 0.3)).discriminator, 0.0);
  const LossPair p = wgan_losses(filled(4, 1, 1.0), filled(4, 1, -1.0));
  EXPECT_DOUBLE_EQ(p.discriminator, -2.0);
  EXPECT_DOUBLE_EQ(p.generator, 1.0);

  Rng rng(12);
  const Matrix r = random_matrix(9, 1, rng), f = random_matrix(9, 1, rng);
  double sr = 0.0, sf = 0.0;
  for (std::size_t i = 0; i < 9; ++i) {
    sr += r[i];
    sf += f[i];
  }
  EXPECT_NEAR(wgan_losses(r, f).discriminator, -(sr / 9.0 - sf / 9.0), 1e-12);
  EXPECT_NEAR(wgan_losses(r, f).generator, -sf / 9.0, 1e-12);
  Tape tape;
  EXPECT_NEAR(scalar(wgan_d_loss(tape.constant(r), tape.constant(f))), -(sr - sf) / 9.0, 1e-12);
}

TEST(Clip, BoundsAndIdempotence) {
  MlpParams p = init_mlp(MlpSpec{{3, 5, 1}}, 1);
  p.weights[0](0, 0) = 0.7;
  p.biases[0](0, 0) = -0.4;
  const MlpParams once = clip_weights(p, 0.01);
  EXPECT_DOUBLE_EQ(once.weights[0](0, 0), 0.01);
  EXPECT_DOUBLE_EQ(once.biases[0](0, 0), -0.01);
  EXPECT_EQ(clip_weights(once, 0.01), once);
  EXPECT_THROW(clip_weights(p, 0.0), ParameterError);
}

// ---------------------------------------------------------------------------
// Training

TEST(Train, ZeroIterationsLeavesModelUntouched) {
  GanConfig c = small_wgan();
  c.max_iterations = 0;
  GanModel m = make_gan_model(c, 1, Scaler::identity(1));
  const GanModel before = m;
  const TrainLog log = train(m, normal_column(50, 1));
  EXPECT_TRUE(log.records.empty());
  EXPECT_EQ(m.generator, before.generator);
  EXPECT_EQ(m.discriminator, before.discriminator);
}

TEST(Train, CriticStaysClippedAfterEveryUpdate) {
  GanConfig c = small_wgan(3);
  c.clip_value = 0.02;
  GanModel m = make_gan_model(c, 1, Scaler::identity(1));
  std::size_t checks = 0;
  TrainHooks hooks;
  hooks.after_discriminator_update = [&](const GanModel& g) {
    for (const auto* group : {&g.discriminator.weights, &g.discriminator.biases})
      for (const Matrix& w : *group)
        for (double v : w.values()) ASSERT_LE(std::abs(v), 0.02);
    ++checks;
  };
  train(m, normal_column(100, 2), {}, {}, hooks);
  EXPECT_EQ(checks, c.max_iterations * c.critic_steps);
}

TEST(Train, UpdateScheduleIsKCriticStepsThenOneGeneratorStep) {
  for (Framework f : {Framework::gan, Framework::wgan}) {
    GanConfig c = small_wgan(4);
    c.framework = f;
    c.critic_steps = f == Framework::wgan ? 5 : 1;
    c.max_iterations = 6;
    GanModel m = make_gan_model(c, 1, Scaler::identity(1));
    std::string seq;
    TrainHooks hooks;
    hooks.after_discriminator_update = [&](const GanModel&) { seq += 'D'; };
    hooks.after_generator_update = [&](const GanModel&) { seq += 'G'; };
    train(m, normal_column(100, 2), {}, {}, hooks);
    std::string expected;
    for (std::size_t i = 0; i < c.max_iterations; ++i)
      expected += std::string(c.critic_steps, 'D') + "G";
    EXPECT_EQ(seq, expected) << to_string(f);
  }
}

TEST(Train, BitForBitReproducible) {
  for (Framework f : {Framework::gan, Framework::cgan, Framework::wgan, Framework::wcgan}) {
    GanConfig c = small_wgan(11);
    c.framework = f;
    const Matrix data = normal_column(80, 5);
    std::vector<int> labels;
    if (is_conditional(f))
      for (std::size_t i = 0; i < 80; ++i) labels.push_back(static_cast<int>(i % 2));
    GanModel a = make_gan_model(c, 1, Scaler::identity(1));
    GanModel b = make_gan_model(c, 1, Scaler::identity(1));
    const TrainLog la = train(a, data, labels);
    const TrainLog lb = train(b, data, labels);
    EXPECT_EQ(a.generator, b.generator) << to_string(f);
    EXPECT_EQ(a.discriminator, b.discriminator) << to_string(f);
    ASSERT_EQ(la.records.size(), lb.records.size());
    for (std::size_t i = 0; i < la.records.size(); ++i) {
      EXPECT_EQ(la.records[i].j_d, lb.records[i].j_d);
      EXPECT_EQ(la.records[i].j_g, lb.records[i].j_g);
    }
  }
}

TEST(Train, ConditionalNeedsLabels) {
  GanConfig c = small_wgan();
  c.framework = Framework::wcgan;
  GanModel m = make_gan_model(c, 1, Scaler::identity(1));
  EXPECT_THROW(train(m, normal_column(10, 1)), ParameterError);
}

TEST(Train, WidthMismatchIsShapeError) {
  GanModel m = make_gan_model(small_wgan(), 2, Scaler::identity(2));
  EXPECT_THROW(train(m, normal_column(10, 1)), ShapeError);
}

// WGAN on a 1-D N(3, 1) sample. The generator works in standardized space
// with the fitted scaler mapping back, as in the experiment pipeline.
class OneDimensionalWgan : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const Matrix data = normal_column(2000, 21);
    GanConfig c = tuned_preset(Framework::wgan);
    c.learning_rate = 0.003;
    c.clip_value = 0.02;
    c.noise_dim = 10;
    c.hidden_nodes = 32;
    c.max_iterations = 3000;
    c.seed = 3;
    Scaler s = Scaler::fit(data);
    model_ = new GanModel(make_gan_model(c, 1, s));
    log_ = new TrainLog(train(*model_, s.transform(data)));
  }
  static void TearDownTestSuite() {
    delete model_;
    delete log_;
  }
  static GanModel* model_;
  static TrainLog* log_;
};

GanModel* OneDimensionalWgan::model_ = nullptr;
TrainLog* OneDimensionalWgan::log_ = nullptr;

TEST_F(OneDimensionalWgan, GeneratedMomentsMatchTarget) {
  const Matrix g = generate(*model_, 10000, std::nullopt, 77);
  EXPECT_NEAR(column_mean(g, 0), 3.0, 0.5);
  EXPECT_GE(column_var(g, 0), 0.3);
  EXPECT_LE(column_var(g, 0), 3.0);
}

TEST_F(OneDimensionalWgan, CriticLossMagnitudeShrinks) {
  // Single iterations are noisy, so compare 100-iteration means of |J_D|.
  ASSERT_EQ(log_->records.size(), 3000u);
  double early = 0.0, late = 0.0;
  for (std::size_t i = 0; i < 100; ++i) {
    early += std::abs(log_->records[i].j_d);
    late += std::abs(log_->records[2900 + i].j_d);
  }
  EXPECT_LE(late, early);
}

// ---------------------------------------------------------------------------
// Generation

TEST(Generate, EmptyAndWidth) {
  const GanModel m = make_gan_model(small_wgan(), 4, Scaler::identity(4));
  const Matrix none = generate(m, 0, std::nullopt, 1);
  EXPECT_EQ(none.rows(), 0u);
  EXPECT_EQ(none.cols(), 4u);
  EXPECT_EQ(generate(m, 9, std::nullopt, 1).cols(), 4u);
  EXPECT_EQ(generate(m, 9, std::nullopt, 1), generate(m, 9, std::nullopt, 1));
}

TEST(Generate, UntrainedModelIsFarFromTarget) {
  GanConfig c = tuned_preset(Framework::wgan);
  c.seed = 1;
  const GanModel m = make_gan_model(c, 1, Scaler::identity(1));
  const Matrix g = generate(m, 10000, std::nullopt, 2);
  EXPECT_GT(std::abs(column_mean(g, 0) - 3.0), 2.0);
}

TEST(Generate, ConditionRules) {
  const GanModel cond = small_cgan(2, 1);
  EXPECT_THROW(generate(cond, 3, std::nullopt, 1), ParameterError);
  EXPECT_EQ(generate(cond, 3, 1, 1).rows(), 3u);
  const GanModel plain = make_gan_model(small_wgan(), 2, Scaler::identity(2));
  EXPECT_THROW(generate(plain, 3, 0, 1), ParameterError);
}

TEST(Generate, MixedFollowsConditionWeights) {
  GanModel cond = small_cgan(2, 1);
  cond.condition_weights = {0.25, 0.75};
  EXPECT_EQ(generate_mixed(cond, 8, 3).rows(), 8u);
  const std::vector<double> w{0.25, 0.75};
  EXPECT_EQ(apportion(8, w), (std::vector<std::size_t>{2, 6}));
  const std::vector<double> thirds{1.0, 1.0, 1.0};
  EXPECT_EQ(apportion(10, thirds), (std::vector<std::size_t>{4, 3, 3}));
}

// ---------------------------------------------------------------------------

TEST(StopRule, KeepsParametersAtLowestProbe) {
  GanConfig c = small_wgan(2);
  c.max_iterations = 5;
  c.probe_every = 1;
  GanModel m = make_gan_model(c, 1, Scaler::identity(1));
  const double acc[] = {0.9, 0.7, 0.6, 0.8, 0.65};
  MlpParams at3;
  ProbeFn probe = [&](const GanModel& g, std::size_t it) -> std::optional<double> {
    if (it == 3) at3 = g.generator;
    return acc[it - 1];
  };
  const TrainLog log = train_with_stopping(m, normal_column(50, 1), {}, probe);
  ASSERT_TRUE(log.best_iteration.has_value());
  EXPECT_EQ(*log.best_iteration, 3u);
  EXPECT_EQ(m.generator, at3);
}

TEST(Serialization, GanModelRoundTrip) {
  GanModel m = small_cgan(3, 9);
  m.scaler = Scaler{{1.5, -2.0, 0.25}, {2.0, 0.5, 1.0}, {false, false, true}};
  m.condition_weights = {0.3, 0.7};
  std::stringstream ss;
  write_gan_model(ss, m);
  const GanModel back = read_gan_model(ss);
  EXPECT_EQ(back.generator, m.generator);
  EXPECT_EQ(back.discriminator, m.discriminator);
  EXPECT_EQ(back.scaler.mean, m.scaler.mean);
  EXPECT_EQ(back.scaler.stddev, m.scaler.stddev);
  EXPECT_EQ(back.condition_weights, m.condition_weights);
  EXPECT_EQ(to_key_values(back.config), to_key_values(m.config));
  EXPECT_EQ(generate(back, 5, 0, 4), generate(m, 5, 0, 4));
}

TEST(Serialization, RejectsForeignFile) {
  std::stringstream ss("logistic 3 0\n1 2 3\n");
  EXPECT_THROW(read_gan_model(ss), DataError);
}

}  // namespace
}  // namespace fraudgan
