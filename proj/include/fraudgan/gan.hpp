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

// Adversarial oversamplers for tabular minority data.
//
// Four frameworks share one training loop and differ in two switches:
//
//   framework | discriminator head | losses                  | conditional
//   ----------+--------------------+-------------------------+------------
//   GAN       | sigmoid            | log loss, non-saturating| no
//   CGAN      | sigmoid            | log loss (halved for D) | yes
//   WGAN      | linear critic      | critic gap, clipping    | no
//   WCGAN     | linear critic      | critic gap, clipping    | yes
//
// Conditional variants append a one-hot condition block to the inputs of both
// networks; the same condition row is fed to G and to D for a given sample.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fraudgan/autodiff.hpp"
#include "fraudgan/data_io.hpp"
#include "fraudgan/matrix.hpp"
#include "fraudgan/models.hpp"
#include "fraudgan/neural.hpp"
#include "fraudgan/random.hpp"

namespace fraudgan {

enum class Framework { gan, cgan, wgan, wcgan };

inline const char* to_string(Framework f) {
  switch (f) {
    case Framework::gan: return "gan";
    case Framework::cgan: return "cgan";
    case Framework::wgan: return "wgan";
    case Framework::wcgan: return "wcgan";
  }
  return "?";
}

inline Framework parse_framework(const std::string& s) {
  if (s == "gan" || s == "GAN") return Framework::gan;
  if (s == "cgan" || s == "CGAN") return Framework::cgan;
  if (s == "wgan" || s == "WGAN") return Framework::wgan;
  if (s == "wcgan" || s == "WCGAN") return Framework::wcgan;
  throw ParameterError("unknown GAN framework '" + s + "' (expected gan, cgan, wgan, wcgan)");
}

inline bool is_conditional(Framework f) { return f == Framework::cgan || f == Framework::wcgan; }
inline bool is_wasserstein(Framework f) { return f == Framework::wgan || f == Framework::wcgan; }

struct GanConfig {
  Framework framework = Framework::gan;
  double learning_rate = 0.029;
  double dropout_rate = 0.5;
  std::size_t hidden_nodes = 85;
  std::size_t hidden_layers = 3;
  std::size_t noise_dim = 100;
  std::size_t batch_size = 64;
  // Discriminator updates per generator update.
  std::size_t critic_steps = 1;
  double clip_value = 0.01;
  std::size_t condition_classes = 2;
  std::size_t max_iterations = 5000;
  std::size_t probe_every = 100;
  double leaky_slope = 0.2;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 0;

  void validate() const {
    if (batch_size < 1) throw ParameterError("batch size must be >= 1");
    if (critic_steps < 1) throw ParameterError("discriminator steps per iteration must be >= 1");
    if (is_wasserstein(framework) && !(clip_value > 0.0)) {
      throw ParameterError("clip value must be > 0 for the WGAN family");
    }
    if (is_conditional(framework) && condition_classes < 2) {
      throw ParameterError("conditional frameworks need at least 2 condition classes");
    }
    if (hidden_nodes < 1 || hidden_layers < 1 || noise_dim < 1) {
      throw ParameterError("network widths must be >= 1");
    }
    if (!(learning_rate > 0.0)) throw ParameterError("learning rate must be > 0");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
      throw ParameterError("dropout rate must lie in [0, 1)");
    }
    if (probe_every < 1) throw ParameterError("probe cadence must be >= 1");
  }

  std::size_t condition_width() const { return is_conditional(framework) ? condition_classes : 0; }
};

// Tuned hyperparameters per framework (learning rate, dropout, hidden width),
// with the framework-family conventions for k, Adam betas and clipping.
inline GanConfig tuned_preset(Framework f) {
  GanConfig c;
  c.framework = f;
  switch (f) {
    case Framework::gan:
      c.learning_rate = 0.029;
      c.dropout_rate = 0.5;
      c.hidden_nodes = 85;
      break;
    case Framework::cgan:
      c.learning_rate = 0.036;
      c.dropout_rate = 0.4;
      c.hidden_nodes = 46;
      break;
    case Framework::wgan:
      c.learning_rate = 0.011;
      c.dropout_rate = 0.5;
      c.hidden_nodes = 63;
      break;
    case Framework::wcgan:
      c.learning_rate = 0.022;
      c.dropout_rate = 0.22;
      c.hidden_nodes = 5;
      break;
  }
  if (is_wasserstein(f)) {
    c.critic_steps = 5;
    c.adam_beta1 = 0.5;
    c.adam_beta2 = 0.9;
  } else {
    c.critic_steps = 1;
    c.adam_beta1 = 0.9;
    c.adam_beta2 = 0.999;
  }
  return c;
}

struct GanModel {
  GanConfig config;
  std::size_t data_width = 0;
  MlpSpec generator_spec;
  MlpSpec discriminator_spec;
  MlpParams generator;
  MlpParams discriminator;
  // Maps the network's standardized output space back to data space.
  Scaler scaler;
  // Relative frequency of each condition class in the training labels; used
  // to split mixed-condition generation.
  std::vector<double> condition_weights;
};

inline MlpSpec generator_spec(const GanConfig& c, std::size_t data_width) {
  MlpSpec s;
  s.layer_sizes.push_back(c.noise_dim + c.condition_width());
  for (std::size_t i = 0; i < c.hidden_layers; ++i) s.layer_sizes.push_back(c.hidden_nodes);
  s.layer_sizes.push_back(data_width);
  s.leaky_slope = c.leaky_slope;
  s.output = OutputActivation::linear;
  s.dropout_rate = 0.0;
  return s;
}

inline MlpSpec discriminator_spec(const GanConfig& c, std::size_t data_width) {
  MlpSpec s;
  s.layer_sizes.push_back(data_width + c.condition_width());
  for (std::size_t i = 0; i < c.hidden_layers; ++i) s.layer_sizes.push_back(c.hidden_nodes);
  s.layer_sizes.push_back(1);
  s.leaky_slope = c.leaky_slope;
  s.output = is_wasserstein(c.framework) ? OutputActivation::linear : OutputActivation::sigmoid;
  s.dropout_rate = c.dropout_rate;
  return s;
}

// Freshly initialized (untrained) model.
inline GanModel make_gan_model(const GanConfig& config, std::size_t data_width, Scaler scaler) {
  config.validate();
  if (data_width == 0) throw ParameterError("GAN data width must be >= 1");
  if (scaler.width() != data_width) throw ShapeError("scaler width differs from data width");
  GanModel m;
  m.config = config;
  m.data_width = data_width;
  m.generator_spec = generator_spec(config, data_width);
  m.discriminator_spec = discriminator_spec(config, data_width);
  m.generator = init_mlp(m.generator_spec, derive_seed(config.seed, 1));
  m.discriminator = init_mlp(m.discriminator_spec, derive_seed(config.seed, 2));
  m.scaler = std::move(scaler);
  if (is_conditional(config.framework)) {
    m.condition_weights.assign(config.condition_classes,
                               1.0 / static_cast<double>(config.condition_classes));
  }
  return m;
}

// ---------------------------------------------------------------------------
// Losses. Tape versions drive training; Matrix versions evaluate the same
// scalars directly.

// -mean log D(x) - mean log(1 - D(G(z))): the discriminator side of the
// minimax value function, written as a minimization.
inline Var d_loss_gan(Var d_real, Var d_fake) {
  Var real_term = mean(log(d_real));
  Var fake_term = mean(log(shift(scale(d_fake, -1.0), 1.0)));
  return scale(add(real_term, fake_term), -1.0);
}

inline double d_loss_gan(const Matrix& d_real, const Matrix& d_fake) {
  double r = 0.0, f = 0.0;
  for (double v : d_real.values()) r += guarded_log(v);
  for (double v : d_fake.values()) f += guarded_log(1.0 - v);
  return -r / static_cast<double>(d_real.size()) - f / static_cast<double>(d_fake.size());
}

// -mean log D(G(z)).
inline Var g_loss_nonsaturating(Var d_fake) { return scale(mean(log(d_fake)), -1.0); }

inline double g_loss_nonsaturating(const Matrix& d_fake) {
  double f = 0.0;
  for (double v : d_fake.values()) f += guarded_log(v);
  return -f / static_cast<double>(d_fake.size());
}

// mean log(1 - D(G(z))), the original (saturating) generator objective.
inline Var g_loss_saturating(Var d_fake) {
  return mean(log(shift(scale(d_fake, -1.0), 1.0)));
}

// Conditional discriminator cost: both sums share the 1/(2m) factor.
inline Var cgan_d_loss(Var d_real, Var d_fake) { return scale(d_loss_gan(d_real, d_fake), 0.5); }
inline double cgan_d_loss(const Matrix& d_real, const Matrix& d_fake) {
  return 0.5 * d_loss_gan(d_real, d_fake);
}

// Conditional generator cost: -(1/m) sum log D(G(z,y), y).
inline Var cgan_g_loss(Var d_fake) { return g_loss_nonsaturating(d_fake); }
inline double cgan_g_loss(const Matrix& d_fake) { return g_loss_nonsaturating(d_fake); }

// Critic minimizes -(mean f(x) - mean f(G(z))); both sums averaged by 1/m.
inline Var wgan_d_loss(Var f_real, Var f_fake) {
  return scale(sub(mean(f_real), mean(f_fake)), -1.0);
}
inline Var wgan_g_loss(Var f_fake) { return scale(mean(f_fake), -1.0); }

struct LossPair {
  double discriminator = 0.0;
  double generator = 0.0;
};

inline LossPair wgan_losses(const Matrix& f_real, const Matrix& f_fake) {
  return {-(mean(f_real) - mean(f_fake)), -mean(f_fake)};
}

inline Matrix conditional_input(const Matrix& x, const Matrix& onehot, std::size_t classes) {
  if (onehot.cols() != classes) {
    throw ShapeError("condition block has width " + std::to_string(onehot.cols()) +
                     ", model expects " + std::to_string(classes));
  }
  return hstack(x, onehot);
}

// Evaluates both conditional costs on one batch in eval mode:
//   J_D = -(1/2m) (sum log D(x_i, y_i) + sum log(1 - D(G(z_i, y_i), y_i)))
//   J_G = -(1/m) sum log D(G(z_i, y_i), y_i)
inline LossPair cgan_losses(const GanModel& model, const Matrix& x_scaled, const Matrix& y_onehot,
                            const Matrix& noise) {
  if (!is_conditional(model.config.framework)) {
    throw ParameterError("cgan_losses needs a conditional model");
  }
  const std::size_t classes = model.config.condition_classes;
  const Matrix fake = forward(model.generator, model.generator_spec,
                              conditional_input(noise, y_onehot, classes));
  const Matrix d_real = forward(model.discriminator, model.discriminator_spec,
                                conditional_input(x_scaled, y_onehot, classes));
  const Matrix d_fake = forward(model.discriminator, model.discriminator_spec,
                                conditional_input(fake, y_onehot, classes));
  return {cgan_d_loss(d_real, d_fake), cgan_g_loss(d_fake)};
}

// ---------------------------------------------------------------------------

inline void clip_weights_inplace(MlpParams& params, double c) {
  if (!(c > 0.0)) throw ParameterError("clip value must be > 0");
  for (auto* group : {&params.weights, &params.biases})
    for (Matrix& m : *group)
      for (double& v : m.values()) v = std::clamp(v, -c, c);
}

inline MlpParams clip_weights(MlpParams params, double c) {
  clip_weights_inplace(params, c);
  return params;
}

inline Matrix sample_noise(std::size_t count, std::size_t noise_dim, Rng& rng) {
  if (count < 1) throw ParameterError("sample_noise: count must be >= 1");
  Matrix z(count, noise_dim);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : z.values()) v = normal(rng);
  return z;
}

// ---------------------------------------------------------------------------
// Training

struct TrainRecord {
  std::size_t iteration = 0;
  double j_d = 0.0;
  double j_g = 0.0;
  std::optional<double> probe_accuracy;
};

struct TrainLog {
  std::vector<TrainRecord> records;
  std::optional<std::size_t> best_iteration;
};

inline void write_trainlog_csv(std::ostream& out, const TrainLog& log) {
  out << "iteration,j_d,j_g,probe_accuracy\n";
  for (const TrainRecord& r : log.records) {
    out << r.iteration << ',' << format_double(r.j_d) << ',' << format_double(r.j_g) << ',';
    if (r.probe_accuracy) out << format_double(*r.probe_accuracy);
    out << '\n';
  }
}

// Returns a probe accuracy in [0,1], or nothing to skip this checkpoint.
using ProbeFn = std::function<std::optional<double>(const GanModel&, std::size_t iteration)>;

struct TrainHooks {
  std::function<void(const GanModel&)> after_discriminator_update;
  std::function<void(const GanModel&)> after_generator_update;
};

namespace detail {

inline Matrix onehot_rows(std::span<const int> labels, std::span<const std::size_t> rows,
                          std::size_t classes) {
  std::vector<int> picked;
  picked.reserve(rows.size());
  for (std::size_t r : rows) picked.push_back(labels[r]);
  return one_hot(picked, classes);
}

inline std::vector<std::size_t> sample_rows(std::size_t n, std::size_t m, Rng& rng) {
  std::vector<std::size_t> rows(m);
  for (std::size_t& r : rows) r = uniform_index(rng, n);
  return rows;
}

}  // namespace detail

// Alternates `critic_steps` discriminator updates (each followed by weight
// clipping for the WGAN family) with one generator update per iteration.
// `data` must already be standardized; `labels` holds condition classes and
// is required for conditional frameworks. Iterations are numbered from 1 and
// the probe runs whenever iteration % probe_every == 0.
inline TrainLog train(GanModel& model, const Matrix& data, std::span<const int> labels = {},
                      const ProbeFn& probe = {}, const TrainHooks& hooks = {}) {
  const GanConfig& cfg = model.config;
  cfg.validate();
  if (data.cols() != model.data_width) {
    throw ShapeError("train: data has " + std::to_string(data.cols()) + " features, model " +
                     std::to_string(model.data_width));
  }
  const bool conditional = is_conditional(cfg.framework);
  const bool wasserstein = is_wasserstein(cfg.framework);
  if (conditional) {
    if (labels.size() != data.rows()) {
      throw ParameterError("conditional framework requires one condition label per row");
    }
    std::vector<double> counts(cfg.condition_classes, 0.0);
    for (int l : labels) {
      if (l < 0 || static_cast<std::size_t>(l) >= cfg.condition_classes) {
        throw ShapeError("condition label " + std::to_string(l) + " outside [0, " +
                         std::to_string(cfg.condition_classes) + ")");
      }
      counts[static_cast<std::size_t>(l)] += 1.0;
    }
    for (double& c : counts) c /= static_cast<double>(labels.size());
    model.condition_weights = counts;
  }
  TrainLog log;
  if (cfg.max_iterations == 0) return log;
  if (data.rows() == 0) throw DataError("train: no minority rows");

  const AdamConfig adam{cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_epsilon};
  AdamState d_state = AdamState::for_params(model.discriminator, adam);
  AdamState g_state = AdamState::for_params(model.generator, adam);
  Rng rng(derive_seed(cfg.seed, 3));
  const std::size_t m = cfg.batch_size;
  const std::size_t classes = cfg.condition_classes;

  for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
    double j_d = 0.0;
    for (std::size_t step = 0; step < cfg.critic_steps; ++step) {
      const auto rows = detail::sample_rows(data.rows(), m, rng);
      Matrix real = take_rows(data, rows);
      Matrix noise = sample_noise(m, cfg.noise_dim, rng);
      Matrix cond;
      if (conditional) {
        cond = detail::onehot_rows(labels, rows, classes);
        real = hstack(real, cond);
        noise = hstack(noise, cond);
      }
      Matrix fake = forward(model.generator, model.generator_spec, noise);
      if (conditional) fake = hstack(fake, cond);

      Tape tape;
      const MlpVars d_vars = bind(tape, model.discriminator, true);
      Var d_real = forward(d_vars, model.discriminator_spec, tape.constant(std::move(real)),
                           Mode::train, rng);
      Var d_fake = forward(d_vars, model.discriminator_spec, tape.constant(std::move(fake)),
                           Mode::train, rng);
      Var loss = wasserstein ? wgan_d_loss(d_real, d_fake)
                             : (conditional ? cgan_d_loss(d_real, d_fake)
                                            : d_loss_gan(d_real, d_fake));
      j_d = scalar(loss);
      if (!std::isfinite(j_d)) {
        throw TrainingDivergence("discriminator loss is not finite at iteration " +
                                     std::to_string(it),
                                 it);
      }
      tape.backward(loss);
      adam_step(model.discriminator, gradients(tape, d_vars), d_state);
      if (wasserstein) clip_weights_inplace(model.discriminator, cfg.clip_value);
      if (hooks.after_discriminator_update) hooks.after_discriminator_update(model);
    }

    Matrix noise = sample_noise(m, cfg.noise_dim, rng);
    Matrix cond;
    if (conditional) {
      cond = detail::onehot_rows(labels, detail::sample_rows(data.rows(), m, rng), classes);
      noise = hstack(noise, cond);
    }
    Tape tape;
    const MlpVars g_vars = bind(tape, model.generator, true);
    const MlpVars d_vars = bind(tape, model.discriminator, false);
    Var fake = forward(g_vars, model.generator_spec, tape.constant(std::move(noise)), Mode::eval,
                       rng);
    if (conditional) fake = concat_cols(fake, tape.constant(cond));
    Var d_fake = forward(d_vars, model.discriminator_spec, fake, Mode::train, rng);
    Var loss = wasserstein ? wgan_g_loss(d_fake) : g_loss_nonsaturating(d_fake);
    const double j_g = scalar(loss);
    if (!std::isfinite(j_g)) {
      throw TrainingDivergence("generator loss is not finite at iteration " + std::to_string(it),
                               it);
    }
    tape.backward(loss);
    adam_step(model.generator, gradients(tape, g_vars), g_state);
    if (hooks.after_generator_update) hooks.after_generator_update(model);

    TrainRecord rec{it, j_d, j_g, std::nullopt};
    if (probe && it % cfg.probe_every == 0) {
      rec.probe_accuracy = probe(model, it);
      if (rec.probe_accuracy && !(*rec.probe_accuracy >= 0.0 && *rec.probe_accuracy <= 1.0)) {
        throw ContractError("probe accuracy outside [0, 1]");
      }
    }
    log.records.push_back(rec);
  }
  return log;
}

// ---------------------------------------------------------------------------
// Generation

// `count` rows in data space. `condition` is required for conditional models
// and rejected otherwise.
inline Matrix generate(const GanModel& model, std::size_t count, std::optional<int> condition,
                       std::uint64_t seed) {
  const bool conditional = is_conditional(model.config.framework);
  if (conditional && !condition) {
    throw ParameterError("conditional model needs a condition class to generate");
  }
  if (!conditional && condition) {
    throw ParameterError("unconditional model does not take a condition class");
  }
  if (count == 0) return Matrix(0, model.data_width);
  Rng rng(seed);
  Matrix noise = sample_noise(count, model.config.noise_dim, rng);
  if (conditional) {
    const std::vector<int> labels(count, *condition);
    noise = hstack(noise, one_hot(labels, model.config.condition_classes));
  }
  return model.scaler.inverse_transform(forward(model.generator, model.generator_spec, noise));
}

// Largest-remainder split of `total` by `weights`; ties go to the lower index.
inline std::vector<std::size_t> apportion(std::size_t total, std::span<const double> weights) {
  double wsum = 0.0;
  for (double w : weights) wsum += w;
  std::vector<std::size_t> out(weights.size(), 0);
  if (weights.empty() || total == 0) return out;
  if (!(wsum > 0.0)) throw ParameterError("apportion: weights sum to zero");
  std::vector<std::pair<double, std::size_t>> rem;
  std::size_t used = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = static_cast<double>(total) * weights[i] / wsum;
    out[i] = static_cast<std::size_t>(std::floor(exact));
    used += out[i];
    rem.emplace_back(exact - std::floor(exact), i);
  }
  std::stable_sort(rem.begin(), rem.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; used < total; ++i, ++used) out[rem[i % rem.size()].second] += 1;
  return out;
}

// Unconditional models generate directly; conditional models split `count`
// across classes in proportion to the training label frequencies.
inline Matrix generate_mixed(const GanModel& model, std::size_t count, std::uint64_t seed) {
  if (!is_conditional(model.config.framework)) return generate(model, count, std::nullopt, seed);
  const auto per_class = apportion(count, model.condition_weights);
  Matrix out(0, model.data_width);
  for (std::size_t c = 0; c < per_class.size(); ++c) {
    if (per_class[c] == 0) continue;
    out = vstack(out, generate(model, per_class[c], static_cast<int>(c), derive_seed(seed, c)));
  }
  return out;
}

// Probe comparing `real` (data space) against as many generated rows.
inline ProbeFn make_probe(Matrix real, ProbeConfig config) {
  return [real = std::move(real), config](const GanModel& model,
                                          std::size_t iteration) -> std::optional<double> {
    const Matrix fake = generate_mixed(model, real.rows(), derive_seed(config.seed, iteration));
    if (!fake.all_finite()) return 1.0;
    return probe_accuracy(real, fake, config);
  };
}

// Earliest iteration with the lowest probe accuracy.
inline std::size_t select_stop_iteration(const TrainLog& log) {
  std::optional<std::size_t> best;
  double best_acc = 0.0;
  for (const TrainRecord& r : log.records) {
    if (!r.probe_accuracy) continue;
    if (!best || *r.probe_accuracy < best_acc) {
      best = r.iteration;
      best_acc = *r.probe_accuracy;
    }
  }
  if (!best) throw ContractError("select_stop_iteration: log has no probe records");
  return *best;
}

// Trains with the probe as stopping criterion: the model is left at the
// parameters it had at the selected iteration. Without probe records the final
// parameters are kept.
inline TrainLog train_with_stopping(GanModel& model, const Matrix& data,
                                    std::span<const int> labels, const ProbeFn& probe,
                                    const TrainHooks& hooks = {}) {
  std::optional<double> best_acc;
  MlpParams best_g = model.generator, best_d = model.discriminator;
  ProbeFn tracking = [&](const GanModel& m, std::size_t it) -> std::optional<double> {
    auto acc = probe ? probe(m, it) : std::nullopt;
    if (acc && (!best_acc || *acc < *best_acc)) {
      best_acc = acc;
      best_g = m.generator;
      best_d = m.discriminator;
    }
    return acc;
  };
  TrainLog log = train(model, data, labels, tracking, hooks);
  if (best_acc) {
    log.best_iteration = select_stop_iteration(log);
    model.generator = std::move(best_g);
    model.discriminator = std::move(best_d);
  }
  return log;
}

// ---------------------------------------------------------------------------
// Configuration as key=value text, shared with the CLI and model files.

inline std::map<std::string, std::string> to_key_values(const GanConfig& c) {
  return {
      {"framework", to_string(c.framework)},
      {"learning_rate", format_double(c.learning_rate)},
      {"dropout_rate", format_double(c.dropout_rate)},
      {"hidden_nodes", std::to_string(c.hidden_nodes)},
      {"hidden_layers", std::to_string(c.hidden_layers)},
      {"noise_dim", std::to_string(c.noise_dim)},
      {"batch_size", std::to_string(c.batch_size)},
      {"critic_steps", std::to_string(c.critic_steps)},
      {"clip_value", format_double(c.clip_value)},
      {"condition_classes", std::to_string(c.condition_classes)},
      {"max_iterations", std::to_string(c.max_iterations)},
      {"probe_every", std::to_string(c.probe_every)},
      {"leaky_slope", format_double(c.leaky_slope)},
      {"adam_beta1", format_double(c.adam_beta1)},
      {"adam_beta2", format_double(c.adam_beta2)},
      {"adam_epsilon", format_double(c.adam_epsilon)},
      {"seed", std::to_string(c.seed)},
  };
}

namespace detail {

inline double parse_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  if (!parse_double(v, out)) throw ParameterError("'" + key + "' expects a number, got '" + v + "'");
  return out;
}

inline std::uint64_t parse_count(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ParameterError("'" + key + "' expects a non-negative integer, got '" + v + "'");
  }
  return out;
}

}  // namespace detail

// Applies recognized keys onto `c`; returns false for keys it does not know.
inline bool apply_key_value(GanConfig& c, const std::string& key, const std::string& value) {
  using detail::parse_count;
  using detail::parse_real;
  if (key == "framework") c.framework = parse_framework(value);
  else if (key == "learning_rate") c.learning_rate = parse_real(key, value);
  else if (key == "dropout_rate") c.dropout_rate = parse_real(key, value);
  else if (key == "hidden_nodes") c.hidden_nodes = parse_count(key, value);
  else if (key == "hidden_layers") c.hidden_layers = parse_count(key, value);
  else if (key == "noise_dim") c.noise_dim = parse_count(key, value);
  else if (key == "batch_size") c.batch_size = parse_count(key, value);
  else if (key == "critic_steps") c.critic_steps = parse_count(key, value);
  else if (key == "clip_value") c.clip_value = parse_real(key, value);
  else if (key == "condition_classes") c.condition_classes = parse_count(key, value);
  else if (key == "max_iterations") c.max_iterations = parse_count(key, value);
  else if (key == "probe_every") c.probe_every = parse_count(key, value);
  else if (key == "leaky_slope") c.leaky_slope = parse_real(key, value);
  else if (key == "adam_beta1") c.adam_beta1 = parse_real(key, value);
  else if (key == "adam_beta2") c.adam_beta2 = parse_real(key, value);
  else if (key == "adam_epsilon") c.adam_epsilon = parse_real(key, value);
  else if (key == "seed") c.seed = parse_count(key, value);
  else return false;
  return true;
}

// Model file: a config header block, the scaler, then generator and
// discriminator parameters in the MLP layer format.
//
//   fraudgan-gan 1
//   <key>=<value> lines
//   data_width <d>
//   scaler_mean <d values>
//   scaler_stddev <d values>
//   condition_weights <n> <n values>
//   generator <layer count>
//   layer ...
//   discriminator <layer count>
//   layer ...
inline void write_gan_model(std::ostream& out, const GanModel& m) {
  out << "fraudgan-gan 1\n";
  for (const auto& [k, v] : to_key_values(m.config)) out << k << '=' << v << '\n';
  out << "data_width " << m.data_width << '\n';
  out << "scaler_mean";
  for (double v : m.scaler.mean) out << ' ' << format_double(v);
  out << "\nscaler_stddev";
  for (double v : m.scaler.stddev) out << ' ' << format_double(v);
  out << "\ncondition_weights " << m.condition_weights.size();
  for (double v : m.condition_weights) out << ' ' << format_double(v);
  out << "\ngenerator " << m.generator.weights.size() << '\n';
  write_mlp(out, m.generator);
  out << "discriminator " << m.discriminator.weights.size() << '\n';
  write_mlp(out, m.discriminator);
}

inline GanModel read_gan_model(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "fraudgan-gan 1") {
    throw DataError("not a fraudgan GAN model file");
  }
  GanConfig cfg;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      std::istringstream ls(line);
      std::string tag;
      ls >> tag;
      if (tag != "data_width" || !(ls >> width)) throw DataError("malformed model header: " + line);
      break;
    }
    if (!apply_key_value(cfg, line.substr(0, eq), line.substr(eq + 1))) {
      throw DataError("unknown model config key '" + line.substr(0, eq) + "'");
    }
  }
  std::string tag;
  Scaler scaler;
  scaler.mean.resize(width);
  scaler.stddev.resize(width);
  scaler.constant.assign(width, false);
  if (!(in >> tag) || tag != "scaler_mean") throw DataError("missing scaler_mean");
  for (double& v : scaler.mean)
    if (!(in >> v)) throw DataError("truncated scaler_mean");
  if (!(in >> tag) || tag != "scaler_stddev") throw DataError("missing scaler_stddev");
  for (double& v : scaler.stddev)
    if (!(in >> v)) throw DataError("truncated scaler_stddev");
  std::size_t n = 0;
  if (!(in >> tag >> n) || tag != "condition_weights") throw DataError("missing condition_weights");
  std::vector<double> weights(n);
  for (double& v : weights)
    if (!(in >> v)) throw DataError("truncated condition_weights");

  GanModel m = make_gan_model(cfg, width, scaler);
  m.condition_weights = weights;
  std::size_t layers = 0;
  if (!(in >> tag >> layers) || tag != "generator") throw DataError("missing generator block");
  m.generator = read_mlp(in, layers);
  if (!(in >> tag >> layers) || tag != "discriminator") {
    throw DataError("missing discriminator block");
  }
  m.discriminator = read_mlp(in, layers);
  check_params(m.generator, m.generator_spec);
  check_params(m.discriminator, m.discriminator_spec);
  return m;
}

}  // namespace fraudgan
