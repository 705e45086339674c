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

// Multilayer perceptrons: construction, forward pass with inverted dropout,
// Adam, and the binary cross-entropy loss.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "fraudgan/autodiff.hpp"
#include "fraudgan/matrix.hpp"
#include "fraudgan/random.hpp"

namespace fraudgan {

enum class OutputActivation { sigmoid, linear };

struct MlpSpec {
  // input width, one or more hidden widths, output width.
  std::vector<std::size_t> layer_sizes;
  double leaky_slope = 0.2;
  OutputActivation output = OutputActivation::sigmoid;
  // Applied to hidden activations in train mode only.
  double dropout_rate = 0.0;

  std::size_t input_width() const { return layer_sizes.front(); }
  std::size_t output_width() const { return layer_sizes.back(); }
  std::size_t layer_count() const { return layer_sizes.size() - 1; }

  void validate() const {
    if (layer_sizes.size() < 3) {
      throw ParameterError("MlpSpec needs input, at least one hidden layer, and output");
    }
    for (std::size_t w : layer_sizes) {
      if (w == 0) throw ParameterError("MlpSpec layer width must be positive");
    }
    if (!(leaky_slope > 0.0)) throw ParameterError("leaky-relu slope must be > 0");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
      throw ParameterError("dropout rate must lie in [0, 1)");
    }
  }
};

struct MlpParams {
  std::vector<Matrix> weights;  // weights[i] is (layer_sizes[i] x layer_sizes[i+1])
  std::vector<Matrix> biases;   // biases[i] is (1 x layer_sizes[i+1])

  friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

// Gradients share the parameter layout.
using MlpGrads = MlpParams;

inline void check_params(const MlpParams& params, const MlpSpec& spec) {
  if (params.weights.size() != spec.layer_count() || params.biases.size() != spec.layer_count()) {
    throw ShapeError("MlpParams layer count does not match spec");
  }
  for (std::size_t i = 0; i < spec.layer_count(); ++i) {
    const Matrix& w = params.weights[i];
    const Matrix& b = params.biases[i];
    if (w.rows() != spec.layer_sizes[i] || w.cols() != spec.layer_sizes[i + 1] ||
        b.rows() != 1 || b.cols() != spec.layer_sizes[i + 1]) {
      throw ShapeError("layer " + std::to_string(i) + " has weights " + w.shape_string() +
                       " and bias " + b.shape_string() + ", inconsistent with spec");
    }
  }
}

// He-style uniform initialization: U(-sqrt(6/fan_in), sqrt(6/fan_in)), zero
// biases.
inline MlpParams init_mlp(const MlpSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  MlpParams params;
  for (std::size_t i = 0; i < spec.layer_count(); ++i) {
    const std::size_t fan_in = spec.layer_sizes[i];
    const std::size_t fan_out = spec.layer_sizes[i + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Matrix w(fan_in, fan_out);
    for (double& v : w.values()) v = dist(rng);
    params.weights.push_back(std::move(w));
    params.biases.emplace_back(1, fan_out);
  }
  return params;
}

enum class Mode { train, eval };

// Parameters registered on a tape.
struct MlpVars {
  std::vector<Var> weights;
  std::vector<Var> biases;
};

// trainable = false records the parameters as constants, which keeps the
// backward pass from flowing into a network that is not being updated.
inline MlpVars bind(Tape& tape, const MlpParams& params, bool trainable) {
  MlpVars vars;
  for (std::size_t i = 0; i < params.weights.size(); ++i) {
    vars.weights.push_back(trainable ? tape.variable(params.weights[i])
                                     : tape.constant(params.weights[i]));
    vars.biases.push_back(trainable ? tape.variable(params.biases[i])
                                    : tape.constant(params.biases[i]));
  }
  return vars;
}

inline MlpGrads gradients(const Tape& tape, const MlpVars& vars) {
  MlpGrads g;
  for (std::size_t i = 0; i < vars.weights.size(); ++i) {
    g.weights.push_back(tape.grad(vars.weights[i]));
    g.biases.push_back(tape.grad(vars.biases[i]));
  }
  return g;
}

inline Matrix dropout_mask(std::size_t rows, std::size_t cols, double rate, Rng& rng) {
  Matrix mask(rows, cols);
  const double keep_scale = 1.0 / (1.0 - rate);
  std::bernoulli_distribution keep(1.0 - rate);
  for (double& v : mask.values()) v = keep(rng) ? keep_scale : 0.0;
  return mask;
}

inline Var forward(const MlpVars& vars, const MlpSpec& spec, Var input, Mode mode, Rng& rng) {
  if (input.cols() != spec.input_width()) {
    throw ShapeError("forward: batch has " + std::to_string(input.cols()) +
                     " columns, network expects " + std::to_string(spec.input_width()));
  }
  Tape& tape = input.tape();
  Var h = input;
  const std::size_t layers = spec.layer_count();
  for (std::size_t i = 0; i < layers; ++i) {
    h = add_row(matmul(h, vars.weights[i]), vars.biases[i]);
    if (i + 1 < layers) {
      h = leaky_relu(h, spec.leaky_slope);
      if (mode == Mode::train && spec.dropout_rate > 0.0) {
        h = mul(h, tape.constant(dropout_mask(h.rows(), h.cols(), spec.dropout_rate, rng)));
      }
    }
  }
  if (spec.output == OutputActivation::sigmoid) h = sigmoid(h);
  return h;
}

// Tape-free forward for inference and evaluation.
inline Matrix forward(const MlpParams& params, const MlpSpec& spec, const Matrix& batch,
                      Mode mode = Mode::eval, std::uint64_t seed = 0) {
  check_params(params, spec);
  if (batch.cols() != spec.input_width()) {
    throw ShapeError("forward: batch has " + std::to_string(batch.cols()) +
                     " columns, network expects " + std::to_string(spec.input_width()));
  }
  Rng rng(seed);
  Matrix h = batch;
  const std::size_t layers = spec.layer_count();
  for (std::size_t i = 0; i < layers; ++i) {
    h = add_row(matmul(h, params.weights[i]), params.biases[i]);
    if (i + 1 < layers) {
      const double slope = spec.leaky_slope;
      for (double& v : h.values()) v = v > 0.0 ? v : slope * v;
      if (mode == Mode::train && spec.dropout_rate > 0.0) {
        h = hadamard(h, dropout_mask(h.rows(), h.cols(), spec.dropout_rate, rng));
      }
    }
  }
  if (spec.output == OutputActivation::sigmoid) {
    for (double& v : h.values()) v = stable_sigmoid(v);
  }
  return h;
}

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  MlpParams first_moment;
  MlpParams second_moment;
  std::uint64_t step = 0;

  static AdamState for_params(const MlpParams& params, AdamConfig config) {
    AdamState s;
    s.config = config;
    for (const Matrix& w : params.weights) {
      s.first_moment.weights.emplace_back(w.rows(), w.cols());
      s.second_moment.weights.emplace_back(w.rows(), w.cols());
    }
    for (const Matrix& b : params.biases) {
      s.first_moment.biases.emplace_back(b.rows(), b.cols());
      s.second_moment.biases.emplace_back(b.rows(), b.cols());
    }
    return s;
  }
};

namespace detail {

inline void adam_update(Matrix& param, const Matrix& grad, Matrix& m, Matrix& v,
                        const AdamConfig& c, double correction1, double correction2) {
  if (!param.same_shape(grad) || !param.same_shape(m)) {
    throw ShapeError("adam_step: gradient " + grad.shape_string() + " does not match parameter " +
                     param.shape_string());
  }
  for (std::size_t i = 0; i < param.size(); ++i) {
    m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * grad[i];
    v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * grad[i] * grad[i];
    const double m_hat = m[i] / correction1;
    const double v_hat = v[i] / correction2;
    param[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
  }
}

}  // namespace detail

// Adam with bias correction:
//   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2
//   p <- p - lr * m_hat / (sqrt(v_hat) + eps)
inline void adam_step(MlpParams& params, const MlpGrads& grads, AdamState& state) {
  if (grads.weights.size() != params.weights.size() ||
      grads.biases.size() != params.biases.size() ||
      state.first_moment.weights.size() != params.weights.size()) {
    throw ShapeError("adam_step: layer count mismatch between params, grads and state");
  }
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.config.beta1, t);
  const double c2 = 1.0 - std::pow(state.config.beta2, t);
  for (std::size_t i = 0; i < params.weights.size(); ++i) {
    detail::adam_update(params.weights[i], grads.weights[i], state.first_moment.weights[i],
                        state.second_moment.weights[i], state.config, c1, c2);
    detail::adam_update(params.biases[i], grads.biases[i], state.first_moment.biases[i],
                        state.second_moment.biases[i], state.config, c1, c2);
  }
}

// -mean[t log p + (1-t) log(1-p)] recorded on the predictions' tape.
inline Var bce_loss(Var predictions, const Matrix& targets) {
  if (!predictions.value().same_shape(targets)) {
    throw ShapeError("bce_loss: predictions " + predictions.value().shape_string() +
                     " vs targets " + targets.shape_string());
  }
  Tape& tape = predictions.tape();
  Var t = tape.constant(targets);
  Var one_minus_t = tape.constant(map(targets, [](double x) { return 1.0 - x; }));
  Var pos = mul(t, log(predictions));
  Var neg = mul(one_minus_t, log(shift(scale(predictions, -1.0), 1.0)));
  return scale(mean(add(pos, neg)), -1.0);
}

inline double bce_loss(const Matrix& predictions, const Matrix& targets) {
  detail::require_same_shape(predictions, targets, "bce_loss");
  double s = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    s += targets[i] * guarded_log(predictions[i]) +
         (1.0 - targets[i]) * guarded_log(1.0 - predictions[i]);
  }
  return -s / static_cast<double>(targets.size());
}

// ---------------------------------------------------------------------------
// Text serialization. One block per layer:
//
//   layer <i> <rows> <cols>
//   <rows*cols whitespace-separated values>
//
// rows = fan_in + 1: the last row of the block is the bias. Values are written
// with 17 significant digits, which round-trips doubles exactly.

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_mlp(std::ostream& out, const MlpParams& params) {
  for (std::size_t i = 0; i < params.weights.size(); ++i) {
    const Matrix& w = params.weights[i];
    const Matrix& b = params.biases[i];
    out << "layer " << i << ' ' << (w.rows() + 1) << ' ' << w.cols() << '\n';
    for (std::size_t r = 0; r < w.rows(); ++r) {
      for (std::size_t c = 0; c < w.cols(); ++c) out << (c ? " " : "") << format_double(w(r, c));
      out << '\n';
    }
    for (std::size_t c = 0; c < b.cols(); ++c) out << (c ? " " : "") << format_double(b[c]);
    out << '\n';
  }
}

// Reads `layers` consecutive layer blocks.
inline MlpParams read_mlp(std::istream& in, std::size_t layers) {
  MlpParams params;
  for (std::size_t i = 0; i < layers; ++i) {
    std::string tag;
    std::size_t index = 0, rows = 0, cols = 0;
    if (!(in >> tag >> index >> rows >> cols) || tag != "layer" || index != i || rows < 2) {
      throw DataError("malformed layer header for layer " + std::to_string(i));
    }
    Matrix w(rows - 1, cols);
    Matrix b(1, cols);
    for (double& v : w.values()) {
      if (!(in >> v)) throw DataError("truncated weights in layer " + std::to_string(i));
    }
    for (double& v : b.values()) {
      if (!(in >> v)) throw DataError("truncated bias in layer " + std::to_string(i));
    }
    params.weights.push_back(std::move(w));
    params.biases.push_back(std::move(b));
  }
  return params;
}

}  // namespace fraudgan
