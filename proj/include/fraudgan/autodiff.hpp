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

// Reverse-mode automatic differentiation over Matrix values.
//
// A Tape records every operation as a node appended after its parents, so the
// node order is already a topological order. backward() walks it once in
// reverse. Tapes are meant to live for a single training step:
//
//   Tape tape;
//   Var w = tape.variable(weights);
//   Var x = tape.constant(batch);
//   Var loss = mean(sigmoid(matmul(x, w)));
//   tape.backward(loss);
//   const Matrix& dw = tape.grad(w);

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "fraudgan/matrix.hpp"

namespace fraudgan {

class Tape;

// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  const Matrix& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

enum class OpKind {
  leaf,
  matmul,
  add,
  sub,
  mul,
  scale,
  shift,
  log,
  exp,
  clip,
  add_row,
  leaky_relu,
  sigmoid,
  sum,
  mean,
  concat_cols,
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Trainable leaf: gradients are accumulated into it.
  Var variable(Matrix value) { return push(OpKind::leaf, std::move(value), {}, true); }
  // Non-trainable leaf (data, noise, masks).
  Var constant(Matrix value) { return push(OpKind::leaf, std::move(value), {}, false); }

  const Matrix& value(Var v) const { return nodes_.at(v.id()).value; }

  // dLoss/dv after backward(); a zero matrix for nodes the loss does not reach.
  const Matrix& grad(Var v) const {
    const Node& n = nodes_.at(v.id());
    if (n.grad.size() != n.value.size()) {
      zero_cache_ = Matrix(n.value.rows(), n.value.cols());
      return zero_cache_;
    }
    return n.grad;
  }

  std::size_t size() const { return nodes_.size(); }
  bool backward_done() const { return backward_done_; }

  void backward(Var loss);

  // Clears gradients so backward may run again on the same graph.
  void reset_gradients() {
    for (Node& n : nodes_) n.grad = Matrix();
    backward_done_ = false;
  }

  // Construction hooks used by the op functions below.
  struct Node {
    Matrix value;
    Matrix grad;
    OpKind op = OpKind::leaf;
    std::array<std::size_t, 2> parents{0, 0};
    std::size_t parent_count = 0;
    double a = 0.0;
    double b = 0.0;
    bool requires_grad = false;
  };

  Var push(OpKind op, Matrix value, std::initializer_list<Var> parents, bool requires_grad,
           double a = 0.0, double b = 0.0) {
    Node n;
    n.value = std::move(value);
    n.op = op;
    n.a = a;
    n.b = b;
    n.requires_grad = requires_grad;
    for (const Var& p : parents) {
      if (&p.tape() != this) throw ContractError("operands belong to different tapes");
      n.parents[n.parent_count++] = p.id();
      n.requires_grad = n.requires_grad || nodes_[p.id()].requires_grad;
    }
    nodes_.push_back(std::move(n));
    return Var(this, nodes_.size() - 1);
  }

 private:
  void accumulate(std::size_t id, const Matrix& g) {
    Node& n = nodes_[id];
    if (!n.requires_grad) return;
    if (n.grad.size() != n.value.size()) {
      n.grad = g;
    } else {
      for (std::size_t i = 0; i < g.size(); ++i) n.grad[i] += g[i];
    }
  }

  void propagate(std::size_t id);

  std::vector<Node> nodes_;
  bool backward_done_ = false;
  mutable Matrix zero_cache_;
};

inline const Matrix& Var::value() const { return tape_->value(*this); }

inline void Tape::backward(Var loss) {
  if (&loss.tape() != this) throw ContractError("backward: loss is on another tape");
  const Node& root = nodes_.at(loss.id());
  if (root.value.rows() != 1 || root.value.cols() != 1) {
    throw ContractError("backward: loss must be a 1x1 scalar, got " +
                        root.value.shape_string());
  }
  if (backward_done_) {
    throw ContractError("backward already ran on this tape; call reset_gradients() first");
  }
  backward_done_ = true;
  if (!root.requires_grad) return;
  nodes_[loss.id()].grad = Matrix(1, 1, 1.0);
  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    const Node& n = nodes_[id];
    if (!n.requires_grad || n.parent_count == 0 || n.grad.size() != n.value.size()) continue;
    propagate(id);
  }
}

inline void Tape::propagate(std::size_t id) {
  // accumulate() only writes parent gradients; n and g stay valid.
  const Node& n = nodes_[id];
  const Matrix& g = n.grad;
  const std::size_t p0 = n.parents[0];
  const std::size_t p1 = n.parents[1];
  switch (n.op) {
    case OpKind::leaf:
      break;
    case OpKind::matmul:
      if (nodes_[p0].requires_grad) accumulate(p0, matmul_nt(g, nodes_[p1].value));
      if (nodes_[p1].requires_grad) accumulate(p1, matmul_tn(nodes_[p0].value, g));
      break;
    case OpKind::add:
      accumulate(p0, g);
      accumulate(p1, g);
      break;
    case OpKind::sub:
      accumulate(p0, g);
      if (nodes_[p1].requires_grad) accumulate(p1, scale(g, -1.0));
      break;
    case OpKind::mul:
      if (nodes_[p0].requires_grad) accumulate(p0, hadamard(g, nodes_[p1].value));
      if (nodes_[p1].requires_grad) accumulate(p1, hadamard(g, nodes_[p0].value));
      break;
    case OpKind::scale:
      accumulate(p0, scale(g, n.a));
      break;
    case OpKind::shift:
      accumulate(p0, g);
      break;
    case OpKind::log: {
      const Matrix& x = nodes_[p0].value;
      accumulate(p0, zip(g, x, "log'", [](double gi, double xi) {
                   return xi > kLogEpsilon ? gi / xi : 0.0;
                 }));
      break;
    }
    case OpKind::exp:
      accumulate(p0, hadamard(g, n.value));
      break;
    case OpKind::clip: {
      const Matrix& x = nodes_[p0].value;
      const double lo = n.a, hi = n.b;
      accumulate(p0, zip(g, x, "clip'", [lo, hi](double gi, double xi) {
                   return (xi >= lo && xi <= hi) ? gi : 0.0;
                 }));
      break;
    }
    case OpKind::add_row:
      accumulate(p0, g);
      if (nodes_[p1].requires_grad) accumulate(p1, column_sums(g));
      break;
    case OpKind::leaky_relu: {
      const Matrix& x = nodes_[p0].value;
      const double slope = n.a;
      accumulate(p0, zip(g, x, "leaky_relu'", [slope](double gi, double xi) {
                   return xi > 0.0 ? gi : slope * gi;
                 }));
      break;
    }
    case OpKind::sigmoid:
      accumulate(p0, zip(g, n.value, "sigmoid'", [](double gi, double yi) {
                   return gi * yi * (1.0 - yi);
                 }));
      break;
    case OpKind::sum: {
      const Matrix& x = nodes_[p0].value;
      accumulate(p0, Matrix(x.rows(), x.cols(), g[0]));
      break;
    }
    case OpKind::mean: {
      const Matrix& x = nodes_[p0].value;
      accumulate(p0, Matrix(x.rows(), x.cols(), g[0] / static_cast<double>(x.size())));
      break;
    }
    case OpKind::concat_cols: {
      const std::size_t left = nodes_[p0].value.cols();
      const std::size_t right = nodes_[p1].value.cols();
      if (nodes_[p0].requires_grad) {
        Matrix gl(g.rows(), left);
        for (std::size_t r = 0; r < g.rows(); ++r)
          for (std::size_t c = 0; c < left; ++c) gl(r, c) = g(r, c);
        accumulate(p0, gl);
      }
      if (nodes_[p1].requires_grad) {
        Matrix gr(g.rows(), right);
        for (std::size_t r = 0; r < g.rows(); ++r)
          for (std::size_t c = 0; c < right; ++c) gr(r, c) = g(r, left + c);
        accumulate(p1, gr);
      }
      break;
    }
  }
}

// ---------------------------------------------------------------------------
// Operations. Each computes its value eagerly and records itself on the tape
// of its first operand.

inline Var matmul(Var a, Var b) {
  return a.tape().push(OpKind::matmul, matmul(a.value(), b.value()), {a, b}, false);
}
inline Var add(Var a, Var b) {
  return a.tape().push(OpKind::add, add(a.value(), b.value()), {a, b}, false);
}
inline Var sub(Var a, Var b) {
  return a.tape().push(OpKind::sub, sub(a.value(), b.value()), {a, b}, false);
}
inline Var mul(Var a, Var b) {
  return a.tape().push(OpKind::mul, hadamard(a.value(), b.value()), {a, b}, false);
}
inline Var scale(Var a, double s) {
  return a.tape().push(OpKind::scale, scale(a.value(), s), {a}, false, s);
}
// a + c for a scalar constant c.
inline Var shift(Var a, double c) {
  return a.tape().push(OpKind::shift, map(a.value(), [c](double x) { return x + c; }), {a},
                       false, c);
}
inline Var log(Var a) { return a.tape().push(OpKind::log, log(a.value()), {a}, false); }
inline Var exp(Var a) { return a.tape().push(OpKind::exp, exp(a.value()), {a}, false); }
inline Var clip(Var a, double lo, double hi) {
  return a.tape().push(OpKind::clip, clip(a.value(), lo, hi), {a}, false, lo, hi);
}
inline Var add_row(Var a, Var row) {
  return a.tape().push(OpKind::add_row, add_row(a.value(), row.value()), {a, row}, false);
}
inline Var leaky_relu(Var a, double slope) {
  return a.tape().push(OpKind::leaky_relu,
                       map(a.value(), [slope](double x) { return x > 0.0 ? x : slope * x; }),
                       {a}, false, slope);
}

inline double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline Var sigmoid(Var a) {
  return a.tape().push(OpKind::sigmoid, map(a.value(), stable_sigmoid), {a}, false);
}
inline Var sum(Var a) {
  return a.tape().push(OpKind::sum, Matrix(1, 1, sum(a.value())), {a}, false);
}
inline Var mean(Var a) {
  return a.tape().push(OpKind::mean, Matrix(1, 1, mean(a.value())), {a}, false);
}
inline Var concat_cols(Var a, Var b) {
  return a.tape().push(OpKind::concat_cols, hstack(a.value(), b.value()), {a, b}, false);
}

inline double scalar(Var v) {
  if (v.rows() != 1 || v.cols() != 1) {
    throw ContractError("scalar: expected 1x1, got " + v.value().shape_string());
  }
  return v.value()[0];
}

}  // namespace fraudgan
