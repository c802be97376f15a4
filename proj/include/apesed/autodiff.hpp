/*
 * Copyright 2026 The apesed Authors.
 *
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

#ifndef APESED_AUTODIFF_HPP_
#define APESED_AUTODIFF_HPP_

// Reverse-mode automatic differentiation over dense matrices.
//
// A Tape records every operation as a node holding its value and a closure
// that pushes the node's adjoint into its inputs. Nodes are appended in
// topological order, so backward() is a single reverse sweep. Operations
// whose inputs carry no gradient record no closure at all, which makes
// inference on a tape nearly as cheap as a plain forward pass.

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "apesed/matrix.hpp"

namespace apesed::ad {

class Tape;

// Handle to a tape node. Cheap to copy; valid while its tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, size_t id) : tape_(tape), id_(id) {}

  Tape* tape() const { return tape_; }
  size_t id() const { return id_; }
  const Matrix& value() const;
  size_t rows() const { return value().rows; }
  size_t cols() const { return value().cols; }

 private:
  Tape* tape_ = nullptr;
  size_t id_ = 0;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // A leaf whose gradient is collected (a parameter).
  Var variable(Matrix value);
  // A leaf without gradient (inputs, masks, encodings).
  Var constant(Matrix value);

  const Matrix& value(Var v) const { return nodes_[v.id()].value; }
  // Gradient accumulated by backward(); an empty matrix if none reached v.
  const Matrix& grad(Var v) const { return nodes_[v.id()].grad; }
  bool needs_grad(Var v) const { return nodes_[v.id()].needs_grad; }

  // Seeds d(output)/d(output) = seed for a 1x1 output and sweeps backwards.
  void backward(Var output, double seed = 1.0);

  size_t size() const { return nodes_.size(); }

  // --- used by op implementations ---
  using Backward = std::function<void(Tape&, size_t self)>;
  Var push(Matrix value, bool needs_grad, Backward backward);
  // Gradient buffer of a node, zero-allocated on first use.
  Matrix& grad_buffer(size_t id);
  const Matrix& grad_of(size_t id) const { return nodes_[id].grad; }
  const Matrix& value_of(size_t id) const { return nodes_[id].value; }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool needs_grad = false;
    Backward backward;
  };
  std::deque<Node> nodes_;
};

inline const Matrix& Var::value() const { return tape_->value(*this); }

Var matmul(Var a, Var b);                 // A * B
Var matmul_nt(Var a, Var b);              // A * B^T
Var add(Var a, Var b);
Var add_row(Var a, Var row);              // adds a 1 x n row to every row of A
Var mul(Var a, Var b);                    // elementwise
Var scale(Var a, double s);
Var sigmoid(Var a);
Var tanh(Var a);
Var relu(Var a);
Var mask(Var a, const Matrix& m);         // elementwise by a constant (dropout)
Var slice_rows(Var a, size_t begin, size_t end);
Var slice_cols(Var a, size_t begin, size_t end);
Var concat_rows(std::span<const Var> parts);
Var concat_cols(std::span<const Var> parts);
Var softmax_rows(Var a);
Var layer_norm(Var a, Var gamma, Var beta, double eps = 1e-5);

// Fused LSTM cell. `gates` is 1 x 4H pre-activations in (i, f, g, o) order,
// `c_prev` is 1 x H, or nullopt for a zero state. Returns [h | c] as a
// 1 x 2H row.
Var lstm_cell(Var gates, std::optional<Var> c_prev);

// Sum over rows of w[label] * -log softmax(logits)[label], with each term
// capped at -log(1e-12). Returns a 1 x 1 node.
Var weighted_nll(Var logits, std::span<const uint16_t> labels, std::span<const double> weights);

// Upper bound applied per frame by weighted_nll.
inline constexpr double kMinProbability = 1e-12;

}  // namespace apesed::ad

#endif  // APESED_AUTODIFF_HPP_
