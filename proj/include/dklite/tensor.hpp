/*
 * Copyright 2026 The dklite Authors.
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

#ifndef DKLITE_TENSOR_HPP_
#define DKLITE_TENSOR_HPP_

// Dense rank-2 arithmetic and a reverse-mode gradient tape.
//
// Values are Eigen matrices of doubles (a vector is an n x 1 matrix, a scalar
// a 1 x 1 matrix). A `Tape` records every operation applied to its `Var`
// handles; `Tape::backward` then walks the records in reverse order and
// accumulates adjoints into every node that depends on a variable leaf.

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <string>
#include <vector>

namespace dklite {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Index = Eigen::Index;

std::string shape_string(const Matrix& m);

// ---------------------------------------------------------------------------
// Plain value routines.

// Lower-triangular factor L with L * L^T = A + jitter * I.
struct CholeskyFactor {
  Matrix lower;
  double jitter = 0.0;
};

// Factorizes the symmetric part of `a`. On failure the diagonal is jittered by
// 1e-8 * mean(diag(a)), escalating x10 up to 1e-2 * mean(diag(a)); if that
// still fails a NumericalError naming the smallest pivot is thrown.
CholeskyFactor cholesky(const Matrix& a);

// Solves (L L^T) X = b.
Matrix cholesky_solve(const CholeskyFactor& factor, const Matrix& b);

// ln det(L L^T).
double cholesky_logdet(const CholeskyFactor& factor);

struct SpdSolveValue {
  Matrix solution;
  double logdet = 0.0;
};

SpdSolveValue chol_solve_logdet(const Matrix& a, const Matrix& b);

// Shape-checked product; throws DimensionError on inner-dimension mismatch.
Matrix matmul(const Matrix& a, const Matrix& b);

// ---------------------------------------------------------------------------
// Reverse-mode tape.

class Tape;

// Lightweight handle to a node on a tape. Copyable; valid while its tape is.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  double scalar() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  Tape* tape() const { return tape_; }
  std::size_t index() const { return index_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t index) : tape_(tape), index_(index) {}

  Tape* tape_ = nullptr;
  std::size_t index_ = 0;
};

class Tape {
 public:
  // Receives the adjoint of the node's output and forwards contributions to
  // the node's inputs through `Tape::accumulate`.
  using Backprop = std::function<void(Tape&, const Matrix& upstream)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // A leaf whose gradient is requested.
  Var variable(Matrix value);
  Var variable(double value);
  // A leaf treated as data.
  Var constant(Matrix value);
  Var constant(double value);

  // Seeds d(root)/d(root) = 1 and propagates adjoints to every node recorded
  // before `root`. Gradients from a previous call are discarded first.
  // Throws UsageError unless root is a 1 x 1 node of this tape.
  void backward(Var root);

  // Adjoint of `v` after `backward`; zeros when `v` does not influence root.
  Matrix gradient(Var v) const;

  std::size_t size() const { return nodes_.size(); }

  // Low-level interface used to define operations.
  Var record(Matrix value, std::initializer_list<Var> inputs, Backprop backprop);
  void accumulate(Var v, const Matrix& contribution);
  bool requires_grad(Var v) const { return nodes_[v.index_].requires_grad; }
  const Matrix& value(Var v) const { return nodes_[v.index_].value; }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    Backprop backprop;
    bool requires_grad = false;
  };

  Var push(Matrix value, bool requires_grad, Backprop backprop);

  std::vector<Node> nodes_;
};

// ---------------------------------------------------------------------------
// Differentiable operations. Binary operations require both operands to live
// on the same tape.

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);  // elementwise
Var matmul(Var a, Var b);
Var transpose(Var a);
Var scale(Var a, double factor);
Var scale(Var factor, Var a);  // factor is 1 x 1
Var add_scalar(Var a, double offset);
// Adds the 1 x n row `row` to every row of the m x n matrix `a`.
Var add_row(Var a, Var row);
Var elu(Var a);
Var softplus(Var a);
Var log(Var a);
Var reciprocal(Var a);
Var sum(Var a);  // 1 x 1
Var squared_norm(Var a);  // 1 x 1, sum of squared entries

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }

struct SpdSolve {
  Var solution;
  Var logdet;
};

// X = A^{-1} B and ln det A for symmetric positive definite A, factorized
// once. Only the symmetric part of A is read, so the gradient with respect
// to A is symmetrized.
SpdSolve chol_solve_logdet(Var a, Var b);

// Numerically stable softplus for plain doubles, and its inverse.
double softplus(double x);
double inverse_softplus(double y);

}  // namespace dklite

#endif  // DKLITE_TENSOR_HPP_
