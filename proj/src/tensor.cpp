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

#include "dklite/tensor.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <utility>

#include "dklite/error.hpp"

namespace dklite {
namespace {

struct PivotFailure {
  Index column = -1;
  double pivot = 0.0;
};

// In-place lower Cholesky of `s`; returns the first non-positive pivot if the
// factorization breaks down.
PivotFailure factorize(const Matrix& s, Matrix& lower) {
  const Index n = s.rows();
  lower.setZero(n, n);
  for (Index j = 0; j < n; ++j) {
    double diag = s(j, j);
    for (Index k = 0; k < j; ++k) diag -= lower(j, k) * lower(j, k);
    if (!(diag > 0.0) || !std::isfinite(diag)) return {j, diag};
    const double root = std::sqrt(diag);
    lower(j, j) = root;
    for (Index i = j + 1; i < n; ++i) {
      double v = s(i, j);
      for (Index k = 0; k < j; ++k) v -= lower(i, k) * lower(j, k);
      lower(i, j) = v / root;
    }
  }
  return {};
}

void require_same_tape(Var a, Var b, const char* op) {
  if (!a.valid() || a.tape() != b.tape()) {
    throw UsageError(std::string(op) + ": operands must live on the same tape");
  }
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " +
                         shape_string(a) + " vs " + shape_string(b));
  }
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

std::string shape_string(const Matrix& m) {
  std::ostringstream os;
  os << '[' << m.rows() << 'x' << m.cols() << ']';
  return os.str();
}

CholeskyFactor cholesky(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw DimensionError("cholesky: matrix is not square " + shape_string(a));
  }
  if (!a.allFinite()) throw NumericalError("cholesky: non-finite entries");
  const Matrix s = 0.5 * (a + a.transpose());
  CholeskyFactor out;
  PivotFailure failure = factorize(s, out.lower);
  if (failure.column < 0) return out;

  double scale = s.rows() > 0 ? s.diagonal().mean() : 1.0;
  if (!(scale > 0.0)) scale = 1.0;
  for (double rel = 1e-8; rel <= 1e-2 * (1 + 1e-12); rel *= 10.0) {
    const double jitter = rel * scale;
    Matrix shifted = s;
    shifted.diagonal().array() += jitter;
    failure = factorize(shifted, out.lower);
    if (failure.column < 0) {
      out.jitter = jitter;
      return out;
    }
  }
  std::ostringstream os;
  os << "cholesky: matrix is not positive definite after maximum jitter; "
     << "smallest pivot " << failure.pivot << " at column " << failure.column;
  throw NumericalError(os.str());
}

Matrix cholesky_solve(const CholeskyFactor& factor, const Matrix& b) {
  if (b.rows() != factor.lower.rows()) {
    throw DimensionError("cholesky_solve: rhs " + shape_string(b) +
                         " does not match factor " + shape_string(factor.lower));
  }
  Matrix x = factor.lower.triangularView<Eigen::Lower>().solve(b);
  factor.lower.transpose().triangularView<Eigen::Upper>().solveInPlace(x);
  return x;
}

double cholesky_logdet(const CholeskyFactor& factor) {
  return 2.0 * factor.lower.diagonal().array().log().sum();
}

SpdSolveValue chol_solve_logdet(const Matrix& a, const Matrix& b) {
  const CholeskyFactor factor = cholesky(a);
  return {cholesky_solve(factor, b), cholesky_logdet(factor)};
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions differ " + shape_string(a) +
                         " * " + shape_string(b));
  }
  return a * b;
}

double softplus(double x) {
  return std::log1p(std::exp(-std::abs(x))) + std::max(x, 0.0);
}

double inverse_softplus(double y) {
  if (!(y > 0.0)) throw ConfigError("inverse_softplus: argument must be > 0");
  // ln(e^y - 1), stable for large y.
  return y > 30.0 ? y + std::log1p(-std::exp(-y)) : std::log(std::expm1(y));
}

// ---------------------------------------------------------------------------

const Matrix& Var::value() const {
  if (tape_ == nullptr) throw UsageError("Var: handle is not bound to a tape");
  return tape_->value(*this);
}

double Var::scalar() const {
  const Matrix& v = value();
  if (v.size() != 1) throw DimensionError("Var::scalar on " + shape_string(v));
  return v(0, 0);
}

Var Tape::push(Matrix value, bool requires_grad, Backprop backprop) {
  nodes_.push_back(Node{std::move(value), Matrix(), std::move(backprop),
                        requires_grad});
  return Var(this, nodes_.size() - 1);
}

Var Tape::variable(Matrix value) { return push(std::move(value), true, {}); }
Var Tape::variable(double value) {
  return variable(Matrix::Constant(1, 1, value));
}
Var Tape::constant(Matrix value) { return push(std::move(value), false, {}); }
Var Tape::constant(double value) {
  return constant(Matrix::Constant(1, 1, value));
}

Var Tape::record(Matrix value, std::initializer_list<Var> inputs,
                 Backprop backprop) {
  bool needs = false;
  for (const Var& in : inputs) {
    if (in.tape_ != this) throw UsageError("Tape::record: foreign input");
    needs = needs || nodes_[in.index_].requires_grad;
  }
  return push(std::move(value), needs, needs ? std::move(backprop) : Backprop{});
}

void Tape::accumulate(Var v, const Matrix& contribution) {
  Node& node = nodes_[v.index_];
  if (!node.requires_grad) return;
  if (node.grad.size() == 0) {
    node.grad = contribution;
  } else {
    node.grad += contribution;
  }
}

void Tape::backward(Var root) {
  if (root.tape_ != this) throw UsageError("backward: root is not on this tape");
  if (nodes_[root.index_].value.size() != 1) {
    throw UsageError("backward: root must be scalar, got " +
                     shape_string(nodes_[root.index_].value));
  }
  for (Node& node : nodes_) node.grad.resize(0, 0);
  nodes_[root.index_].grad = Matrix::Ones(1, 1);
  for (std::size_t i = root.index_ + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (node.grad.size() == 0 || !node.backprop) continue;
    // Copy the adjoint: the callback may append to other nodes' gradients
    // but never to its own.
    const Matrix upstream = node.grad;
    node.backprop(*this, upstream);
  }
}

Matrix Tape::gradient(Var v) const {
  const Node& node = nodes_.at(v.index_);
  if (node.grad.size() == 0) {
    return Matrix::Zero(node.value.rows(), node.value.cols());
  }
  return node.grad;
}

// ---------------------------------------------------------------------------

Var add(Var a, Var b) {
  require_same_tape(a, b, "add");
  require_same_shape(a.value(), b.value(), "add");
  return a.tape()->record(a.value() + b.value(), {a, b},
                          [a, b](Tape& t, const Matrix& g) {
                            t.accumulate(a, g);
                            t.accumulate(b, g);
                          });
}

Var sub(Var a, Var b) {
  require_same_tape(a, b, "sub");
  require_same_shape(a.value(), b.value(), "sub");
  return a.tape()->record(a.value() - b.value(), {a, b},
                          [a, b](Tape& t, const Matrix& g) {
                            t.accumulate(a, g);
                            if (t.requires_grad(b)) t.accumulate(b, -g);
                          });
}

Var mul(Var a, Var b) {
  require_same_tape(a, b, "mul");
  require_same_shape(a.value(), b.value(), "mul");
  return a.tape()->record(
      a.value().cwiseProduct(b.value()), {a, b},
      [a, b](Tape& t, const Matrix& g) {
        if (t.requires_grad(a)) t.accumulate(a, g.cwiseProduct(t.value(b)));
        if (t.requires_grad(b)) t.accumulate(b, g.cwiseProduct(t.value(a)));
      });
}

Var matmul(Var a, Var b) {
  require_same_tape(a, b, "matmul");
  return a.tape()->record(
      matmul(a.value(), b.value()), {a, b}, [a, b](Tape& t, const Matrix& g) {
        if (t.requires_grad(a)) t.accumulate(a, g * t.value(b).transpose());
        if (t.requires_grad(b)) t.accumulate(b, t.value(a).transpose() * g);
      });
}

Var transpose(Var a) {
  return a.tape()->record(a.value().transpose(), {a},
                          [a](Tape& t, const Matrix& g) {
                            t.accumulate(a, g.transpose());
                          });
}

Var scale(Var a, double factor) {
  return a.tape()->record(a.value() * factor, {a},
                          [a, factor](Tape& t, const Matrix& g) {
                            t.accumulate(a, g * factor);
                          });
}

Var scale(Var factor, Var a) {
  require_same_tape(factor, a, "scale");
  const double s = factor.scalar();
  return a.tape()->record(
      a.value() * s, {factor, a}, [factor, a, s](Tape& t, const Matrix& g) {
        if (t.requires_grad(factor)) {
          t.accumulate(factor,
                       Matrix::Constant(1, 1, g.cwiseProduct(t.value(a)).sum()));
        }
        if (t.requires_grad(a)) t.accumulate(a, g * s);
      });
}

Var add_scalar(Var a, double offset) {
  return a.tape()->record(a.value().array() + offset, {a},
                          [a](Tape& t, const Matrix& g) { t.accumulate(a, g); });
}

Var add_row(Var a, Var row) {
  require_same_tape(a, row, "add_row");
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw DimensionError("add_row: row " + shape_string(row.value()) +
                         " does not broadcast over " + shape_string(a.value()));
  }
  Matrix out = a.value();
  out.rowwise() += row.value().row(0);
  return a.tape()->record(std::move(out), {a, row},
                          [a, row](Tape& t, const Matrix& g) {
                            t.accumulate(a, g);
                            if (t.requires_grad(row)) {
                              t.accumulate(row, g.colwise().sum());
                            }
                          });
}

Var elu(Var a) {
  Matrix out = a.value().unaryExpr(
      [](double x) { return x > 0.0 ? x : std::expm1(x); });
  return a.tape()->record(std::move(out), {a}, [a](Tape& t, const Matrix& g) {
    const Matrix d = t.value(a).unaryExpr(
        [](double x) { return x > 0.0 ? 1.0 : std::exp(x); });
    t.accumulate(a, g.cwiseProduct(d));
  });
}

Var softplus(Var a) {
  Matrix out = a.value().unaryExpr([](double x) { return softplus(x); });
  return a.tape()->record(std::move(out), {a}, [a](Tape& t, const Matrix& g) {
    t.accumulate(a, g.cwiseProduct(t.value(a).unaryExpr(&sigmoid)));
  });
}

Var log(Var a) {
  if ((a.value().array() <= 0.0).any()) {
    throw NumericalError("log: non-positive argument");
  }
  return a.tape()->record(a.value().array().log().matrix(), {a},
                          [a](Tape& t, const Matrix& g) {
                            t.accumulate(a, g.cwiseQuotient(t.value(a)));
                          });
}

Var reciprocal(Var a) {
  if ((a.value().array() == 0.0).any()) {
    throw NumericalError("reciprocal: zero argument");
  }
  Matrix out = a.value().cwiseInverse();
  return a.tape()->record(out, {a}, [a, out](Tape& t, const Matrix& g) {
    t.accumulate(a, -g.cwiseProduct(out.cwiseProduct(out)));
  });
}

Var sum(Var a) {
  return a.tape()->record(Matrix::Constant(1, 1, a.value().sum()), {a},
                          [a](Tape& t, const Matrix& g) {
                            const Matrix& v = t.value(a);
                            t.accumulate(a, Matrix::Constant(v.rows(), v.cols(),
                                                             g(0, 0)));
                          });
}

Var squared_norm(Var a) {
  return a.tape()->record(Matrix::Constant(1, 1, a.value().squaredNorm()), {a},
                          [a](Tape& t, const Matrix& g) {
                            t.accumulate(a, 2.0 * g(0, 0) * t.value(a));
                          });
}

SpdSolve chol_solve_logdet(Var a, Var b) {
  require_same_tape(a, b, "chol_solve_logdet");
  if (a.rows() != a.cols() || b.rows() != a.rows()) {
    throw DimensionError("chol_solve_logdet: incompatible shapes " +
                         shape_string(a.value()) + ", " +
                         shape_string(b.value()));
  }
  auto factor = std::make_shared<const CholeskyFactor>(cholesky(a.value()));
  Tape& tape = *a.tape();

  Var solution = tape.record(
      cholesky_solve(*factor, b.value()), {a, b},
      [a, b, factor](Tape& t, const Matrix& g) {
        const Matrix gb = cholesky_solve(*factor, g);
        if (t.requires_grad(a)) {
          // The solution node sits after a and b; its value is still intact.
          const Matrix x = cholesky_solve(*factor, t.value(b));
          const Matrix gs = -gb * x.transpose();
          t.accumulate(a, 0.5 * (gs + gs.transpose()));
        }
        t.accumulate(b, gb);
      });

  Var logdet = tape.record(
      Matrix::Constant(1, 1, cholesky_logdet(*factor)), {a},
      [a, factor](Tape& t, const Matrix& g) {
        const Index n = factor->lower.rows();
        const Matrix inverse = cholesky_solve(*factor, Matrix::Identity(n, n));
        t.accumulate(a, g(0, 0) * 0.5 * (inverse + inverse.transpose()));
      });
  return {solution, logdet};
}

}  // namespace dklite
