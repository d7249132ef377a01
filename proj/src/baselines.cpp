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

#include "dklite/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dklite/error.hpp"

namespace dklite {
namespace {

constexpr double kRidge = 1e-8;

Matrix with_intercept(const Matrix& x) {
  Matrix design(x.rows(), x.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(x.cols()) = x;
  return design;
}

double knn_mean(const Matrix& pool, const Vector& outcomes, const RowVector& q,
                int k) {
  const Index n = pool.rows();
  std::vector<std::pair<double, Index>> dist(n);
  for (Index i = 0; i < n; ++i) dist[i] = {(pool.row(i) - q).squaredNorm(), i};
  const Index kk = std::min<Index>(k, n);
  std::partial_sort(dist.begin(), dist.begin() + kk, dist.end());
  double total = 0.0;
  for (Index i = 0; i < kk; ++i) total += outcomes(dist[i].second);
  return total / static_cast<double>(kk);
}

}  // namespace

std::string to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kOls1:
      return "ols1";
    case BaselineKind::kOls2:
      return "ols2";
    case BaselineKind::kKnn:
      return "knn";
  }
  return "unknown";
}

BaselineKind baseline_from_string(const std::string& name) {
  if (name == "ols1") return BaselineKind::kOls1;
  if (name == "ols2") return BaselineKind::kOls2;
  if (name == "knn") return BaselineKind::kKnn;
  throw ConfigError("unknown baseline '" + name + "'");
}

Vector least_squares(const Matrix& design, const Vector& y) {
  const Matrix gram = design.transpose() * design;
  const Vector rhs = design.transpose() * y;
  Eigen::LLT<Matrix> llt(gram);
  bool ok = llt.info() == Eigen::Success;
  if (ok) {
    const Vector diag = Matrix(llt.matrixL()).diagonal();
    const double lo = diag.minCoeff(), hi = diag.maxCoeff();
    ok = lo > 0.0 && (lo * lo) / (hi * hi) > 1e-14;
  }
  if (!ok) {
    Matrix ridged = gram;
    ridged.diagonal().array() += kRidge;
    llt.compute(ridged);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("least_squares: ridge-regularized system is singular");
    }
  }
  return llt.solve(rhs);
}

BaselineModel fit_baseline(BaselineKind kind, const Dataset& data, int k) {
  data.validate();
  if (data.arm_count(0) == 0 || data.arm_count(1) == 0) {
    throw DataError("fit_baseline: both arms need at least one unit");
  }
  if (k < 1) throw ConfigError("fit_baseline: k must be >= 1");
  BaselineModel m;
  m.kind = kind;
  m.k = k;
  m.dim = data.dim();
  switch (kind) {
    case BaselineKind::kOls1: {
      Matrix design(data.size(), data.dim() + 2);
      design.col(0).setOnes();
      design.middleCols(1, data.dim()) = data.x;
      for (Index i = 0; i < data.size(); ++i) design(i, data.dim() + 1) = data.t[i];
      m.joint_coef = least_squares(design, data.y);
      break;
    }
    case BaselineKind::kOls2:
      for (int a = 0; a < 2; ++a) {
        m.arm_coef[a] = least_squares(with_intercept(data.arm_x(a)), data.arm_y(a));
      }
      break;
    case BaselineKind::kKnn: {
      m.x_mean = data.x.colwise().mean();
      m.x_scale = ((data.x.rowwise() - m.x_mean).array().square().colwise().sum() /
                   static_cast<double>(data.size()))
                      .sqrt()
                      .matrix();
      for (Index j = 0; j < m.x_scale.size(); ++j) {
        if (!(m.x_scale(j) > 0.0)) m.x_scale(j) = 1.0;
      }
      for (int a = 0; a < 2; ++a) {
        m.arm_x[a] = ((data.arm_x(a).rowwise() - m.x_mean).array().rowwise() /
                      m.x_scale.array())
                         .matrix();
        m.arm_y[a] = data.arm_y(a);
      }
      break;
    }
  }
  return m;
}

PredictionSet predict_baseline(const BaselineModel& model, const Matrix& x) {
  if (x.cols() != model.dim) {
    throw DimensionError("predict_baseline: expected " +
                         std::to_string(model.dim) + " columns, got " +
                         std::to_string(x.cols()));
  }
  const Index n = x.rows();
  PredictionSet out;
  out.var0 = Vector::Zero(n);
  out.var1 = Vector::Zero(n);
  switch (model.kind) {
    case BaselineKind::kOls1: {
      const Vector base =
          model.joint_coef(0) + (x * model.joint_coef.segment(1, model.dim)).array();
      out.mu0 = base;
      out.mu1 = base.array() + model.joint_coef(model.dim + 1);
      break;
    }
    case BaselineKind::kOls2: {
      const Matrix design = with_intercept(x);
      out.mu0 = design * model.arm_coef[0];
      out.mu1 = design * model.arm_coef[1];
      break;
    }
    case BaselineKind::kKnn: {
      out.mu0.resize(n);
      out.mu1.resize(n);
      const Matrix z =
          ((x.rowwise() - model.x_mean).array().rowwise() / model.x_scale.array())
              .matrix();
      for (Index i = 0; i < n; ++i) {
        out.mu0(i) = knn_mean(model.arm_x[0], model.arm_y[0], z.row(i), model.k);
        out.mu1(i) = knn_mean(model.arm_x[1], model.arm_y[1], z.row(i), model.k);
      }
      break;
    }
  }
  return out;
}

}  // namespace dklite
