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

#ifndef DKLITE_BASELINES_HPP_
#define DKLITE_BASELINES_HPP_

#include <array>
#include <string>
#include <vector>

#include "dklite/data.hpp"
#include "dklite/metrics.hpp"

namespace dklite {

enum class BaselineKind {
  kOls1,  // one regression of y on [1, x, t]
  kOls2,  // one regression of y on [1, x] per arm
  kKnn,   // k nearest neighbours per arm in standardized covariates
};

std::string to_string(BaselineKind kind);
BaselineKind baseline_from_string(const std::string& name);

struct BaselineModel {
  BaselineKind kind = BaselineKind::kOls1;
  Vector joint_coef;                // ols1: intercept, x..., t
  std::array<Vector, 2> arm_coef;   // ols2: intercept, x...
  // knn
  int k = 5;
  RowVector x_mean, x_scale;
  std::array<Matrix, 2> arm_x;  // standardized
  std::array<Vector, 2> arm_y;
  Index dim = 0;
};

// Throws DataError unless both arms have at least one unit. Degenerate
// designs are solved with a 1e-8 ridge on the normal equations.
BaselineModel fit_baseline(BaselineKind kind, const Dataset& data, int k = 5);

// Variances in the returned set are zero.
PredictionSet predict_baseline(const BaselineModel& model, const Matrix& x);

// Least squares with the ridge fallback, exposed for reuse.
Vector least_squares(const Matrix& design, const Vector& y);

}  // namespace dklite

#endif  // DKLITE_BASELINES_HPP_
