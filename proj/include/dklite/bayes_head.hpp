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

#ifndef DKLITE_BAYES_HEAD_HPP_
#define DKLITE_BAYES_HEAD_HPP_

#include "dklite/tensor.hpp"

namespace dklite {

// Bayesian linear regression y = w^T phi + eps, eps ~ N(0, 1/beta), on top of
// encoded features, with prior w ~ N(0, I/lambda). The posterior is
// N(mean, precision^{-1}) with
//   precision = beta * Phi^T Phi + lambda * I,
//   mean      = beta * precision^{-1} Phi^T y.
struct PosteriorHead {
  int arm = 0;
  Vector mean;
  Matrix precision;
  CholeskyFactor factor;  // of `precision`
  double noise_precision = 1.0;  // beta
  double prior_precision = 1.0;  // lambda
  Index observations = 0;

  Index dim() const { return mean.size(); }
};

struct Predictive {
  double mean = 0.0;
  double variance = 0.0;
};

// Throws DataError on non-finite inputs or non-positive precisions, and
// DimensionError if features and outcomes disagree in length.
PosteriorHead fit_posterior(const Matrix& features, const Vector& outcomes,
                            double noise_precision, double prior_precision,
                            int arm = 0);

// Predictive distribution of the latent f(x) = w^T phi(x).
Predictive predict(const PosteriorHead& head, const Vector& phi);

// Row-wise predictions for an N x d_phi feature matrix.
struct PredictiveRows {
  Vector mean;
  Vector variance;
};
PredictiveRows predict_rows(const PosteriorHead& head, const Matrix& features);

// KL(N(mean, precision^{-1}) || N(0, I/lambda)).
double kl_to_prior(const PosteriorHead& head);

}  // namespace dklite

#endif  // DKLITE_BAYES_HEAD_HPP_
