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

#include "dklite/bayes_head.hpp"

#include <cmath>
#include <string>

#include "dklite/error.hpp"

namespace dklite {

PosteriorHead fit_posterior(const Matrix& features, const Vector& outcomes,
                            double noise_precision, double prior_precision,
                            int arm) {
  if (!(noise_precision > 0.0) || !(prior_precision > 0.0) ||
      !std::isfinite(noise_precision) || !std::isfinite(prior_precision)) {
    throw DataError("fit_posterior: precisions must be finite and > 0");
  }
  if (features.rows() != outcomes.size()) {
    throw DimensionError("fit_posterior: " + std::to_string(features.rows()) +
                         " feature rows vs " + std::to_string(outcomes.size()) +
                         " outcomes");
  }
  if (!features.allFinite() || !outcomes.allFinite()) {
    throw DataError("fit_posterior: non-finite features or outcomes");
  }
  const Index d = features.cols();
  PosteriorHead head;
  head.arm = arm;
  head.noise_precision = noise_precision;
  head.prior_precision = prior_precision;
  head.observations = features.rows();
  head.precision = noise_precision * (features.transpose() * features);
  head.precision.diagonal().array() += prior_precision;
  head.factor = cholesky(head.precision);
  head.mean = noise_precision *
              cholesky_solve(head.factor, features.transpose() * outcomes);
  if (d == 0) head.mean.resize(0);
  return head;
}

Predictive predict(const PosteriorHead& head, const Vector& phi) {
  if (phi.size() != head.dim()) {
    throw DimensionError("predict: feature length " +
                         std::to_string(phi.size()) + " vs head dim " +
                         std::to_string(head.dim()));
  }
  const Vector solved = cholesky_solve(head.factor, phi);
  return {head.mean.dot(phi), std::max(0.0, phi.dot(solved))};
}

PredictiveRows predict_rows(const PosteriorHead& head,
                            const Matrix& features) {
  if (features.cols() != head.dim()) {
    throw DimensionError("predict_rows: feature width " +
                         std::to_string(features.cols()) + " vs head dim " +
                         std::to_string(head.dim()));
  }
  const Matrix solved = cholesky_solve(head.factor, features.transpose());
  PredictiveRows out;
  out.mean = features * head.mean;
  out.variance = (features.transpose().cwiseProduct(solved))
                     .colwise()
                     .sum()
                     .transpose()
                     .cwiseMax(0.0);
  return out;
}

double kl_to_prior(const PosteriorHead& head) {
  const Index d = head.dim();
  const double lambda = head.prior_precision;
  const Matrix covariance = cholesky_solve(head.factor, Matrix::Identity(d, d));
  const double kl =
      0.5 * (lambda * covariance.trace() + lambda * head.mean.squaredNorm() -
             static_cast<double>(d) - static_cast<double>(d) * std::log(lambda) +
             cholesky_logdet(head.factor));
  return std::max(0.0, kl);
}

}  // namespace dklite
