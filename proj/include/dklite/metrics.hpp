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

#ifndef DKLITE_METRICS_HPP_
#define DKLITE_METRICS_HPP_

#include <vector>

#include "dklite/tensor.hpp"

namespace dklite {

// Per-unit predictive summaries for both arms. Baselines leave the variances
// at zero.
struct PredictionSet {
  Vector mu0, var0, mu1, var1;

  Index size() const { return mu0.size(); }
  Vector tau() const { return mu1 - mu0; }
  // sigma_0^2 + sigma_1^2, the variance of tau-hat under independent arms.
  Vector uncertainty() const { return var0 + var1; }
  PredictionSet subset(const std::vector<Index>& rows) const;
};

// (1/N) sum (tau_i - tau_hat_i)^2.
double pehe_hat(const Vector& tau_hat, const Vector& tau);

// (1/N) sum (y1_i - y0_i - tau_hat_i)^2, for data observing both outcomes.
double pehe_tilde(const Vector& tau_hat, const Vector& y1, const Vector& y0);

struct PolicyRisk {
  double value = 0.0;
  // Set when a policy cell with positive probability has no matching unit.
  bool partially_identified = false;
};

// Policy pi(x) = 1 iff tau_hat > 0. Returns
//   1 - (E[Y | T=1, pi=1] P(pi=1) + E[Y | T=0, pi=0] P(pi=0)),
// where an empty cell contributes mean 0. Outcomes must lie in [0, 1].
PolicyRisk policy_risk(const Vector& tau_hat, const std::vector<int>& t,
                       const Vector& y);

// |mean(tau_hat) - mean(tau)|.
double ate_error(const Vector& tau_hat, const Vector& tau);

}  // namespace dklite

#endif  // DKLITE_METRICS_HPP_
