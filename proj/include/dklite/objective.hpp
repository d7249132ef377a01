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

#ifndef DKLITE_OBJECTIVE_HPP_
#define DKLITE_OBJECTIVE_HPP_

#include <array>
#include <functional>
#include <optional>

#include "dklite/bayes_head.hpp"
#include "dklite/representation.hpp"
#include "dklite/tensor.hpp"

namespace dklite {

using HeadPair = std::array<PosteriorHead, 2>;

// Empirical quantities for one treatment arm t, computed from the posterior
// fitted on that arm's factual data.
struct ArmTerms {
  double factual_loss = 0.0;             // mean (mu(x_i) - y_i)^2 over arm t
  double factual_variance = 0.0;         // mean sigma^2 over arm t
  double counterfactual_variance = 0.0;  // mean sigma^2 over arm 1 - t
  double kl = 0.0;                       // KL(posterior || prior)
  double likelihood = 0.0;               // arm contribution to L_lik
  double noise_precision = 0.0;
  double prior_precision = 0.0;
  Index factual_count = 0;
  Index counterfactual_count = 0;
};

// L_fin = L_lik + alpha1 * L_var + alpha2 * L_rec.
struct LossBreakdown {
  std::array<ArmTerms, 2> arms;
  double lik = 0.0;
  double var = 0.0;
  double rec = 0.0;
  double fin = 0.0;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
};

// Joint covariate densities p(x, t) of a 1-D population, evaluated on a
// uniform grid over [lo, hi].
struct DensityGrid {
  std::function<double(double x, int arm)> joint;
  double lo = 0.0;
  double hi = 1.0;
  int points = 10000;
};

// sup_x p(x, 1 - arm) / p(x, arm) over the grid; +inf where the factual
// density vanishes under counterfactual mass.
double sup_density_ratio(const DensityGrid& grid, int arm);

struct BoundTerms {
  LossBreakdown losses;
  // D_inf(P_{x,1-t} || P_{x,t}) per arm; absent when densities are unknown.
  std::array<std::optional<double>, 2> d_inf;
};

ArmTerms arm_terms(const PosteriorHead& head, const Matrix& features,
                   const Vector& outcomes,
                   const Matrix& counterfactual_features);

// Negative log marginal likelihood of the factual data, evaluated through
// its decomposition into noise, KL, variance and fit terms. Throws
// DimensionError when a head was not fitted on the given arm data.
double likelihood_loss(const HeadPair& heads, const Matrix& features0,
                       const Vector& outcomes0, const Matrix& features1,
                       const Vector& outcomes1);

// sum_t mean_{x in arm 1-t} sigma_t^2(x). An empty counterfactual group
// contributes 0 and logs a warning.
double counterfactual_variance(const HeadPair& heads, const Matrix& features0,
                               const Matrix& features1);

// sum_t mean_{x in arm t} ||x - decode(encode(x))||^2.
double reconstruction_loss(const RepresentationNet& net, const Matrix& x0,
                           const Matrix& x1);

// Fills `fin` from the components; ConfigError on negative weights.
LossBreakdown final_loss(LossBreakdown parts, double alpha1, double alpha2);

// Complete value-level evaluation: encode both arms, fit both heads, and
// assemble every term.
LossBreakdown evaluate_objective(const RepresentationNet& net,
                                 const Matrix& x0, const Vector& y0,
                                 const Matrix& x1, const Vector& y1,
                                 const std::array<double, 2>& noise_precision,
                                 const std::array<double, 2>& prior_precision,
                                 double alpha1, double alpha2);

BoundTerms bound_terms(const HeadPair& heads, const Matrix& features0,
                       const Vector& outcomes0, const Matrix& features1,
                       const Vector& outcomes1,
                       const std::optional<DensityGrid>& densities);

// ---------------------------------------------------------------------------
// Differentiable objective on a tape.

struct ArmVars {
  Var factual_loss, factual_variance, counterfactual_variance, kl, likelihood;
  Var noise_precision, prior_precision;
  Index factual_count = 0, counterfactual_count = 0;
};

struct ObjectiveVars {
  std::array<ArmVars, 2> arms;
  Var lik, var, rec, fin;
  double alpha1 = 0.0, alpha2 = 0.0;

  LossBreakdown values() const;
};

// `noise_precision` and `prior_precision` are positive 1 x 1 nodes; x_t are
// N_t x d and y_t are N_t x 1 constants.
ObjectiveVars build_objective(const NetBinding& net,
                              const std::array<Var, 2>& noise_precision,
                              const std::array<Var, 2>& prior_precision,
                              Var x0, Var y0, Var x1, Var y1, double alpha1,
                              double alpha2);

}  // namespace dklite

#endif  // DKLITE_OBJECTIVE_HPP_
