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

#include "dklite/objective.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "dklite/error.hpp"
#include "dklite/log.hpp"

namespace dklite {
namespace {

double mean_or_zero(const Vector& v) {
  return v.size() == 0 ? 0.0 : v.mean();
}

void check_head(const PosteriorHead& head, const Matrix& features,
                const Vector& outcomes) {
  if (features.rows() != outcomes.size() ||
      head.observations != features.rows() || head.dim() != features.cols()) {
    throw DimensionError("head for arm " + std::to_string(head.arm) +
                         " was not fitted on the supplied " +
                         shape_string(features) + " features");
  }
}

}  // namespace

double sup_density_ratio(const DensityGrid& grid, int arm) {
  if (!grid.joint || grid.points < 2 || !(grid.hi > grid.lo)) {
    throw ConfigError("density grid needs a density, >= 2 points and lo < hi");
  }
  double best = 0.0;
  const double step = (grid.hi - grid.lo) / (grid.points - 1);
  for (int k = 0; k < grid.points; ++k) {
    const double x = grid.lo + step * k;
    const double num = grid.joint(x, 1 - arm);
    const double den = grid.joint(x, arm);
    if (num <= 0.0) continue;
    if (den <= 0.0) return std::numeric_limits<double>::infinity();
    best = std::max(best, num / den);
  }
  return best;
}

ArmTerms arm_terms(const PosteriorHead& head, const Matrix& features,
                   const Vector& outcomes,
                   const Matrix& counterfactual_features) {
  check_head(head, features, outcomes);
  ArmTerms terms;
  const PredictiveRows factual = predict_rows(head, features);
  const PredictiveRows counterfactual =
      predict_rows(head, counterfactual_features);
  const double n = static_cast<double>(features.rows());
  const double beta = head.noise_precision;

  terms.factual_count = features.rows();
  terms.counterfactual_count = counterfactual_features.rows();
  terms.noise_precision = beta;
  terms.prior_precision = head.prior_precision;
  terms.factual_loss = mean_or_zero((factual.mean - outcomes).array().square());
  terms.factual_variance = mean_or_zero(factual.variance);
  terms.counterfactual_variance = mean_or_zero(counterfactual.variance);
  terms.kl = kl_to_prior(head);
  terms.likelihood = 0.5 * n * std::log(2.0 * std::numbers::pi / beta) +
                     terms.kl +
                     0.5 * n * beta *
                         (terms.factual_variance + terms.factual_loss);
  return terms;
}

double likelihood_loss(const HeadPair& heads, const Matrix& features0,
                       const Vector& outcomes0, const Matrix& features1,
                       const Vector& outcomes1) {
  const Matrix empty(0, heads[0].dim());
  return arm_terms(heads[0], features0, outcomes0, empty).likelihood +
         arm_terms(heads[1], features1, outcomes1, empty).likelihood;
}

double counterfactual_variance(const HeadPair& heads, const Matrix& features0,
                               const Matrix& features1) {
  double total = 0.0;
  for (int t = 0; t < 2; ++t) {
    const Matrix& counterfactual = t == 0 ? features1 : features0;
    if (counterfactual.rows() == 0) {
      warn("counterfactual group for arm " + std::to_string(t) +
           " is empty; its variance term is 0");
      continue;
    }
    total += predict_rows(heads[t], counterfactual).variance.mean();
  }
  return total;
}

double reconstruction_loss(const RepresentationNet& net, const Matrix& x0,
                           const Matrix& x1) {
  double total = 0.0;
  for (const Matrix* x : {&x0, &x1}) {
    if (x->rows() == 0) continue;
    const Matrix rebuilt = net.decode(net.encode(*x));
    total += (*x - rebuilt).squaredNorm() / static_cast<double>(x->rows());
  }
  return total;
}

LossBreakdown final_loss(LossBreakdown parts, double alpha1, double alpha2) {
  if (!(alpha1 >= 0.0) || !(alpha2 >= 0.0)) {
    throw ConfigError("loss weights alpha1, alpha2 must be >= 0");
  }
  parts.alpha1 = alpha1;
  parts.alpha2 = alpha2;
  parts.fin = parts.lik + alpha1 * parts.var + alpha2 * parts.rec;
  return parts;
}

LossBreakdown evaluate_objective(const RepresentationNet& net,
                                 const Matrix& x0, const Vector& y0,
                                 const Matrix& x1, const Vector& y1,
                                 const std::array<double, 2>& noise_precision,
                                 const std::array<double, 2>& prior_precision,
                                 double alpha1, double alpha2) {
  const Matrix phi0 = net.encode(x0);
  const Matrix phi1 = net.encode(x1);
  const HeadPair heads = {
      fit_posterior(phi0, y0, noise_precision[0], prior_precision[0], 0),
      fit_posterior(phi1, y1, noise_precision[1], prior_precision[1], 1)};
  LossBreakdown parts;
  parts.arms[0] = arm_terms(heads[0], phi0, y0, phi1);
  parts.arms[1] = arm_terms(heads[1], phi1, y1, phi0);
  parts.lik = parts.arms[0].likelihood + parts.arms[1].likelihood;
  parts.var = parts.arms[0].counterfactual_variance +
              parts.arms[1].counterfactual_variance;
  parts.rec = reconstruction_loss(net, x0, x1);
  return final_loss(parts, alpha1, alpha2);
}

BoundTerms bound_terms(const HeadPair& heads, const Matrix& features0,
                       const Vector& outcomes0, const Matrix& features1,
                       const Vector& outcomes1,
                       const std::optional<DensityGrid>& densities) {
  BoundTerms out;
  out.losses.arms[0] = arm_terms(heads[0], features0, outcomes0, features1);
  out.losses.arms[1] = arm_terms(heads[1], features1, outcomes1, features0);
  out.losses.lik =
      out.losses.arms[0].likelihood + out.losses.arms[1].likelihood;
  out.losses.var = out.losses.arms[0].counterfactual_variance +
                   out.losses.arms[1].counterfactual_variance;
  out.losses.fin = out.losses.lik;
  if (densities) {
    for (int t = 0; t < 2; ++t) out.d_inf[t] = sup_density_ratio(*densities, t);
  }
  return out;
}

// ---------------------------------------------------------------------------

LossBreakdown ObjectiveVars::values() const {
  LossBreakdown out;
  for (int t = 0; t < 2; ++t) {
    const ArmVars& a = arms[t];
    ArmTerms& o = out.arms[t];
    o.factual_loss = a.factual_loss.scalar();
    o.factual_variance = a.factual_variance.scalar();
    o.counterfactual_variance = a.counterfactual_variance.scalar();
    o.kl = a.kl.scalar();
    o.likelihood = a.likelihood.scalar();
    o.noise_precision = a.noise_precision.scalar();
    o.prior_precision = a.prior_precision.scalar();
    o.factual_count = a.factual_count;
    o.counterfactual_count = a.counterfactual_count;
  }
  out.lik = lik.scalar();
  out.var = var.scalar();
  out.rec = rec.scalar();
  out.fin = fin.scalar();
  out.alpha1 = alpha1;
  out.alpha2 = alpha2;
  return out;
}

namespace {

// Mean of diag(A^T B) over columns, i.e. mean_i a_i^T b_i.
Var mean_column_dot(Var a, Var b, Index count) {
  return scale(sum(mul(a, b)), 1.0 / static_cast<double>(count));
}

ArmVars build_arm(Tape& tape, Var phi, Var y, Var phi_cf, Var beta,
                  Var lambda) {
  const Index n = phi.rows();
  const Index d = phi.cols();
  const Index m = phi_cf.rows();
  Var identity = tape.constant(Matrix::Identity(d, d));
  Var phi_t = transpose(phi);

  Var precision = scale(beta, matmul(phi_t, phi)) + scale(lambda, identity);
  SpdSolve rhs = chol_solve_logdet(precision, matmul(phi_t, y));
  Var mean = scale(beta, rhs.solution);
  Var covariance = chol_solve_logdet(precision, identity).solution;

  ArmVars out;
  out.factual_count = n;
  out.counterfactual_count = m;
  out.noise_precision = beta;
  out.prior_precision = lambda;

  Var zero = tape.constant(0.0);
  if (n > 0) {
    Var solved = chol_solve_logdet(precision, phi_t).solution;
    out.factual_variance = mean_column_dot(phi_t, solved, n);
    out.factual_loss = scale(squared_norm(matmul(phi, mean) - y),
                             1.0 / static_cast<double>(n));
  } else {
    out.factual_variance = zero;
    out.factual_loss = zero;
  }
  if (m > 0) {
    Var phi_cf_t = transpose(phi_cf);
    Var solved = chol_solve_logdet(precision, phi_cf_t).solution;
    out.counterfactual_variance = mean_column_dot(phi_cf_t, solved, m);
  } else {
    out.counterfactual_variance = zero;
  }

  // KL = 0.5 [lambda tr(K^-1) + lambda |m|^2 - d - d ln lambda + ln det K]
  Var trace = sum(mul(covariance, identity));
  Var inner = mul(lambda, trace) + mul(lambda, squared_norm(mean)) -
              scale(log(lambda), static_cast<double>(d)) + rhs.logdet;
  out.kl = scale(add_scalar(inner, -static_cast<double>(d)), 0.5);

  // N/2 ln(2 pi) - N/2 ln beta + KL + N beta / 2 (Var + L)
  const double half_n = 0.5 * static_cast<double>(n);
  Var fit = scale(mul(beta, out.factual_variance + out.factual_loss), half_n);
  out.likelihood =
      add_scalar(out.kl + fit - scale(log(beta), half_n),
                 half_n * std::log(2.0 * std::numbers::pi));
  return out;
}

}  // namespace

ObjectiveVars build_objective(const NetBinding& net,
                              const std::array<Var, 2>& noise_precision,
                              const std::array<Var, 2>& prior_precision,
                              Var x0, Var y0, Var x1, Var y1, double alpha1,
                              double alpha2) {
  if (!(alpha1 >= 0.0) || !(alpha2 >= 0.0)) {
    throw ConfigError("loss weights alpha1, alpha2 must be >= 0");
  }
  Tape& tape = *x0.tape();
  Var phi0 = encode(net, x0);
  Var phi1 = encode(net, x1);

  ObjectiveVars out;
  out.alpha1 = alpha1;
  out.alpha2 = alpha2;
  out.arms[0] = build_arm(tape, phi0, y0, phi1, noise_precision[0],
                          prior_precision[0]);
  out.arms[1] = build_arm(tape, phi1, y1, phi0, noise_precision[1],
                          prior_precision[1]);
  out.lik = out.arms[0].likelihood + out.arms[1].likelihood;
  out.var = out.arms[0].counterfactual_variance +
            out.arms[1].counterfactual_variance;

  Var rec = tape.constant(0.0);
  for (auto [x, phi] : {std::pair{x0, phi0}, std::pair{x1, phi1}}) {
    if (x.rows() == 0) continue;
    rec = rec + scale(squared_norm(x - decode(net, phi)),
                      1.0 / static_cast<double>(x.rows()));
  }
  out.rec = rec;
  out.fin = out.lik;
  if (alpha1 != 0.0) out.fin = out.fin + scale(out.var, alpha1);
  if (alpha2 != 0.0) out.fin = out.fin + scale(out.rec, alpha2);
  return out;
}

}  // namespace dklite
