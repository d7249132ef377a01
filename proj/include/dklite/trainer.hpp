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

#ifndef DKLITE_TRAINER_HPP_
#define DKLITE_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dklite/data.hpp"
#include "dklite/metrics.hpp"
#include "dklite/objective.hpp"
#include "dklite/representation.hpp"

namespace dklite {

struct TrainConfig {
  // L_lik sums over units while L_var and L_rec are per-unit means, so useful
  // weights grow with the sample size.
  double alpha1 = 100.0;  // weight of the counterfactual variance
  double alpha2 = 10.0;   // weight of the reconstruction loss
  double learning_rate = 1e-3;
  int steps = 2000;
  std::uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  // Stop after this many steps without improving L_fin; 0 disables.
  int patience = 0;

  std::vector<int> hidden = {50, 50};
  int latent_dim = 25;
  Activation activation = Activation::kElu;

  // Noise/prior precisions are softplus-parameterized and learned by
  // gradient. When disabled they are re-selected each step from
  // `precision_grid` by minimizing L_lik at the current features.
  bool learn_precisions = true;
  std::vector<double> precision_grid = {0.1, 1.0, 10.0, 100.0};
  double initial_noise_precision = 1.0;
  double initial_prior_precision = 1.0;
  bool freeze_representation = false;

  // Hyperparameter search.
  std::vector<std::pair<double, double>> grid = {
      {0.0, 0.0},   {0.0, 10.0},   {0.0, 100.0},  {10.0, 0.0},  {10.0, 10.0},
      {10.0, 100.0}, {100.0, 0.0}, {100.0, 10.0}, {100.0, 100.0}};
  int folds = 5;

  // Throws ConfigError when a field is out of range.
  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

// Column-wise affine standardization.
struct Standardizer {
  RowVector mean;
  RowVector scale;

  static Standardizer fit(const Matrix& x);
  Matrix apply(const Matrix& x) const;
};

struct FittedModel {
  RepresentationNet net;
  HeadPair heads;  // in standardized outcome units
  TrainConfig config;
  std::vector<LossBreakdown> history;
  Standardizer x_standardizer;
  double y_mean = 0.0;
  double y_scale = 1.0;

  // Posterior predictive means/variances in original outcome units.
  PredictionSet predict(const Matrix& x) const;
  // phi(x) on standardized covariates.
  Matrix embed(const Matrix& x) const;
};

// Minimizes L_fin by Adam, refitting both posteriors in closed form at every
// step. Throws DataError for single-arm data and TrainingError when the loss
// becomes non-finite. An initial network may be supplied (e.g. to freeze a
// known representation); otherwise one is drawn from config.seed.
FittedModel train(const Dataset& data, const TrainConfig& config,
                  const std::optional<RepresentationNet>& initial = std::nullopt);

// tau-hat for `x_eval` from a model fitted on `train` with the given weights.
using EffectLearner = std::function<Vector(const Dataset& train,
                                           const Matrix& x_eval, double alpha1,
                                           double alpha2, std::uint64_t seed)>;

struct SelectionResult {
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  std::vector<double> scores;  // mean imputed PEHE per grid point
  int folds_used = 0;
};

// K-fold selection of (alpha1, alpha2). Each validation unit's missing
// outcome is imputed with the factual outcome of its nearest opposite-arm
// neighbour in the same fold (Euclidean distance on standardized inputs).
// Ties: smaller alpha1 + alpha2, then lexicographic. Folds lacking an arm are
// skipped with a warning; SelectionError if every fold is skipped.
SelectionResult select_hyperparams(const Dataset& data,
                                   const std::vector<std::pair<double, double>>& grid,
                                   int folds, const TrainConfig& base,
                                   const EffectLearner& learner = {});

}  // namespace dklite

#endif  // DKLITE_TRAINER_HPP_
