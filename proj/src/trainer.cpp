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

#include "dklite/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "dklite/error.hpp"
#include "dklite/log.hpp"
#include "dklite/seed.hpp"

namespace dklite {
namespace {

struct Adam {
  double beta1, beta2, epsilon, rate;
  std::vector<Matrix> first, second;
  int t = 0;

  void step(const std::vector<Matrix*>& params, const std::vector<Matrix>& grads) {
    if (first.empty()) {
      for (const Matrix* p : params) {
        first.push_back(Matrix::Zero(p->rows(), p->cols()));
        second.push_back(Matrix::Zero(p->rows(), p->cols()));
      }
    }
    ++t;
    const double c1 = 1.0 - std::pow(beta1, t);
    const double c2 = 1.0 - std::pow(beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
      const Matrix& g = grads[i];
      first[i] = beta1 * first[i] + (1.0 - beta1) * g;
      second[i] = beta2 * second[i] + (1.0 - beta2) * g.cwiseProduct(g);
      *params[i] -= (rate * (first[i] / c1).array() /
                     ((second[i] / c2).array().sqrt() + epsilon))
                        .matrix();
    }
  }
};

// Grid search for one arm's (beta, lambda) minimizing its evidence term.
std::pair<double, double> best_precisions(const Matrix& phi, const Vector& y,
                                          const std::vector<double>& grid) {
  double best = std::numeric_limits<double>::infinity();
  std::pair<double, double> arg{grid.front(), grid.front()};
  const Matrix empty(0, phi.cols());
  for (double beta : grid) {
    for (double lambda : grid) {
      const double v =
          arm_terms(fit_posterior(phi, y, beta, lambda), phi, y, empty).likelihood;
      if (v < best) {
        best = v;
        arg = {beta, lambda};
      }
    }
  }
  return arg;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(alpha1 >= 0.0) || !(alpha2 >= 0.0)) {
    throw ConfigError("alpha1 and alpha2 must be >= 0");
  }
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
  if (steps < 1) throw ConfigError("step count must be >= 1");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) ||
      !(adam_beta2 >= 0.0 && adam_beta2 < 1.0) || !(adam_epsilon > 0.0)) {
    throw ConfigError("invalid optimizer moment parameters");
  }
  if (patience < 0) throw ConfigError("patience must be >= 0");
  if (latent_dim < 1) throw ConfigError("latent_dim must be >= 1");
  for (int h : hidden) {
    if (h < 1) throw ConfigError("hidden sizes must be >= 1");
  }
  if (precision_grid.empty()) throw ConfigError("precision grid is empty");
  for (double p : precision_grid) {
    if (!(p > 0.0)) throw ConfigError("precision grid values must be > 0");
  }
  if (!(initial_noise_precision > 0.0) || !(initial_prior_precision > 0.0)) {
    throw ConfigError("initial precisions must be > 0");
  }
  if (folds < 2) throw ConfigError("folds must be >= 2");
}

nlohmann::json TrainConfig::to_json() const {
  nlohmann::json j;
  j["alpha1"] = alpha1;
  j["alpha2"] = alpha2;
  j["learning_rate"] = learning_rate;
  j["steps"] = steps;
  j["seed"] = seed;
  j["adam"] = {adam_beta1, adam_beta2, adam_epsilon};
  j["patience"] = patience;
  j["hidden"] = hidden;
  j["latent_dim"] = latent_dim;
  j["activation"] = to_string(activation);
  j["learn_precisions"] = learn_precisions;
  j["precision_grid"] = precision_grid;
  j["initial_noise_precision"] = initial_noise_precision;
  j["initial_prior_precision"] = initial_prior_precision;
  j["freeze_representation"] = freeze_representation;
  j["grid"] = nlohmann::json::array();
  for (auto [a1, a2] : grid) j["grid"].push_back({a1, a2});
  j["folds"] = folds;
  return j;
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  try {
    c.alpha1 = j.value("alpha1", c.alpha1);
    c.alpha2 = j.value("alpha2", c.alpha2);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.steps = j.value("steps", c.steps);
    c.seed = j.value("seed", c.seed);
    if (j.contains("adam")) {
      c.adam_beta1 = j["adam"].at(0).get<double>();
      c.adam_beta2 = j["adam"].at(1).get<double>();
      c.adam_epsilon = j["adam"].at(2).get<double>();
    }
    c.patience = j.value("patience", c.patience);
    c.hidden = j.value("hidden", c.hidden);
    c.latent_dim = j.value("latent_dim", c.latent_dim);
    c.activation = activation_from_string(j.value("activation", std::string("elu")));
    c.learn_precisions = j.value("learn_precisions", c.learn_precisions);
    c.precision_grid = j.value("precision_grid", c.precision_grid);
    c.initial_noise_precision =
        j.value("initial_noise_precision", c.initial_noise_precision);
    c.initial_prior_precision =
        j.value("initial_prior_precision", c.initial_prior_precision);
    c.freeze_representation =
        j.value("freeze_representation", c.freeze_representation);
    if (j.contains("grid")) {
      c.grid.clear();
      for (const auto& p : j["grid"]) {
        c.grid.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
      }
    }
    c.folds = j.value("folds", c.folds);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("train config: ") + e.what());
  }
  return c;
}

Standardizer Standardizer::fit(const Matrix& x) {
  Standardizer s;
  s.mean = x.colwise().mean();
  s.scale = ((x.rowwise() - s.mean).array().square().colwise().sum() /
             static_cast<double>(std::max<Index>(1, x.rows())))
                .sqrt()
                .matrix();
  for (Index j = 0; j < s.scale.size(); ++j) {
    if (!(s.scale(j) > 1e-12)) s.scale(j) = 1.0;
  }
  return s;
}

Matrix Standardizer::apply(const Matrix& x) const {
  if (x.cols() != mean.size()) {
    throw DimensionError("standardize: expected " + std::to_string(mean.size()) +
                         " columns, got " + std::to_string(x.cols()));
  }
  return ((x.rowwise() - mean).array().rowwise() / scale.array()).matrix();
}

PredictionSet FittedModel::predict(const Matrix& x) const {
  const Matrix phi = embed(x);
  PredictionSet out;
  const double var_scale = y_scale * y_scale;
  for (int t = 0; t < 2; ++t) {
    const PredictiveRows rows = predict_rows(heads[t], phi);
    Vector mu = (rows.mean.array() * y_scale + y_mean).matrix();
    Vector var = rows.variance * var_scale;
    if (t == 0) {
      out.mu0 = std::move(mu);
      out.var0 = std::move(var);
    } else {
      out.mu1 = std::move(mu);
      out.var1 = std::move(var);
    }
  }
  return out;
}

Matrix FittedModel::embed(const Matrix& x) const {
  return net.encode(x_standardizer.apply(x));
}

FittedModel train(const Dataset& data, const TrainConfig& config,
                  const std::optional<RepresentationNet>& initial) {
  config.validate();
  data.validate();
  if (data.arm_count(0) < 1 || data.arm_count(1) < 1) {
    throw DataError("train: data must contain at least one unit in each arm");
  }

  FittedModel model;
  model.config = config;
  model.x_standardizer = Standardizer::fit(data.x);
  model.y_mean = data.y.mean();
  model.y_scale = std::sqrt((data.y.array() - model.y_mean).square().mean());
  if (!(model.y_scale > 1e-12)) model.y_scale = 1.0;

  if (initial) {
    if (initial->input_dim() != data.dim()) {
      throw DimensionError("train: initial network expects " +
                           std::to_string(initial->input_dim()) + " inputs");
    }
    model.net = *initial;
  } else {
    Architecture arch;
    arch.input_dim = static_cast<int>(data.dim());
    arch.hidden = config.hidden;
    arch.latent_dim = config.latent_dim;
    arch.activation = config.activation;
    model.net = RepresentationNet::initialize(arch, derive_seed(config.seed, 0));
  }

  const Matrix xs = model.x_standardizer.apply(data.x);
  std::array<Matrix, 2> arm_x;
  std::array<Vector, 2> arm_y;
  for (int t = 0; t < 2; ++t) {
    const std::vector<Index> rows = data.arm_rows(t);
    arm_x[t].resize(static_cast<Index>(rows.size()), xs.cols());
    arm_y[t].resize(static_cast<Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
      arm_x[t].row(k) = xs.row(rows[k]);
      arm_y[t](k) = (data.y(rows[k]) - model.y_mean) / model.y_scale;
    }
  }

  // Raw (pre-softplus) precisions: beta_0, beta_1, lambda_0, lambda_1.
  std::array<Matrix, 4> raw;
  for (int t = 0; t < 2; ++t) {
    raw[t] = Matrix::Constant(1, 1, inverse_softplus(config.initial_noise_precision));
    raw[2 + t] =
        Matrix::Constant(1, 1, inverse_softplus(config.initial_prior_precision));
  }

  std::vector<Matrix*> params;
  if (!config.freeze_representation) params = model.net.parameters();
  const std::size_t net_param_count = params.size();
  if (config.learn_precisions) {
    for (Matrix& r : raw) params.push_back(&r);
  }
  Adam adam{config.adam_beta1, config.adam_beta2, config.adam_epsilon,
            config.learning_rate, {}, {}, 0};

  double best = std::numeric_limits<double>::infinity();
  int since_best = 0;
  for (int step = 1; step <= config.steps; ++step) {
    std::array<double, 2> fixed_beta{}, fixed_lambda{};
    if (!config.learn_precisions) {
      for (int t = 0; t < 2; ++t) {
        std::tie(fixed_beta[t], fixed_lambda[t]) = best_precisions(
            model.net.encode(arm_x[t]), arm_y[t], config.precision_grid);
      }
    }

    Tape tape;
    const NetBinding binding = model.net.bind(tape);
    std::array<Var, 4> raw_vars;
    std::array<Var, 2> beta, lambda;
    for (int t = 0; t < 2; ++t) {
      if (config.learn_precisions) {
        raw_vars[t] = tape.variable(raw[t]);
        raw_vars[2 + t] = tape.variable(raw[2 + t]);
        beta[t] = softplus(raw_vars[t]);
        lambda[t] = softplus(raw_vars[2 + t]);
      } else {
        beta[t] = tape.constant(fixed_beta[t]);
        lambda[t] = tape.constant(fixed_lambda[t]);
      }
    }
    ObjectiveVars objective;
    try {
      objective = build_objective(
          binding, beta, lambda, tape.constant(arm_x[0]), tape.constant(arm_y[0]),
          tape.constant(arm_x[1]), tape.constant(arm_y[1]), config.alpha1,
          config.alpha2);
    } catch (const NumericalError& e) {
      throw TrainingError(e.what(), step);
    }
    const LossBreakdown values = objective.values();
    if (!std::isfinite(values.fin)) {
      throw TrainingError("non-finite training loss", step);
    }
    model.history.push_back(values);

    tape.backward(objective.fin);
    std::vector<Matrix> grads;
    grads.reserve(params.size());
    if (!config.freeze_representation) {
      std::size_t layer = 0;
      for (const auto* group : {&binding.encoder_weights, &binding.decoder_weights}) {
        const auto& biases = group == &binding.encoder_weights
                                 ? binding.encoder_biases
                                 : binding.decoder_biases;
        for (std::size_t i = 0; i < group->size(); ++i, ++layer) {
          grads.push_back(tape.gradient((*group)[i]));
          grads.push_back(tape.gradient(biases[i]));
        }
      }
    }
    if (config.learn_precisions) {
      for (const Var& r : raw_vars) grads.push_back(tape.gradient(r));
    }
    for (const Matrix& g : grads) {
      if (!g.allFinite()) throw TrainingError("non-finite gradient", step);
    }
    if (grads.size() != params.size() ||
        (config.freeze_representation && net_param_count != 0)) {
      throw TrainingError("internal parameter/gradient mismatch", step);
    }
    if (!params.empty()) adam.step(params, grads);

    if (config.patience > 0) {
      if (values.fin < best - 1e-10 * std::max(1.0, std::abs(best))) {
        best = values.fin;
        since_best = 0;
      } else if (++since_best >= config.patience) {
        break;
      }
    }
  }

  std::array<double, 2> final_beta{}, final_lambda{};
  for (int t = 0; t < 2; ++t) {
    if (config.learn_precisions) {
      final_beta[t] = softplus(raw[t](0, 0));
      final_lambda[t] = softplus(raw[2 + t](0, 0));
    } else {
      std::tie(final_beta[t], final_lambda[t]) = best_precisions(
          model.net.encode(arm_x[t]), arm_y[t], config.precision_grid);
    }
    model.heads[t] = fit_posterior(model.net.encode(arm_x[t]), arm_y[t],
                                   final_beta[t], final_lambda[t], t);
  }
  return model;
}

SelectionResult select_hyperparams(
    const Dataset& data, const std::vector<std::pair<double, double>>& grid,
    int folds, const TrainConfig& base, const EffectLearner& learner) {
  if (grid.empty()) throw ConfigError("select_hyperparams: grid is empty");
  if (folds < 2) throw ConfigError("select_hyperparams: folds must be >= 2");
  for (auto [a1, a2] : grid) {
    if (!(a1 >= 0.0) || !(a2 >= 0.0)) {
      throw ConfigError("select_hyperparams: grid weights must be >= 0");
    }
  }
  data.validate();

  EffectLearner fit = learner;
  if (!fit) {
    fit = [&base](const Dataset& train_set, const Matrix& x_eval, double a1,
                  double a2, std::uint64_t seed) {
      TrainConfig c = base;
      c.alpha1 = a1;
      c.alpha2 = a2;
      c.seed = seed;
      return Vector(train(train_set, c).predict(x_eval).tau());
    };
  }

  const Index n = data.size();
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(derive_seed(base.seed, 1));
  for (std::size_t i = order.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(order[i - 1], order[pick(rng)]);
  }
  std::vector<int> fold_of(n);
  for (Index k = 0; k < n; ++k) fold_of[order[k]] = static_cast<int>(k % folds);
  const Matrix z = Standardizer::fit(data.x).apply(data.x);

  SelectionResult result;
  std::vector<double> totals(grid.size(), 0.0);
  for (int f = 0; f < folds; ++f) {
    std::vector<Index> train_rows, val_rows;
    for (Index i = 0; i < n; ++i) (fold_of[i] == f ? val_rows : train_rows).push_back(i);
    const Dataset train_set = data.subset(train_rows);
    const Dataset val = data.subset(val_rows);
    if (val.arm_count(0) == 0 || val.arm_count(1) == 0 ||
        train_set.arm_count(0) == 0 || train_set.arm_count(1) == 0) {
      warn("select_hyperparams: fold " + std::to_string(f) +
           " lacks a treatment arm; skipped");
      continue;
    }

    // Nearest-neighbour imputation of the missing outcome.
    Vector imputed(val.size());
    for (Index i = 0; i < val.size(); ++i) {
      const int arm = val.t[i];
      double best_d = std::numeric_limits<double>::infinity();
      Index best_j = -1;
      for (Index j = 0; j < val.size(); ++j) {
        if (val.t[j] == arm) continue;
        const double d = (z.row(val_rows[i]) - z.row(val_rows[j])).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best_j = j;
        }
      }
      imputed(i) = arm == 1 ? val.y(i) - val.y(best_j) : val.y(best_j) - val.y(i);
    }

    for (std::size_t g = 0; g < grid.size(); ++g) {
      const std::uint64_t seed =
          derive_seed(base.seed, 1000 + static_cast<std::uint64_t>(f) * grid.size() + g);
      const Vector tau_hat = fit(train_set, val.x, grid[g].first, grid[g].second, seed);
      totals[g] += pehe_hat(tau_hat, imputed);
    }
    ++result.folds_used;
  }
  if (result.folds_used == 0) {
    throw SelectionError("select_hyperparams: every fold was skipped");
  }

  result.scores.resize(grid.size());
  std::size_t best = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    result.scores[g] = totals[g] / result.folds_used;
    const auto key = [&](std::size_t i) {
      return std::tuple(result.scores[i], grid[i].first + grid[i].second,
                        grid[i].first, grid[i].second);
    };
    if (key(g) < key(best)) best = g;
  }
  result.alpha1 = grid[best].first;
  result.alpha2 = grid[best].second;
  return result;
}

}  // namespace dklite
