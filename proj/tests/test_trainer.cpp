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

#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "dklite/baselines.hpp"
#include "dklite/error.hpp"
#include "dklite/log.hpp"
#include "dklite/trainer.hpp"
#include "oracles.hpp"

namespace dklite {
namespace {

TrainConfig quick_config(int steps = 150) {
  TrainConfig c;
  c.steps = steps;
  c.learning_rate = 3e-3;
  c.hidden = {16, 16};
  c.latent_dim = 8;
  return c;
}

Dataset toy(Family f, std::uint64_t seed, int n = 300) {
  GeneratorSpec spec = GeneratorSpec::defaults(f, seed);
  spec.n = n;
  return generate(spec);
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.steps = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainConfig{};
  c.learning_rate = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainConfig{};
  c.alpha2 = -1.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(TrainConfig, JsonRoundTrip) {
  TrainConfig c;
  c.alpha1 = 0.25;
  c.steps = 17;
  c.hidden = {3, 4, 5};
  c.activation = Activation::kIdentity;
  c.grid = {{0.0, 1.0}, {2.0, 3.0}};
  EXPECT_EQ(TrainConfig::from_json(c.to_json()).to_json(), c.to_json());
}

TEST(Train, ZeroStepsIsConfigError) {
  TrainConfig c = quick_config();
  c.steps = 0;
  EXPECT_THROW(train(toy(Family::kToyRed, 1, 50), c), ConfigError);
}

TEST(Train, SingleArmIsDataError) {
  Dataset d = toy(Family::kToyRed, 2, 50);
  std::vector<Index> treated = d.arm_rows(1);
  EXPECT_THROW(train(d.subset(treated), quick_config()), DataError);
}

TEST(Train, FrozenIdentityEncoderReducesToBayesianRidge) {
  const Dataset d = generate(GeneratorSpec::defaults(Family::kIhdpLike, 3)).subset(
      [] {
        std::vector<Index> rows(120);
        std::iota(rows.begin(), rows.end(), 0);
        return rows;
      }());
  const int dim = static_cast<int>(d.dim());
  Architecture arch;
  arch.input_dim = dim;
  arch.hidden = {};
  arch.latent_dim = dim;
  arch.activation = Activation::kIdentity;
  RepresentationNet identity = RepresentationNet::zeros(arch);
  identity.mutable_encoder()[0].weight = Matrix::Identity(dim, dim);
  identity.mutable_decoder()[0].weight = Matrix::Identity(dim, dim);

  TrainConfig c = quick_config(30);
  c.alpha1 = c.alpha2 = 0.0;
  c.freeze_representation = true;
  const FittedModel m = train(d, c, identity);
  EXPECT_EQ(m.net.encoder()[0].weight, Matrix::Identity(dim, dim));

  const Matrix xs = m.x_standardizer.apply(d.x);
  const PredictionSet pred = m.predict(d.x);
  for (int t = 0; t < 2; ++t) {
    Matrix phi(d.arm_count(t), dim);
    Vector y(d.arm_count(t));
    Index k = 0;
    for (Index i : d.arm_rows(t)) {
      phi.row(k) = xs.row(i);
      y(k++) = (d.y(i) - m.y_mean) / m.y_scale;
    }
    const auto [mean, cov] = oracle::posterior(phi, y, m.heads[t].noise_precision,
                                               m.heads[t].prior_precision);
    const Vector expected = (oracle::matmul(xs, Matrix(mean)).col(0).array() * m.y_scale +
                             m.y_mean).matrix();
    const Vector& got = t == 0 ? pred.mu0 : pred.mu1;
    EXPECT_LT((got - expected).cwiseAbs().maxCoeff(), 1e-8 * (1.0 + expected.cwiseAbs().maxCoeff()));
  }
}

TEST(Train, BitwiseDeterministic) {
  const Dataset d = toy(Family::kToyGreen, 4, 120);
  const TrainConfig c = quick_config(40);
  const FittedModel a = train(d, c);
  const FittedModel b = train(d, c);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t s = 0; s < a.history.size(); ++s) EXPECT_EQ(a.history[s].fin, b.history[s].fin);
  const auto pa = a.net.parameters();
  const auto pb = b.net.parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(*pa[i], *pb[i]);
  EXPECT_EQ(a.heads[1].mean, b.heads[1].mean);
}

TEST(Train, LossDecreasesOverSmoothingWindow) {
  const FittedModel m = train(toy(Family::kToyRed, 5), quick_config(200));
  ASSERT_EQ(m.history.size(), 200u);
  double first = 0.0, last = 0.0;
  for (int s = 0; s < 20; ++s) {
    first += m.history[s].fin;
    last += m.history[m.history.size() - 1 - s].fin;
  }
  EXPECT_LT(last, first);
}

TEST(Train, HeadsConsistentWithFinalNet) {
  const Dataset d = toy(Family::kToyRed, 6, 150);
  const FittedModel m = train(d, quick_config(30));
  const Matrix phi = m.net.encode(m.x_standardizer.apply(d.arm_x(1)));
  const Vector y = ((d.arm_y(1).array() - m.y_mean) / m.y_scale).matrix();
  const PosteriorHead h = fit_posterior(phi, y, m.heads[1].noise_precision,
                                        m.heads[1].prior_precision, 1);
  EXPECT_LT((h.mean - m.heads[1].mean).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Train, GridPrecisionsStayOnGrid) {
  TrainConfig c = quick_config(10);
  c.learn_precisions = false;
  c.precision_grid = {0.5, 4.0};
  const FittedModel m = train(toy(Family::kToyRed, 7, 100), c);
  for (const PosteriorHead& h : m.heads) {
    EXPECT_TRUE(h.noise_precision == 0.5 || h.noise_precision == 4.0);
    EXPECT_TRUE(h.prior_precision == 0.5 || h.prior_precision == 4.0);
  }
}

TEST(Train, DivergenceReportsStep) {
  TrainConfig c = quick_config(50);
  c.learning_rate = 1e12;
  try {
    train(toy(Family::kToyRed, 8, 100), c);
    FAIL() << "expected TrainingError";
  } catch (const TrainingError& e) {
    EXPECT_GE(e.step(), 1);
    EXPECT_NE(std::string(e.what()).find("step"), std::string::npos);
  }
}

TEST(Train, BeatsOls1OutOfSampleOnIhdpLike) {
  GeneratorSpec spec = GeneratorSpec::defaults(Family::kIhdpLike, 9);
  spec.n = 300;
  const Split s = split(generate(spec), 0.8, 9);
  TrainConfig c = quick_config(300);
  c.hidden = {50, 50};
  c.latent_dim = 25;
  const FittedModel m = train(s.train, c);
  const Vector tau = *s.test.true_effect();
  const double dk = pehe_hat(m.predict(s.test.x).tau(), tau);
  const double ols = pehe_hat(
      predict_baseline(fit_baseline(BaselineKind::kOls1, s.train), s.test.x).tau(), tau);
  EXPECT_LT(dk, ols);
}

TEST(SelectHyperparams, SingletonGrid) {
  const Dataset d = toy(Family::kToyRed, 10, 60);
  const EffectLearner zero = [](const Dataset&, const Matrix& x, double, double, std::uint64_t) {
    return Vector(Vector::Zero(x.rows()));
  };
  const SelectionResult r = select_hyperparams(d, {{0.3, 0.7}}, 3, TrainConfig{}, zero);
  EXPECT_EQ(r.alpha1, 0.3);
  EXPECT_EQ(r.alpha2, 0.7);
  EXPECT_EQ(r.folds_used, 3);
}

TEST(SelectHyperparams, DegenerateTieBreak) {
  // Every unit has a twin in the other arm with the same outcome, and the
  // learner ignores the weights, so all grid points score identically.
  Dataset d;
  std::mt19937_64 rng(11);
  const Matrix base = oracle::random_matrix(rng, 10, 2);
  d.x.resize(20, 2);
  d.y.resize(20);
  d.t.resize(20);
  for (Index i = 0; i < 10; ++i) {
    d.x.row(2 * i) = d.x.row(2 * i + 1) = base.row(i);
    d.y(2 * i) = d.y(2 * i + 1) = static_cast<double>(i);
    d.t[2 * i] = 0;
    d.t[2 * i + 1] = 1;
  }
  const EffectLearner perfect = [](const Dataset&, const Matrix& x, double, double,
                                   std::uint64_t) { return Vector(Vector::Zero(x.rows())); };
  TrainConfig base_config;
  base_config.seed = 2;
  const SelectionResult r =
      select_hyperparams(d, {{2.0, 2.0}, {1.0, 0.0}, {0.0, 1.0}}, 2, base_config, perfect);
  for (double s : r.scores) EXPECT_GE(s, 0.0);
  EXPECT_EQ(r.scores[0], r.scores[1]);
  EXPECT_EQ(r.scores[1], r.scores[2]);
  EXPECT_EQ(r.alpha1, 0.0);
  EXPECT_EQ(r.alpha2, 1.0);
}

TEST(SelectHyperparams, AllFoldsSkippedIsSelectionError) {
  Dataset d = toy(Family::kToyRed, 12, 200);
  std::vector<Index> rows = d.arm_rows(0);
  rows.resize(3);
  rows.push_back(d.arm_rows(1).front());
  d = d.subset(rows);
  int warnings = 0;
  ScopedWarningSink sink([&](const std::string&) { ++warnings; });
  const EffectLearner zero = [](const Dataset&, const Matrix& x, double, double, std::uint64_t) {
    return Vector(Vector::Zero(x.rows()));
  };
  EXPECT_THROW(select_hyperparams(d, {{0.0, 0.0}}, 4, TrainConfig{}, zero), SelectionError);
  EXPECT_EQ(warnings, 4);
}

TEST(SelectHyperparams, Preconditions) {
  const Dataset d = toy(Family::kToyRed, 13, 40);
  EXPECT_THROW(select_hyperparams(d, {}, 3, TrainConfig{}), ConfigError);
  EXPECT_THROW(select_hyperparams(d, {{0.0, 0.0}}, 1, TrainConfig{}), ConfigError);
}

TEST(SelectHyperparams, ReproducibleWithTraining) {
  const Dataset d = toy(Family::kToyRed, 14, 80);
  TrainConfig c = quick_config(15);
  c.seed = 5;
  std::vector<std::pair<double, double>> grid;
  for (double a : {0.0, 0.1, 1.0}) {
    for (double b : {0.0, 0.1, 1.0}) grid.emplace_back(a, b);
  }
  const SelectionResult a = select_hyperparams(d, grid, 3, c);
  const SelectionResult b = select_hyperparams(d, grid, 3, c);
  EXPECT_EQ(a.scores, b.scores);
  EXPECT_EQ(a.alpha1, b.alpha1);
  EXPECT_EQ(a.alpha2, b.alpha2);
}

}  // namespace
}  // namespace dklite
