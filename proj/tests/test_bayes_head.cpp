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
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "dklite/bayes_head.hpp"
#include "dklite/error.hpp"
#include "oracles.hpp"

namespace dklite {
namespace {

TEST(FitPosterior, EmptyDataRecoversPrior) {
  const PosteriorHead h = fit_posterior(Matrix::Zero(0, 3), Vector::Zero(0), 2.0, 1.0);
  EXPECT_EQ(h.mean, Vector::Zero(3));
  EXPECT_EQ(h.precision, Matrix::Identity(3, 3));
}

TEST(FitPosterior, OneByOneHandSolve) {
  const PosteriorHead h = fit_posterior(Matrix::Ones(1, 1), Vector::Ones(1), 1.0, 1.0);
  EXPECT_DOUBLE_EQ(h.precision(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(h.mean(0), 0.5);
}

TEST(FitPosterior, MatchesEliminationOracle) {
  std::mt19937_64 rng(1);
  const Matrix phi = oracle::random_matrix(rng, 5, 3);
  const Vector y = oracle::random_matrix(rng, 5, 1).col(0);
  const PosteriorHead h = fit_posterior(phi, y, 1.7, 0.4);
  const auto [mean, cov] = oracle::posterior(phi, y, 1.7, 0.4);
  EXPECT_LT((h.mean - mean).cwiseAbs().maxCoeff(), 1e-12);
  Matrix k = 1.7 * oracle::matmul(oracle::transpose(phi), phi);
  k.diagonal().array() += 0.4;
  EXPECT_LT((h.precision - k).cwiseAbs().maxCoeff(), 1e-12);
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(h.precision);
  EXPECT_GE(eig.eigenvalues().minCoeff(), 0.4 - 1e-12);
}

TEST(FitPosterior, Errors) {
  EXPECT_THROW(fit_posterior(Matrix::Ones(2, 1), Vector::Ones(2), 0.0, 1.0), DataError);
  EXPECT_THROW(fit_posterior(Matrix::Ones(2, 1), Vector::Ones(2), 1.0, -1.0), DataError);
  EXPECT_THROW(fit_posterior(Matrix::Ones(2, 1), Vector::Ones(3), 1.0, 1.0), DimensionError);
  Matrix bad = Matrix::Ones(2, 1);
  bad(1, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(fit_posterior(bad, Vector::Ones(2), 1.0, 1.0), DataError);
}

TEST(Predict, NullFeature) {
  const PosteriorHead h = fit_posterior(Matrix::Ones(2, 2), Vector::Ones(2), 1.0, 1.0);
  const Predictive p = predict(h, Vector::Zero(2));
  EXPECT_EQ(p.mean, 0.0);
  EXPECT_EQ(p.variance, 0.0);
}

TEST(Predict, PriorVariance) {
  const PosteriorHead h = fit_posterior(Matrix::Zero(0, 3), Vector::Zero(0), 1.0, 1.0);
  const Predictive p = predict(h, Vector::Unit(3, 0));
  EXPECT_EQ(p.mean, 0.0);
  EXPECT_DOUBLE_EQ(p.variance, 1.0);
}

TEST(Predict, OneByOneHandEvaluation) {
  const PosteriorHead h = fit_posterior(Matrix::Ones(1, 1), Vector::Ones(1), 1.0, 1.0);
  const Predictive p = predict(h, Vector::Ones(1));
  EXPECT_DOUBLE_EQ(p.mean, 0.5);
  EXPECT_DOUBLE_EQ(p.variance, 0.5);
}

TEST(Predict, MatchesOracleAndRows) {
  std::mt19937_64 rng(2);
  const Matrix phi = oracle::random_matrix(rng, 7, 4);
  const Vector y = oracle::random_matrix(rng, 7, 1).col(0);
  const PosteriorHead h = fit_posterior(phi, y, 0.8, 2.0);
  const auto [mean, cov] = oracle::posterior(phi, y, 0.8, 2.0);
  const Matrix query = oracle::random_matrix(rng, 3, 4);
  const PredictiveRows rows = predict_rows(h, query);
  for (Index i = 0; i < 3; ++i) {
    const Vector q = query.row(i).transpose();
    const Predictive p = predict(h, q);
    EXPECT_NEAR(p.mean, mean.dot(q), 1e-12);
    EXPECT_NEAR(p.variance, q.dot(oracle::matmul(cov, Matrix(q)).col(0)), 1e-12);
    EXPECT_NEAR(rows.mean(i), p.mean, 1e-12);
    EXPECT_NEAR(rows.variance(i), p.variance, 1e-12);
  }
  EXPECT_THROW(predict(h, Vector::Zero(3)), DimensionError);
  EXPECT_THROW(predict_rows(h, Matrix::Zero(2, 5)), DimensionError);
}

TEST(Predict, VarianceNonIncreasingAsRowsAreAdded) {
  std::mt19937_64 rng(3);
  const Matrix phi = oracle::random_matrix(rng, 12, 3);
  const Vector y = oracle::random_matrix(rng, 12, 1).col(0);
  const Vector q = oracle::random_matrix(rng, 3, 1).col(0);
  double previous = std::numeric_limits<double>::infinity();
  for (Index n = 0; n <= 12; ++n) {
    const double v = predict(fit_posterior(phi.topRows(n), y.head(n), 1.3, 0.7), q).variance;
    EXPECT_LE(v, previous + 1e-12);
    previous = v;
  }
}

TEST(Predict, LargePriorPrecisionLimit) {
  std::mt19937_64 rng(4);
  const Matrix phi = oracle::random_matrix(rng, 6, 2);
  const Vector y = oracle::random_matrix(rng, 6, 1).col(0);
  const Vector q = oracle::random_matrix(rng, 2, 1).col(0);
  const double lambda = 1e9;
  const PosteriorHead h = fit_posterior(phi, y, 1.0, lambda);
  EXPECT_LT(h.mean.norm(), 1e-7);
  EXPECT_NEAR(predict(h, q).variance * lambda, q.squaredNorm(), 1e-6 * q.squaredNorm());
}

TEST(KlToPrior, PriorHeadIsZero) {
  const PosteriorHead h = fit_posterior(Matrix::Zero(0, 2), Vector::Zero(0), 1.0, 3.0);
  EXPECT_NEAR(kl_to_prior(h), 0.0, 1e-15);
}

TEST(KlToPrior, OneByOneClosedForm) {
  const PosteriorHead h = fit_posterior(Matrix::Ones(1, 1), Vector::Ones(1), 1.0, 1.0);
  EXPECT_NEAR(kl_to_prior(h), 0.5 * (0.5 + 0.25 - 1.0 + std::log(2.0)), 1e-15);
  EXPECT_NEAR(kl_to_prior(h), 0.2215735, 1e-7);
}

TEST(KlToPrior, MatchesMonteCarlo) {
  std::mt19937_64 rng(5);
  const Matrix phi = oracle::random_matrix(rng, 6, 3);
  const Vector y = oracle::random_matrix(rng, 6, 1).col(0);
  const double lambda = 0.9;
  const PosteriorHead h = fit_posterior(phi, y, 1.4, lambda);
  const auto [mean, cov] = oracle::posterior(phi, y, 1.4, lambda);
  const Eigen::LLT<Matrix> llt(cov);
  const Matrix chol = llt.matrixL();
  const double logdet_cov = oracle::logdet(cov);
  const int d = 3;
  // ln q(w) - ln p(w) with w = m + L z: the quadratic form of q is |z|^2.
  std::normal_distribution<double> normal;
  const int draws = 1000000;
  double sum = 0.0, sum_sq = 0.0;
  Vector z(d);
  for (int s = 0; s < draws; ++s) {
    for (int k = 0; k < d; ++k) z(k) = normal(rng);
    const Vector w = mean + chol * z;
    const double log_q = -0.5 * (logdet_cov + z.squaredNorm());
    const double log_p = -0.5 * (-d * std::log(lambda) + lambda * w.squaredNorm());
    const double v = log_q - log_p;
    sum += v;
    sum_sq += v * v;
  }
  const double mc = sum / draws;
  const double se = std::sqrt((sum_sq / draws - mc * mc) / draws);
  EXPECT_NEAR(kl_to_prior(h), mc, 3.0 * se);
}

TEST(Predict, MatchesWeightSampling) {
  std::mt19937_64 rng(6);
  const Matrix phi = oracle::random_matrix(rng, 8, 3);
  const Vector y = oracle::random_matrix(rng, 8, 1).col(0);
  const PosteriorHead h = fit_posterior(phi, y, 2.0, 0.5);
  const Vector q = oracle::random_matrix(rng, 3, 1).col(0);
  const auto [mean, cov] = oracle::posterior(phi, y, 2.0, 0.5);
  const Matrix chol = Eigen::LLT<Matrix>(cov).matrixL();
  std::normal_distribution<double> normal;
  const int draws = 100000;
  std::vector<double> f(draws);
  Vector z(3);
  for (int s = 0; s < draws; ++s) {
    for (int k = 0; k < 3; ++k) z(k) = normal(rng);
    f[s] = (mean + chol * z).dot(q);
  }
  double m = 0.0;
  for (double v : f) m += v;
  m /= draws;
  double m2 = 0.0, m4 = 0.0;
  for (double v : f) {
    m2 += (v - m) * (v - m);
    m4 += std::pow(v - m, 4);
  }
  m2 /= draws - 1;
  m4 /= draws;
  const Predictive p = predict(h, q);
  EXPECT_NEAR(m, p.mean, 4.0 * std::sqrt(m2 / draws));
  EXPECT_NEAR(m2, p.variance, 4.0 * std::sqrt((m4 - m2 * m2) / draws));
}

}  // namespace
}  // namespace dklite
