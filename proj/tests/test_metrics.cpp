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

#include <random>

#include <gtest/gtest.h>

#include "dklite/error.hpp"
#include "dklite/metrics.hpp"
#include "oracles.hpp"

namespace dklite {
namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

TEST(PeheHat, Examples) {
  const Vector tau = vec({0.5, -2.0, 3.0});
  EXPECT_EQ(pehe_hat(tau, tau), 0.0);
  EXPECT_EQ(pehe_hat((tau.array() + 1.0).matrix(), tau), 1.0);
  EXPECT_EQ(pehe_hat(vec({0.0, 0.0}), vec({1.0, -1.0})), 1.0);
}

TEST(PeheHat, Errors) {
  EXPECT_THROW(pehe_hat(vec({1.0}), vec({1.0, 2.0})), DimensionError);
  EXPECT_THROW(pehe_hat(Vector(), Vector()), DataError);
}

TEST(PeheHat, PermutationAndShiftInvariance) {
  std::mt19937_64 rng(1);
  const Vector tau = oracle::random_matrix(rng, 9, 1).col(0);
  const Vector hat = oracle::random_matrix(rng, 9, 1).col(0);
  const double base = pehe_hat(hat, tau);
  EXPECT_NEAR(pehe_hat(hat.reverse(), tau.reverse()), base, 1e-15);
  EXPECT_NEAR(pehe_hat((hat.array() + 3.0).matrix(), (tau.array() + 3.0).matrix()), base, 1e-12);
}

TEST(PeheTilde, Examples) {
  const Vector y1 = vec({1.0, 1.0}), y0 = vec({0.0, 0.0});
  EXPECT_EQ(pehe_tilde(y1 - y0, y1, y0), 0.0);
  EXPECT_EQ(pehe_tilde(vec({0.0, 0.0}), y1, y0), 1.0);
  // Without noise the observed and true effects coincide.
  const Vector tau_hat = vec({0.3, 0.9});
  EXPECT_EQ(pehe_tilde(tau_hat, y1, y0), pehe_hat(tau_hat, y1 - y0));
  EXPECT_THROW(pehe_tilde(tau_hat, vec({1.0}), y0), DimensionError);
}

TEST(PolicyRisk, Examples) {
  const std::vector<int> t = {1, 0};
  const Vector y = vec({1.0, 1.0});
  EXPECT_EQ(policy_risk(vec({1.0, -1.0}), t, y).value, 0.0);
  EXPECT_EQ(policy_risk(vec({-1.0, 1.0}), t, y).value, 1.0);

  const std::vector<int> t2 = {1, 1, 0};
  const PolicyRisk single = policy_risk(vec({2.0, 0.5, 1.0}), t2, vec({1.0, 1.0, 0.0}));
  EXPECT_EQ(single.value, 0.0);
}

TEST(PolicyRisk, EmptyCellFlagsPartialIdentification) {
  // Policy treats everyone but no treated unit exists: cell mean is 0.
  const PolicyRisk r = policy_risk(vec({1.0, 1.0}), {0, 0}, vec({1.0, 0.0}));
  EXPECT_TRUE(r.partially_identified);
  EXPECT_EQ(r.value, 1.0);
}

TEST(PolicyRisk, ZeroEffectMeansControl) {
  EXPECT_EQ(policy_risk(vec({0.0, 0.0}), {0, 1}, vec({1.0, 0.0})).value, 0.0);
}

TEST(PolicyRisk, DependsOnlyOnSign) {
  std::mt19937_64 rng(2);
  const Vector hat = oracle::random_matrix(rng, 30, 1).col(0);
  std::vector<int> t(30);
  Vector y(30);
  std::bernoulli_distribution coin(0.5);
  for (int i = 0; i < 30; ++i) {
    t[i] = coin(rng);
    y(i) = coin(rng) ? 1.0 : 0.0;
  }
  const double base = policy_risk(hat, t, y).value;
  EXPECT_EQ(policy_risk((hat * 17.0).eval(), t, y).value, base);
  EXPECT_EQ(policy_risk((hat * 1e-3).eval(), t, y).value, base);
}

TEST(PolicyRisk, RejectsOutcomesOutsideUnitInterval) {
  EXPECT_THROW(policy_risk(vec({1.0}), {1}, vec({2.0})), DataError);
  EXPECT_THROW(policy_risk(vec({1.0, 2.0}), {1}, vec({1.0, 0.0})), DimensionError);
}

TEST(AteError, Examples) {
  const Vector tau = vec({1.0, 3.0});
  EXPECT_EQ(ate_error(tau, tau), 0.0);
  EXPECT_EQ(ate_error((tau.array() - 2.5).matrix(), tau), 2.5);
  EXPECT_EQ(ate_error(vec({2.0, 2.0}), tau), 0.0);
  EXPECT_EQ(pehe_hat(vec({2.0, 2.0}), tau), 1.0);
}

TEST(PredictionSet, TauUncertaintyAndSubset) {
  PredictionSet p;
  p.mu0 = vec({1.0, 2.0, 3.0});
  p.mu1 = vec({2.0, 2.0, 5.0});
  p.var0 = vec({0.1, 0.2, 0.3});
  p.var1 = vec({0.4, 0.5, 0.6});
  EXPECT_EQ(p.tau(), vec({1.0, 0.0, 2.0}));
  EXPECT_EQ(p.uncertainty(), p.var0 + p.var1);
  const PredictionSet s = p.subset({2, 0});
  EXPECT_EQ(s.mu1, vec({5.0, 2.0}));
  EXPECT_EQ(s.var0, vec({0.3, 0.1}));
}

}  // namespace
}  // namespace dklite
