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

#include "dklite/metrics.hpp"

#include <cmath>
#include <string>

#include "dklite/error.hpp"

namespace dklite {
namespace {

void require_lengths(Index a, Index b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": length " + std::to_string(a) +
                         " vs " + std::to_string(b));
  }
  if (a == 0) throw DataError(std::string(what) + ": no units");
}

}  // namespace

PredictionSet PredictionSet::subset(const std::vector<Index>& rows) const {
  PredictionSet out;
  const Index n = static_cast<Index>(rows.size());
  for (auto [dst, src] : {std::pair{&out.mu0, &mu0}, std::pair{&out.var0, &var0},
                          std::pair{&out.mu1, &mu1}, std::pair{&out.var1, &var1}}) {
    dst->resize(n);
    for (Index k = 0; k < n; ++k) (*dst)(k) = (*src)(rows[k]);
  }
  return out;
}

double pehe_hat(const Vector& tau_hat, const Vector& tau) {
  require_lengths(tau_hat.size(), tau.size(), "pehe_hat");
  return (tau - tau_hat).squaredNorm() / static_cast<double>(tau.size());
}

double pehe_tilde(const Vector& tau_hat, const Vector& y1, const Vector& y0) {
  require_lengths(tau_hat.size(), y1.size(), "pehe_tilde");
  require_lengths(y1.size(), y0.size(), "pehe_tilde");
  if (!y1.allFinite() || !y0.allFinite()) {
    throw DataError("pehe_tilde: missing potential outcome");
  }
  return (y1 - y0 - tau_hat).squaredNorm() / static_cast<double>(y1.size());
}

PolicyRisk policy_risk(const Vector& tau_hat, const std::vector<int>& t,
                       const Vector& y) {
  require_lengths(tau_hat.size(), static_cast<Index>(t.size()), "policy_risk");
  require_lengths(tau_hat.size(), y.size(), "policy_risk");
  if ((y.array() < 0.0).any() || (y.array() > 1.0).any()) {
    throw DataError("policy_risk: outcomes must lie in [0, 1]");
  }
  const Index n = y.size();
  Index policy_treat = 0;
  std::array<double, 2> cell_sum{0.0, 0.0};
  std::array<Index, 2> cell_count{0, 0};
  for (Index i = 0; i < n; ++i) {
    const int policy = tau_hat(i) > 0.0 ? 1 : 0;
    policy_treat += policy;
    if (t[i] == policy) {
      cell_sum[policy] += y(i);
      ++cell_count[policy];
    }
  }
  const std::array<double, 2> p = {
      static_cast<double>(n - policy_treat) / static_cast<double>(n),
      static_cast<double>(policy_treat) / static_cast<double>(n)};
  PolicyRisk out;
  double value = 0.0;
  for (int a = 0; a < 2; ++a) {
    if (cell_count[a] > 0) {
      value += cell_sum[a] / static_cast<double>(cell_count[a]) * p[a];
    } else if (p[a] > 0.0) {
      out.partially_identified = true;
    }
  }
  out.value = 1.0 - value;
  return out;
}

double ate_error(const Vector& tau_hat, const Vector& tau) {
  require_lengths(tau_hat.size(), tau.size(), "ate_error");
  return std::abs(tau_hat.mean() - tau.mean());
}

}  // namespace dklite
