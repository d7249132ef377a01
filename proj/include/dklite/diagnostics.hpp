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

#ifndef DKLITE_DIAGNOSTICS_HPP_
#define DKLITE_DIAGNOSTICS_HPP_

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dklite/data.hpp"
#include "dklite/metrics.hpp"
#include "dklite/tensor.hpp"
#include "dklite/trainer.hpp"

namespace dklite {

// Median pairwise Euclidean distance over the rows of both samples; 1 when
// the median is 0.
double median_heuristic(const Matrix& a, const Matrix& b);

// Biased (V-statistic) MMD with kernel exp(-|x - y|^2 / (2 h^2)), returned as
// sqrt(max(0, MMD^2)). Rows are observations. h defaults to the median
// heuristic. Throws DataError on an empty sample.
double mmd(const Matrix& a, const Matrix& b,
           std::optional<double> bandwidth = std::nullopt);

// W1 between two empirical 1-D distributions. Throws DataError on an empty
// sample and DimensionError for matrices with more than one column.
double wasserstein_1d(const Vector& a, const Vector& b);
double wasserstein_1d(const Matrix& a, const Matrix& b);

struct OverlapReport {
  std::string population;
  double mmd = 0.0;
  double bandwidth = 1.0;
  double wasserstein = 0.0;
  // Mean posterior variance of arm t's head at the other arm's covariates,
  // in outcome units.
  std::array<double, 2> counterfactual_variance{};
  double mean_counterfactual_variance = 0.0;
  // Per-arm D_inf(P_{x,1-t} || P_{x,t}) and their maximum.
  std::array<std::optional<double>, 2> d_inf_arm;
  std::optional<double> d_inf;

  nlohmann::json to_json() const;
};

// Overlap between the control and treated covariates of `data`, plus the
// model's counterfactual variance. D_inf is filled when the dataset carries
// a generator with known densities.
OverlapReport overlap_report(const Dataset& data, const FittedModel& model,
                             std::optional<double> bandwidth = std::nullopt,
                             const std::string& population = "");

struct Figure2Result {
  OverlapReport red;
  OverlapReport green;
  bool mmd_ordered = false;          // green < red
  bool wasserstein_ordered = false;  // green < red
  bool variance_ordered = false;     // green > red
  bool d_inf_ordered = false;        // green > red; false if either is absent

  bool all() const {
    return mmd_ordered && wasserstein_ordered && variance_ordered && d_inf_ordered;
  }
  nlohmann::json to_json() const;
};

// Compares two populations with one MMD bandwidth (the median heuristic over
// all four covariate samples unless given). Orderings are reported, never
// raised.
Figure2Result figure2_study(const Dataset& red, const Dataset& green,
                            const FittedModel& red_model,
                            const FittedModel& green_model,
                            std::optional<double> bandwidth = std::nullopt);

// Plot-ready curves over a uniform grid for a 1-D population: columns
// x,density0,density1,mu0,var0,mu1,var1. Densities are empty when unknown.
std::string curve_csv(const Dataset& data, const FittedModel& model,
                      int points = 200);

struct Deferral {
  std::vector<Index> kept;
  std::vector<Index> deferred;
};

// Defers the ceil(fraction * N) units with the largest sigma_0^2 + sigma_1^2,
// ties to the lowest index. Both lists are sorted ascending. Throws
// ConfigError unless 0 <= fraction < 1.
Deferral defer_uncertain(const PredictionSet& predictions, double fraction);

// CSV with columns unit_id,t,y,phi_1..phi_k.
std::string format_embeddings(const FittedModel& model, const Dataset& data);
void export_embeddings(const FittedModel& model, const Dataset& data,
                       const std::string& path);

}  // namespace dklite

#endif  // DKLITE_DIAGNOSTICS_HPP_
