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

#ifndef DKLITE_DATA_HPP_
#define DKLITE_DATA_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dklite/objective.hpp"
#include "dklite/tensor.hpp"

namespace dklite {

enum class Family { kToyRed, kToyGreen, kIhdpLike };

std::string to_string(Family family);
// Throws ConfigError for unknown names.
Family family_from_string(const std::string& name);

// Covariate density of one arm: a normal, optionally truncated to [lo, hi].
struct ArmDensity {
  double mean = 0.0;
  double sd = 1.0;
  bool truncated = false;
  double lo = 0.0;
  double hi = 0.0;

  double pdf(double x) const;
};

struct GeneratorSpec {
  Family family = Family::kToyRed;
  int n = 500;
  double noise_sd = 0.1;
  std::uint64_t seed = 0;

  // Toy populations: p(t = 1) and x | t for control (0) and treated (1).
  double treated_fraction = 0.5;
  std::array<ArmDensity, 2> arms;

  // IHDP-like design.
  int dim = 25;
  int continuous = 6;
  int confounders = 8;
  double propensity_intercept = -1.0;
  double clip_lo = 0.05;
  double clip_hi = 0.95;
  double offset = 0.5;
  double ate = 4.0;

  // Calibrated defaults for a family.
  static GeneratorSpec defaults(Family family, std::uint64_t seed = 0);

  nlohmann::json to_json() const;
  static GeneratorSpec from_json(const nlohmann::json& j);
};

// p(x, t) = p(t) p(x | t) for toy families, with a grid covering the support.
// Empty for families without a known covariate density.
std::optional<DensityGrid> density_grid(const GeneratorSpec& spec,
                                        int points = 10000);

// Covariates, binary treatment and factual outcome per unit. Simulated data
// also carries both potential outcomes (y0, y1) and their noiseless means
// (mu0, mu1), so the true effect is mu1 - mu0.
struct Dataset {
  std::string name;
  Matrix x;
  std::vector<int> t;
  Vector y;
  std::optional<Vector> y0, y1;
  std::optional<Vector> mu0, mu1;
  std::optional<GeneratorSpec> generator;
  std::uint64_t seed = 0;

  Index size() const { return x.rows(); }
  Index dim() const { return x.cols(); }
  Index arm_count(int arm) const;
  std::vector<Index> arm_rows(int arm) const;
  Matrix arm_x(int arm) const;
  Vector arm_y(int arm) const;
  std::optional<Vector> true_effect() const;
  bool has_potential_outcomes() const { return y0 && y1; }

  Dataset subset(const std::vector<Index>& rows) const;

  // Throws DataError on shape mismatch, non-binary t, non-finite values or a
  // factual outcome that disagrees with the recorded potential outcome.
  void validate() const;
};

// Normalized sinc: sin(pi x) / (pi x), sinc(0) = 1.
double sinc(double x);

Dataset generate_toy(const GeneratorSpec& spec);
Dataset generate_ihdp_like(const GeneratorSpec& spec);
// Dispatches on spec.family.
Dataset generate(const GeneratorSpec& spec);

// Header x1..xd,t,yf[,y0,y1][,mu0,mu1]. Throws ParseError with the line
// number on malformed input and IoError when the file cannot be read.
Dataset load_csv(const std::string& path);
Dataset parse_csv(const std::string& text, const std::string& name = "");
void write_csv(const Dataset& data, const std::string& path);
std::string format_csv(const Dataset& data);

struct Split {
  Dataset train;
  Dataset test;
  std::vector<Index> train_rows;
  std::vector<Index> test_rows;
};

// Stratified by arm; train size is round(ratio * N). Falls back to an
// unstratified split (with a warning) when an arm has fewer than 2 units.
Split split(const Dataset& data, double ratio, std::uint64_t seed);

}  // namespace dklite

#endif  // DKLITE_DATA_HPP_
