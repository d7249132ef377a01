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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "dklite/data.hpp"
#include "dklite/error.hpp"
#include "dklite/log.hpp"

namespace dklite {
namespace {

double integrate(const DensityGrid& g, int arm) {
  // Trapezoid rule on the grid the diagnostics use.
  const double step = (g.hi - g.lo) / (g.points - 1);
  double s = 0.0;
  for (int i = 0; i < g.points; ++i) {
    const double w = (i == 0 || i == g.points - 1) ? 0.5 : 1.0;
    s += w * g.joint(g.lo + i * step, arm);
  }
  return s * step;
}

TEST(Sinc, NormalizedConvention) {
  EXPECT_EQ(sinc(0.0), 1.0);
  EXPECT_NEAR(sinc(1.0), 0.0, 1e-15);
  EXPECT_NEAR(sinc(0.5), 2.0 / std::numbers::pi, 1e-15);
}

TEST(GenerateToy, NoiselessOutcomeAtZero) {
  GeneratorSpec spec = GeneratorSpec::defaults(Family::kToyRed, 1);
  spec.noise_sd = 0.0;
  const Dataset d = generate_toy(spec);
  for (Index i = 0; i < d.size(); ++i) EXPECT_EQ(d.y(i), sinc(4.0 * d.x(i, 0)));
  EXPECT_EQ(sinc(4.0 * 0.0), 1.0);
}

TEST(GenerateToy, RedSupportIsSharedAndTruncated) {
  const GeneratorSpec spec = GeneratorSpec::defaults(Family::kToyRed, 2);
  const Dataset d = generate_toy(spec);
  EXPECT_EQ(d.size(), 500);
  EXPECT_EQ(d.dim(), 1);
  EXPECT_GE(d.x.minCoeff(), -2.0);
  EXPECT_LE(d.x.maxCoeff(), 2.0);
  const auto grid = density_grid(spec);
  ASSERT_TRUE(grid.has_value());
  EXPECT_TRUE(std::isfinite(sup_density_ratio(*grid, 0)));
  EXPECT_TRUE(std::isfinite(sup_density_ratio(*grid, 1)));
}

TEST(GenerateToy, GreenDinfExceedsRed) {
  const auto red = density_grid(GeneratorSpec::defaults(Family::kToyRed));
  const auto green = density_grid(GeneratorSpec::defaults(Family::kToyGreen));
  for (int t = 0; t < 2; ++t) {
    EXPECT_GT(sup_density_ratio(*green, t), sup_density_ratio(*red, t));
  }
}

TEST(GenerateToy, DensitiesIntegrateToOne) {
  for (Family f : {Family::kToyRed, Family::kToyGreen}) {
    const GeneratorSpec spec = GeneratorSpec::defaults(f);
    const auto grid = density_grid(spec);
    ASSERT_TRUE(grid.has_value());
    const double total = integrate(*grid, 0) + integrate(*grid, 1);
    EXPECT_GE(total, 0.99) << to_string(f);
    EXPECT_LE(total, 1.01) << to_string(f);
    for (int t = 0; t < 2; ++t) {
      const double p_t = t == 1 ? spec.treated_fraction : 1.0 - spec.treated_fraction;
      EXPECT_NEAR(integrate(*grid, t) / p_t, 1.0, 0.01);
    }
  }
}

TEST(GenerateToy, RejectsNonToyFamily) {
  EXPECT_THROW(generate_toy(GeneratorSpec::defaults(Family::kIhdpLike)), ConfigError);
}

TEST(GenerateIhdpLike, ShapeAndConsistency) {
  const Dataset d = generate_ihdp_like(GeneratorSpec::defaults(Family::kIhdpLike, 3));
  EXPECT_EQ(d.size(), 747);
  EXPECT_EQ(d.dim(), 25);
  ASSERT_TRUE(d.has_potential_outcomes());
  ASSERT_TRUE(d.true_effect().has_value());
  EXPECT_NO_THROW(d.validate());
  EXPECT_GT(d.arm_count(0), 0);
  EXPECT_GT(d.arm_count(1), 0);
}

TEST(GenerateIhdpLike, NoiselessEffectEqualsOutcomeGap) {
  GeneratorSpec spec = GeneratorSpec::defaults(Family::kIhdpLike, 4);
  spec.noise_sd = 0.0;
  const Dataset d = generate_ihdp_like(spec);
  const Vector gap = *d.y1 - *d.y0;
  EXPECT_EQ(*d.true_effect(), gap);
  EXPECT_NEAR(d.true_effect()->mean(), spec.ate, 1e-9);
}

TEST(GenerateIhdpLike, BitExactPerSeed) {
  const Dataset a = generate(GeneratorSpec::defaults(Family::kIhdpLike, 5));
  const Dataset b = generate(GeneratorSpec::defaults(Family::kIhdpLike, 5));
  const Dataset c = generate(GeneratorSpec::defaults(Family::kIhdpLike, 6));
  EXPECT_EQ(a.true_effect()->mean(), b.true_effect()->mean());
  EXPECT_EQ(format_csv(a), format_csv(b));
  EXPECT_NE(format_csv(a), format_csv(c));
}

TEST(GenerateIhdpLike, BinaryAndContinuousColumns) {
  const GeneratorSpec spec = GeneratorSpec::defaults(Family::kIhdpLike, 7);
  const Dataset d = generate(spec);
  for (Index j = spec.continuous; j < spec.dim; ++j) {
    for (Index i = 0; i < d.size(); ++i) {
      EXPECT_TRUE(d.x(i, j) == 0.0 || d.x(i, j) == 1.0);
    }
  }
}

TEST(GenerateIhdpLike, RejectsInvalidDims) {
  GeneratorSpec spec = GeneratorSpec::defaults(Family::kIhdpLike);
  spec.dim = 0;
  EXPECT_THROW(generate(spec), ConfigError);
}

TEST(GeneratorSpec, JsonRoundTrip) {
  for (Family f : {Family::kToyRed, Family::kToyGreen, Family::kIhdpLike}) {
    const GeneratorSpec s = GeneratorSpec::defaults(f, 9);
    EXPECT_EQ(GeneratorSpec::from_json(s.to_json()).to_json(), s.to_json());
  }
  EXPECT_THROW(family_from_string("toy_blue"), ConfigError);
}

TEST(Csv, GoldenRoundTrip) {
  const std::string text =
      "x1,x2,t,yf,y0,y1\n"
      "0.5,-1,1,2.25,1,2.25\n"
      "1e-08,3,0,0.1,0.1,7\n";
  const Dataset d = parse_csv(text, "golden");
  EXPECT_EQ(d.size(), 2);
  EXPECT_EQ(d.dim(), 2);
  EXPECT_EQ(d.x(1, 0), 1e-8);
  EXPECT_EQ(d.t, (std::vector<int>{1, 0}));
  EXPECT_EQ(d.y(0), 2.25);
  EXPECT_EQ((*d.y1)(1), 7.0);
  EXPECT_EQ(format_csv(d), text);
}

TEST(Csv, NonBinaryTreatmentCitesLine) {
  const std::string text = "x1,t,yf\n0.1,0,1\n0.2,2,1\n";
  try {
    parse_csv(text);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Csv, MalformedInputs) {
  EXPECT_THROW(parse_csv("x1,t\n0,1\n"), ParseError);                // no yf
  EXPECT_THROW(parse_csv("x1,t,yf\n0,1\n"), ParseError);             // short row
  EXPECT_THROW(parse_csv("x1,t,yf\nabc,1,0\n"), ParseError);         // not a number
  EXPECT_THROW(parse_csv("x1,t,yf,y0\n0,1,0,0\n"), ParseError);      // y0 without y1
  EXPECT_THROW(parse_csv("x1,t,yf,y0,y1\n0,1,5,0,1\n"), ParseError); // inconsistent
  EXPECT_THROW(load_csv("/nonexistent/file.csv"), IoError);
}

TEST(Csv, WriteLoadIsByteIdentical) {
  const Dataset d = generate(GeneratorSpec::defaults(Family::kIhdpLike, 11));
  const auto path = std::filesystem::temp_directory_path() / "dklite_roundtrip.csv";
  write_csv(d, path.string());
  const Dataset back = load_csv(path.string());
  EXPECT_EQ(format_csv(back), format_csv(d));
  EXPECT_EQ(back.x, d.x);
  EXPECT_EQ(*back.mu1, *d.mu1);
  std::filesystem::remove(path);
}

TEST(Split, SizesAndDeterminism) {
  Dataset d = generate(GeneratorSpec::defaults(Family::kToyRed, 12)).subset(
      {0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  const Split a = split(d, 0.8, 3);
  EXPECT_EQ(a.train.size(), 8);
  EXPECT_EQ(a.test.size(), 2);
  const Split b = split(d, 0.8, 3);
  EXPECT_EQ(a.train_rows, b.train_rows);
  EXPECT_EQ(a.test_rows, b.test_rows);
}

TEST(Split, StratificationPreservesProportions) {
  const Dataset d = generate(GeneratorSpec::defaults(Family::kIhdpLike, 13));
  for (double ratio : {0.5, 0.7, 0.8, 0.9}) {
    const Split s = split(d, ratio, 1);
    EXPECT_EQ(s.train.size() + s.test.size(), d.size());
    for (int t = 0; t < 2; ++t) {
      const double target = ratio * static_cast<double>(d.arm_count(t));
      EXPECT_LE(std::abs(static_cast<double>(s.train.arm_count(t)) - target), 1.0);
      EXPECT_GT(s.test.arm_count(t), 0);
    }
    std::vector<Index> all = s.train_rows;
    all.insert(all.end(), s.test_rows.begin(), s.test_rows.end());
    std::sort(all.begin(), all.end());
    for (Index i = 0; i < d.size(); ++i) EXPECT_EQ(all[i], i);
  }
}

TEST(Split, TinyArmFallsBackWithWarning) {
  Dataset d = generate(GeneratorSpec::defaults(Family::kToyRed, 14));
  std::vector<Index> rows;
  for (Index i = 0; i < d.size() && rows.size() < 10; ++i) {
    if (d.t[i] == 0) rows.push_back(i);
  }
  for (Index i = 0; i < d.size(); ++i) {
    if (d.t[i] == 1) {
      rows.push_back(i);
      break;
    }
  }
  const Dataset small = d.subset(rows);
  int warnings = 0;
  ScopedWarningSink sink([&](const std::string&) { ++warnings; });
  const Split s = split(small, 0.8, 1);
  EXPECT_EQ(warnings, 1);
  EXPECT_EQ(s.train.size() + s.test.size(), small.size());
}

TEST(Split, RejectsBadRatio) {
  const Dataset d = generate(GeneratorSpec::defaults(Family::kToyRed, 15));
  EXPECT_THROW(split(d, 0.0, 1), ConfigError);
  EXPECT_THROW(split(d, 1.0, 1), ConfigError);
}

TEST(Dataset, ValidateRejectsNonBinaryTreatment) {
  Dataset d = generate(GeneratorSpec::defaults(Family::kToyRed, 16));
  d.t[0] = 3;
  EXPECT_THROW(d.validate(), DataError);
}

}  // namespace
}  // namespace dklite
