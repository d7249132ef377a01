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

#include "dklite/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include <fmt/format.h>

#include "dklite/error.hpp"

namespace dklite {
namespace {

void require_nonempty(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() == 0 || b.rows() == 0) {
    throw DataError(std::string(what) + ": empty sample");
  }
  if (a.cols() != b.cols()) {
    throw DimensionError(std::string(what) + ": samples differ in dimension (" +
                         std::to_string(a.cols()) + " vs " +
                         std::to_string(b.cols()) + ")");
  }
}

double mean_kernel(const Matrix& a, const Matrix& b, double inv_two_h2) {
  double total = 0.0;
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < b.rows(); ++j) {
      total += std::exp(-(a.row(i) - b.row(j)).squaredNorm() * inv_two_h2);
    }
  }
  return total / (static_cast<double>(a.rows()) * static_cast<double>(b.rows()));
}

std::optional<double> optional_max(const std::optional<double>& a,
                                   const std::optional<double>& b) {
  if (!a || !b) return std::nullopt;
  return std::max(*a, *b);
}

nlohmann::json optional_json(const std::optional<double>& v) {
  if (!v) return nullptr;
  if (std::isinf(*v)) return "inf";
  return *v;
}

}  // namespace

double median_heuristic(const Matrix& a, const Matrix& b) {
  Matrix pooled(a.rows() + b.rows(), a.cols());
  pooled << a, b;
  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(pooled.rows() * (pooled.rows() - 1) / 2));
  for (Index i = 0; i < pooled.rows(); ++i) {
    for (Index j = i + 1; j < pooled.rows(); ++j) {
      dist.push_back((pooled.row(i) - pooled.row(j)).norm());
    }
  }
  if (dist.empty()) return 1.0;
  const std::size_t mid = dist.size() / 2;
  std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid),
                   dist.end());
  double median = dist[mid];
  if (dist.size() % 2 == 0) {
    const double lower = *std::max_element(
        dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (median + lower);
  }
  return median > 0.0 ? median : 1.0;
}

double mmd(const Matrix& a, const Matrix& b, std::optional<double> bandwidth) {
  require_nonempty(a, b, "mmd");
  const double h = bandwidth ? *bandwidth : median_heuristic(a, b);
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw ConfigError("mmd: bandwidth must be positive and finite");
  }
  const double inv = 1.0 / (2.0 * h * h);
  const double sq = mean_kernel(a, a, inv) + mean_kernel(b, b, inv) -
                    2.0 * mean_kernel(a, b, inv);
  return std::sqrt(std::max(0.0, sq));
}

double wasserstein_1d(const Vector& a, const Vector& b) {
  if (a.size() == 0 || b.size() == 0) {
    throw DataError("wasserstein_1d: empty sample");
  }
  std::vector<double> sa(a.data(), a.data() + a.size());
  std::vector<double> sb(b.data(), b.data() + b.size());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  if (sa.size() == sb.size()) {
    double total = 0.0;
    for (std::size_t i = 0; i < sa.size(); ++i) total += std::abs(sa[i] - sb[i]);
    return total / static_cast<double>(sa.size());
  }
  // Integrate |F_a - F_b| between consecutive points of the merged sample.
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t i = 0, j = 0;
  double total = 0.0;
  double prev = std::min(sa.front(), sb.front());
  while (i < sa.size() || j < sb.size()) {
    const double next = j == sb.size() || (i < sa.size() && sa[i] <= sb[j])
                            ? sa[i]
                            : sb[j];
    total += std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb) *
             (next - prev);
    while (i < sa.size() && sa[i] == next) ++i;
    while (j < sb.size() && sb[j] == next) ++j;
    prev = next;
  }
  return total;
}

double wasserstein_1d(const Matrix& a, const Matrix& b) {
  if (a.cols() != 1 || b.cols() != 1) {
    throw DimensionError("wasserstein_1d: only one-dimensional samples are supported");
  }
  return wasserstein_1d(Vector(a.col(0)), Vector(b.col(0)));
}

nlohmann::json OverlapReport::to_json() const {
  nlohmann::json j;
  j["population"] = population;
  j["mmd"] = mmd;
  j["bandwidth"] = bandwidth;
  j["wasserstein"] = wasserstein;
  j["counterfactual_variance"] = counterfactual_variance;
  j["mean_counterfactual_variance"] = mean_counterfactual_variance;
  j["d_inf_arm"] = {optional_json(d_inf_arm[0]), optional_json(d_inf_arm[1])};
  j["d_inf"] = optional_json(d_inf);
  return j;
}

OverlapReport overlap_report(const Dataset& data, const FittedModel& model,
                             std::optional<double> bandwidth,
                             const std::string& population) {
  const Matrix x0 = data.arm_x(0);
  const Matrix x1 = data.arm_x(1);
  require_nonempty(x0, x1, "overlap_report");

  OverlapReport report;
  report.population = population.empty() ? data.name : population;
  report.bandwidth = bandwidth ? *bandwidth : median_heuristic(x0, x1);
  report.mmd = mmd(x0, x1, report.bandwidth);
  report.wasserstein = data.dim() == 1 ? wasserstein_1d(x0, x1) : 0.0;

  const PredictionSet on_treated = model.predict(x1);
  const PredictionSet on_control = model.predict(x0);
  report.counterfactual_variance[0] = on_treated.var0.mean();
  report.counterfactual_variance[1] = on_control.var1.mean();
  report.mean_counterfactual_variance =
      0.5 * (report.counterfactual_variance[0] + report.counterfactual_variance[1]);

  if (data.generator) {
    if (const auto grid = density_grid(*data.generator)) {
      for (int t = 0; t < 2; ++t) report.d_inf_arm[t] = sup_density_ratio(*grid, t);
      report.d_inf = optional_max(report.d_inf_arm[0], report.d_inf_arm[1]);
    }
  }
  return report;
}

nlohmann::json Figure2Result::to_json() const {
  nlohmann::json j;
  j["red"] = red.to_json();
  j["green"] = green.to_json();
  j["orderings"] = {{"mmd_green_lt_red", mmd_ordered},
                    {"wasserstein_green_lt_red", wasserstein_ordered},
                    {"counterfactual_variance_green_gt_red", variance_ordered},
                    {"d_inf_green_gt_red", d_inf_ordered}};
  return j;
}

Figure2Result figure2_study(const Dataset& red, const Dataset& green,
                            const FittedModel& red_model,
                            const FittedModel& green_model,
                            std::optional<double> bandwidth) {
  if (!bandwidth) bandwidth = median_heuristic(red.x, green.x);
  Figure2Result result;
  result.red = overlap_report(red, red_model, bandwidth, "red");
  result.green = overlap_report(green, green_model, bandwidth, "green");
  result.mmd_ordered = result.green.mmd < result.red.mmd;
  result.wasserstein_ordered = result.green.wasserstein < result.red.wasserstein;
  result.variance_ordered = result.green.mean_counterfactual_variance >
                            result.red.mean_counterfactual_variance;
  result.d_inf_ordered =
      result.red.d_inf && result.green.d_inf && *result.green.d_inf > *result.red.d_inf;
  return result;
}

std::string curve_csv(const Dataset& data, const FittedModel& model, int points) {
  if (data.dim() != 1) {
    throw DimensionError("curve_csv: only one-dimensional populations are supported");
  }
  if (points < 2) throw ConfigError("curve_csv: need at least 2 grid points");
  std::optional<DensityGrid> grid;
  if (data.generator) grid = density_grid(*data.generator);
  const double lo = grid ? grid->lo : data.x.minCoeff();
  const double hi = grid ? grid->hi : data.x.maxCoeff();

  Matrix xs(points, 1);
  for (int i = 0; i < points; ++i) {
    xs(i, 0) = lo + (hi - lo) * static_cast<double>(i) / (points - 1);
  }
  const PredictionSet pred = model.predict(xs);
  std::string out = "x,density0,density1,mu0,var0,mu1,var1\n";
  for (int i = 0; i < points; ++i) {
    const double x = xs(i, 0);
    const std::string d0 = grid ? fmt::format("{}", grid->joint(x, 0)) : "";
    const std::string d1 = grid ? fmt::format("{}", grid->joint(x, 1)) : "";
    out += fmt::format("{},{},{},{},{},{},{}\n", x, d0, d1, pred.mu0(i),
                       pred.var0(i), pred.mu1(i), pred.var1(i));
  }
  return out;
}

Deferral defer_uncertain(const PredictionSet& predictions, double fraction) {
  if (!(fraction >= 0.0 && fraction < 1.0)) {
    throw ConfigError("defer_uncertain: fraction must lie in [0, 1)");
  }
  const Index n = predictions.size();
  const Vector u = predictions.uncertainty();
  const auto count = static_cast<Index>(
      std::ceil(fraction * static_cast<double>(n) - 1e-9));

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&u](Index a, Index b) { return u(a) > u(b); });

  Deferral out;
  out.deferred.assign(order.begin(), order.begin() + std::max<Index>(0, count));
  out.kept.assign(order.begin() + std::max<Index>(0, count), order.end());
  std::sort(out.deferred.begin(), out.deferred.end());
  std::sort(out.kept.begin(), out.kept.end());
  return out;
}

std::string format_embeddings(const FittedModel& model, const Dataset& data) {
  const Matrix phi = model.embed(data.x);
  std::string out = "unit_id,t,y";
  for (Index k = 0; k < phi.cols(); ++k) out += fmt::format(",phi_{}", k + 1);
  out += '\n';
  for (Index i = 0; i < phi.rows(); ++i) {
    out += fmt::format("{},{},{}", i, data.t[static_cast<std::size_t>(i)], data.y(i));
    for (Index k = 0; k < phi.cols(); ++k) out += fmt::format(",{}", phi(i, k));
    out += '\n';
  }
  return out;
}

void export_embeddings(const FittedModel& model, const Dataset& data,
                       const std::string& path) {
  const std::string text = format_embeddings(model, data);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace dklite
