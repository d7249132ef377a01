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

#include "dklite/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "dklite/error.hpp"
#include "dklite/log.hpp"

namespace dklite {
namespace {

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double draw(const ArmDensity& d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(d.mean, d.sd);
  if (!d.truncated) return normal(rng);
  for (int attempt = 0; attempt < 1000000; ++attempt) {
    const double x = normal(rng);
    if (x >= d.lo && x <= d.hi) return x;
  }
  throw ConfigError("truncated normal: acceptance region has negligible mass");
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& field, int line, const std::string& col) {
  if (field.empty()) throw ParseError("empty value in column '" + col + "'", line);
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end != field.c_str() + field.size() || !std::isfinite(v)) {
    throw ParseError("invalid number '" + field + "' in column '" + col + "'",
                     line);
  }
  return v;
}

std::string fmt_double(double v) { return fmt::format("{}", v); }

}  // namespace

std::string to_string(Family family) {
  switch (family) {
    case Family::kToyRed:
      return "toy_red";
    case Family::kToyGreen:
      return "toy_green";
    case Family::kIhdpLike:
      return "ihdp_like";
  }
  return "unknown";
}

Family family_from_string(const std::string& name) {
  if (name == "toy_red") return Family::kToyRed;
  if (name == "toy_green") return Family::kToyGreen;
  if (name == "ihdp_like") return Family::kIhdpLike;
  throw ConfigError("unknown generator family '" + name +
                    "' (expected toy_red, toy_green or ihdp_like)");
}

double ArmDensity::pdf(double x) const {
  const double base = normal_pdf((x - mean) / sd) / sd;
  if (!truncated) return base;
  if (x < lo || x > hi) return 0.0;
  const double mass = normal_cdf((hi - mean) / sd) - normal_cdf((lo - mean) / sd);
  return base / mass;
}

GeneratorSpec GeneratorSpec::defaults(Family family, std::uint64_t seed) {
  GeneratorSpec spec;
  spec.family = family;
  spec.seed = seed;
  switch (family) {
    case Family::kToyRed:
      // Shared support [-2, 2]: the density ratio stays finite everywhere.
      spec.arms[0] = {-1.5, 1.0, true, -2.0, 2.0};
      spec.arms[1] = {1.5, 1.0, true, -2.0, 2.0};
      break;
    case Family::kToyGreen:
      // Close means, thin tails: small IPMs but almost no overlap.
      spec.arms[0] = {-0.3, 0.1, false, 0.0, 0.0};
      spec.arms[1] = {0.3, 0.1, false, 0.0, 0.0};
      break;
    case Family::kIhdpLike:
      spec.n = 747;
      spec.noise_sd = 1.0;
      break;
  }
  return spec;
}

nlohmann::json GeneratorSpec::to_json() const {
  nlohmann::json j;
  j["family"] = to_string(family);
  j["n"] = n;
  j["noise_sd"] = noise_sd;
  j["seed"] = seed;
  if (family == Family::kIhdpLike) {
    j["dim"] = dim;
    j["continuous"] = continuous;
    j["confounders"] = confounders;
    j["propensity_intercept"] = propensity_intercept;
    j["clip"] = {clip_lo, clip_hi};
    j["offset"] = offset;
    j["ate"] = ate;
  } else {
    j["treated_fraction"] = treated_fraction;
    for (int t = 0; t < 2; ++t) {
      const ArmDensity& a = arms[t];
      nlohmann::json arm{{"mean", a.mean}, {"sd", a.sd},
                         {"truncated", a.truncated}};
      if (a.truncated) arm["support"] = {a.lo, a.hi};
      j["arms"].push_back(arm);
    }
  }
  return j;
}

GeneratorSpec GeneratorSpec::from_json(const nlohmann::json& j) {
  try {
    GeneratorSpec spec =
        defaults(family_from_string(j.at("family").get<std::string>()));
    spec.n = j.at("n").get<int>();
    spec.noise_sd = j.at("noise_sd").get<double>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    if (spec.family == Family::kIhdpLike) {
      spec.dim = j.value("dim", spec.dim);
      spec.continuous = j.value("continuous", spec.continuous);
      spec.confounders = j.value("confounders", spec.confounders);
      spec.propensity_intercept =
          j.value("propensity_intercept", spec.propensity_intercept);
      if (j.contains("clip")) {
        spec.clip_lo = j["clip"].at(0).get<double>();
        spec.clip_hi = j["clip"].at(1).get<double>();
      }
      spec.offset = j.value("offset", spec.offset);
      spec.ate = j.value("ate", spec.ate);
    } else {
      spec.treated_fraction = j.value("treated_fraction", spec.treated_fraction);
      if (j.contains("arms")) {
        for (int t = 0; t < 2; ++t) {
          const auto& a = j["arms"].at(t);
          ArmDensity& d = spec.arms[t];
          d.mean = a.at("mean").get<double>();
          d.sd = a.at("sd").get<double>();
          d.truncated = a.value("truncated", false);
          if (d.truncated) {
            d.lo = a.at("support").at(0).get<double>();
            d.hi = a.at("support").at(1).get<double>();
          }
        }
      }
    }
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("generator spec: ") + e.what());
  }
}

std::optional<DensityGrid> density_grid(const GeneratorSpec& spec, int points) {
  if (spec.family == Family::kIhdpLike) return std::nullopt;
  DensityGrid grid;
  grid.points = points;
  grid.lo = std::numeric_limits<double>::infinity();
  grid.hi = -std::numeric_limits<double>::infinity();
  for (const ArmDensity& a : spec.arms) {
    grid.lo = std::min(grid.lo, a.truncated ? a.lo : a.mean - 8.0 * a.sd);
    grid.hi = std::max(grid.hi, a.truncated ? a.hi : a.mean + 8.0 * a.sd);
  }
  const std::array<ArmDensity, 2> arms = spec.arms;
  const double p1 = spec.treated_fraction;
  grid.joint = [arms, p1](double x, int t) {
    return (t == 1 ? p1 : 1.0 - p1) * arms[t].pdf(x);
  };
  return grid;
}

// ---------------------------------------------------------------------------

Index Dataset::arm_count(int arm) const {
  return std::count(t.begin(), t.end(), arm);
}

std::vector<Index> Dataset::arm_rows(int arm) const {
  std::vector<Index> rows;
  for (Index i = 0; i < size(); ++i) {
    if (t[i] == arm) rows.push_back(i);
  }
  return rows;
}

Matrix Dataset::arm_x(int arm) const {
  const std::vector<Index> rows = arm_rows(arm);
  Matrix out(static_cast<Index>(rows.size()), dim());
  for (std::size_t k = 0; k < rows.size(); ++k) out.row(k) = x.row(rows[k]);
  return out;
}

Vector Dataset::arm_y(int arm) const {
  const std::vector<Index> rows = arm_rows(arm);
  Vector out(static_cast<Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) out(k) = y(rows[k]);
  return out;
}

std::optional<Vector> Dataset::true_effect() const {
  if (!mu0 || !mu1) return std::nullopt;
  return Vector(*mu1 - *mu0);
}

Dataset Dataset::subset(const std::vector<Index>& rows) const {
  Dataset out;
  out.name = name;
  out.generator = generator;
  out.seed = seed;
  const Index n = static_cast<Index>(rows.size());
  out.x.resize(n, dim());
  out.t.resize(rows.size());
  out.y.resize(n);
  auto pick = [&](const std::optional<Vector>& src) -> std::optional<Vector> {
    if (!src) return std::nullopt;
    Vector v(n);
    for (Index k = 0; k < n; ++k) v(k) = (*src)(rows[k]);
    return v;
  };
  for (Index k = 0; k < n; ++k) {
    if (rows[k] < 0 || rows[k] >= size()) {
      throw DimensionError("Dataset::subset: row index out of range");
    }
    out.x.row(k) = x.row(rows[k]);
    out.t[k] = t[rows[k]];
    out.y(k) = y(rows[k]);
  }
  out.y0 = pick(y0);
  out.y1 = pick(y1);
  out.mu0 = pick(mu0);
  out.mu1 = pick(mu1);
  return out;
}

void Dataset::validate() const {
  const Index n = size();
  if (static_cast<Index>(t.size()) != n || y.size() != n) {
    throw DataError("dataset: x, t and y disagree in length");
  }
  for (const auto* v : {&y0, &y1, &mu0, &mu1}) {
    if (*v && (*v)->size() != n) {
      throw DataError("dataset: potential outcome column has wrong length");
    }
    if (*v && !(*v)->allFinite()) {
      throw DataError("dataset: non-finite potential outcome");
    }
  }
  if (y0.has_value() != y1.has_value() || mu0.has_value() != mu1.has_value()) {
    throw DataError("dataset: potential outcomes must come in pairs");
  }
  if (!x.allFinite() || !y.allFinite()) {
    throw DataError("dataset: non-finite covariate or outcome");
  }
  for (Index i = 0; i < n; ++i) {
    if (t[i] != 0 && t[i] != 1) {
      throw DataError("dataset: treatment of unit " + std::to_string(i) +
                      " is not binary");
    }
    if (y0) {
      const double expected = t[i] == 1 ? (*y1)(i) : (*y0)(i);
      if (std::abs(expected - y(i)) > 1e-9 * std::max(1.0, std::abs(y(i)))) {
        throw DataError("dataset: factual outcome of unit " +
                        std::to_string(i) +
                        " differs from its potential outcome");
      }
    }
  }
}

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double u = std::numbers::pi * x;
  return std::sin(u) / u;
}

Dataset generate_toy(const GeneratorSpec& spec) {
  if (spec.family != Family::kToyRed && spec.family != Family::kToyGreen) {
    throw ConfigError("generate_toy: family must be toy_red or toy_green");
  }
  if (spec.n < 1) throw ConfigError("generate_toy: n must be >= 1");
  if (!(spec.treated_fraction > 0.0 && spec.treated_fraction < 1.0)) {
    throw ConfigError("generate_toy: treated_fraction must be in (0, 1)");
  }
  std::mt19937_64 rng(spec.seed);
  std::bernoulli_distribution coin(spec.treated_fraction);
  std::normal_distribution<double> noise(0.0, 1.0);

  Dataset d;
  d.name = to_string(spec.family);
  d.seed = spec.seed;
  d.generator = spec;
  const Index n = spec.n;
  d.x.resize(n, 1);
  d.t.resize(n);
  d.y.resize(n);
  Vector y0(n), y1(n), mu(n);
  for (Index i = 0; i < n; ++i) {
    const int t = coin(rng) ? 1 : 0;
    const double x = draw(spec.arms[t], rng);
    const double f = sinc(4.0 * x);
    d.x(i, 0) = x;
    d.t[i] = t;
    mu(i) = f;
    y0(i) = f + spec.noise_sd * noise(rng);
    y1(i) = f + spec.noise_sd * noise(rng);
    d.y(i) = t == 1 ? y1(i) : y0(i);
  }
  d.y0 = y0;
  d.y1 = y1;
  d.mu0 = mu;
  d.mu1 = mu;
  d.validate();
  return d;
}

Dataset generate_ihdp_like(const GeneratorSpec& spec) {
  if (spec.family != Family::kIhdpLike) {
    throw ConfigError("generate_ihdp_like: family must be ihdp_like");
  }
  if (spec.n < 2 || spec.dim < 1 || spec.continuous < 0 ||
      spec.continuous > spec.dim || spec.confounders < 1 ||
      spec.confounders > spec.dim) {
    throw ConfigError("generate_ihdp_like: invalid dimensions");
  }
  if (!(spec.clip_lo > 0.0 && spec.clip_lo < spec.clip_hi &&
        spec.clip_hi < 1.0)) {
    throw ConfigError("generate_ihdp_like: propensity clip must satisfy 0 < lo < hi < 1");
  }
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const Index n = spec.n;
  const int d = spec.dim;

  std::vector<double> bernoulli_p(d, 0.0);
  for (int j = spec.continuous; j < d; ++j) {
    bernoulli_p[j] = 0.2 + 0.6 * uniform(rng);
  }

  // Confounders: half from the continuous block, the rest binary.
  std::vector<int> confounders;
  const int from_continuous = std::min(spec.continuous, spec.confounders / 2 +
                                                            spec.confounders % 2);
  for (int j = 0; j < from_continuous; ++j) confounders.push_back(j);
  for (int j = spec.continuous;
       j < d && static_cast<int>(confounders.size()) < spec.confounders; ++j) {
    confounders.push_back(j);
  }
  for (int j = from_continuous;
       static_cast<int>(confounders.size()) < spec.confounders; ++j) {
    confounders.push_back(j);
  }

  // Sparse outcome coefficients; confounders always enter the outcome.
  const std::array<double, 5> levels = {0.0, 0.1, 0.2, 0.3, 0.4};
  Vector b(d);
  for (int j = 0; j < d; ++j) {
    const double u = uniform(rng);
    b(j) = u < 0.6 ? 0.0 : levels[1 + std::min(3, static_cast<int>((u - 0.6) / 0.1))];
  }
  Vector gamma = Vector::Zero(d);
  for (int j : confounders) {
    if (b(j) == 0.0) b(j) = levels[1 + static_cast<int>(uniform(rng) * 4) % 4];
    gamma(j) = normal(rng);
  }

  Dataset out;
  out.name = "ihdp_like";
  out.seed = spec.seed;
  out.generator = spec;
  out.x.resize(n, d);
  for (Index i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) {
      out.x(i, j) = j < spec.continuous ? normal(rng)
                                         : (uniform(rng) < bernoulli_p[j] ? 1.0 : 0.0);
    }
  }

  out.t.resize(n);
  for (Index i = 0; i < n; ++i) {
    const double logit = spec.propensity_intercept + out.x.row(i).dot(gamma);
    const double p = std::clamp(1.0 / (1.0 + std::exp(-logit)), spec.clip_lo,
                                spec.clip_hi);
    out.t[i] = uniform(rng) < p ? 1 : 0;
  }

  const Vector linear = out.x * b;
  const Vector mu0 =
      ((out.x.array() + spec.offset).matrix() * b).array().exp().matrix();
  const double omega = linear.mean() - mu0.mean() - spec.ate;
  const Vector mu1 = linear.array() - omega;

  Vector y0(n), y1(n);
  for (Index i = 0; i < n; ++i) {
    y0(i) = mu0(i) + spec.noise_sd * normal(rng);
    y1(i) = mu1(i) + spec.noise_sd * normal(rng);
  }
  out.y.resize(n);
  for (Index i = 0; i < n; ++i) out.y(i) = out.t[i] == 1 ? y1(i) : y0(i);
  out.y0 = y0;
  out.y1 = y1;
  out.mu0 = mu0;
  out.mu1 = mu1;
  out.validate();
  return out;
}

Dataset generate(const GeneratorSpec& spec) {
  return spec.family == Family::kIhdpLike ? generate_ihdp_like(spec)
                                          : generate_toy(spec);
}

// ---------------------------------------------------------------------------

Dataset parse_csv(const std::string& text, const std::string& name) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) {
      header = split_fields(line);
      break;
    }
  }
  if (header.empty()) throw ParseError("missing header", std::max(line_no, 1));

  int dim = 0;
  int col_t = -1, col_yf = -1, col_y0 = -1, col_y1 = -1, col_mu0 = -1,
      col_mu1 = -1;
  std::vector<int> col_x;
  for (int c = 0; c < static_cast<int>(header.size()); ++c) {
    const std::string& h = header[c];
    if (h == "t") {
      col_t = c;
    } else if (h == "yf") {
      col_yf = c;
    } else if (h == "y0") {
      col_y0 = c;
    } else if (h == "y1") {
      col_y1 = c;
    } else if (h == "mu0") {
      col_mu0 = c;
    } else if (h == "mu1") {
      col_mu1 = c;
    } else if (h == "x" + std::to_string(dim + 1)) {
      col_x.push_back(c);
      ++dim;
    } else {
      throw ParseError("unexpected column '" + h + "'", line_no);
    }
  }
  if (dim == 0) throw ParseError("missing covariate columns x1..xd", line_no);
  if (col_t < 0) throw ParseError("missing column 't'", line_no);
  if (col_yf < 0) throw ParseError("missing column 'yf'", line_no);
  if ((col_y0 < 0) != (col_y1 < 0)) {
    throw ParseError("columns y0 and y1 must appear together", line_no);
  }
  if ((col_mu0 < 0) != (col_mu1 < 0)) {
    throw ParseError("columns mu0 and mu1 must appear together", line_no);
  }

  std::vector<std::vector<double>> xs;
  std::vector<int> ts;
  std::vector<double> yf, y0, y1, mu0, mu1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> f = split_fields(line);
    if (f.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) +
                           " fields, found " + std::to_string(f.size()),
                       line_no);
    }
    std::vector<double> row(dim);
    for (int j = 0; j < dim; ++j) row[j] = parse_number(f[col_x[j]], line_no, header[col_x[j]]);
    xs.push_back(std::move(row));
    const double t = parse_number(f[col_t], line_no, "t");
    if (t != 0.0 && t != 1.0) {
      throw ParseError("treatment must be 0 or 1, found '" + f[col_t] + "'",
                       line_no);
    }
    ts.push_back(static_cast<int>(t));
    yf.push_back(parse_number(f[col_yf], line_no, "yf"));
    if (col_y0 >= 0) {
      y0.push_back(parse_number(f[col_y0], line_no, "y0"));
      y1.push_back(parse_number(f[col_y1], line_no, "y1"));
      const double expected = ts.back() == 1 ? y1.back() : y0.back();
      if (std::abs(expected - yf.back()) >
          1e-9 * std::max(1.0, std::abs(yf.back()))) {
        throw ParseError("yf disagrees with the potential outcome of arm t",
                         line_no);
      }
    }
    if (col_mu0 >= 0) {
      mu0.push_back(parse_number(f[col_mu0], line_no, "mu0"));
      mu1.push_back(parse_number(f[col_mu1], line_no, "mu1"));
    }
  }

  Dataset d;
  d.name = name;
  const Index n = static_cast<Index>(xs.size());
  d.x.resize(n, dim);
  d.y.resize(n);
  d.t = ts;
  for (Index i = 0; i < n; ++i) {
    for (int j = 0; j < dim; ++j) d.x(i, j) = xs[i][j];
    d.y(i) = yf[i];
  }
  auto to_vec = [](const std::vector<double>& v) {
    return Vector(Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size())));
  };
  if (col_y0 >= 0) {
    d.y0 = to_vec(y0);
    d.y1 = to_vec(y1);
  }
  if (col_mu0 >= 0) {
    d.mu0 = to_vec(mu0);
    d.mu1 = to_vec(mu1);
  }
  d.validate();
  return d;
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  std::string stem = path;
  if (auto slash = stem.find_last_of('/'); slash != std::string::npos) {
    stem = stem.substr(slash + 1);
  }
  if (auto dot = stem.rfind(".csv"); dot != std::string::npos) stem.resize(dot);
  return parse_csv(buffer.str(), stem);
}

std::string format_csv(const Dataset& data) {
  std::string out;
  for (Index j = 0; j < data.dim(); ++j) out += fmt::format("x{},", j + 1);
  out += "t,yf";
  if (data.y0) out += ",y0,y1";
  if (data.mu0) out += ",mu0,mu1";
  out += '\n';
  for (Index i = 0; i < data.size(); ++i) {
    for (Index j = 0; j < data.dim(); ++j) {
      out += fmt_double(data.x(i, j));
      out += ',';
    }
    out += fmt::format("{},{}", data.t[i], fmt_double(data.y(i)));
    if (data.y0) {
      out += fmt::format(",{},{}", fmt_double((*data.y0)(i)),
                         fmt_double((*data.y1)(i)));
    }
    if (data.mu0) {
      out += fmt::format(",{},{}", fmt_double((*data.mu0)(i)),
                         fmt_double((*data.mu1)(i)));
    }
    out += '\n';
  }
  return out;
}

void write_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << format_csv(data);
  if (!out) throw IoError("failed writing '" + path + "'");
}

// ---------------------------------------------------------------------------

Split split(const Dataset& data, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw ConfigError("split: ratio must be in (0, 1)");
  }
  const Index n = data.size();
  const Index n_train = static_cast<Index>(std::llround(ratio * n));
  std::mt19937_64 rng(seed);
  auto shuffle = [&rng](std::vector<Index>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(v[i - 1], v[pick(rng)]);
    }
  };

  std::array<std::vector<Index>, 2> arms = {data.arm_rows(0), data.arm_rows(1)};
  std::vector<Index> train, test;
  if (arms[0].size() < 2 || arms[1].size() < 2) {
    warn("split: an arm has fewer than 2 units; using an unstratified split");
    std::vector<Index> all(n);
    for (Index i = 0; i < n; ++i) all[i] = i;
    shuffle(all);
    train.assign(all.begin(), all.begin() + n_train);
    test.assign(all.begin() + n_train, all.end());
  } else {
    // Largest-remainder allocation of n_train across arms, keeping at least
    // one unit of each arm on both sides when the totals allow it.
    std::array<Index, 2> quota{};
    std::array<double, 2> remainder{};
    for (int a = 0; a < 2; ++a) {
      const double exact = ratio * static_cast<double>(arms[a].size());
      quota[a] = static_cast<Index>(std::floor(exact));
      remainder[a] = exact - quota[a];
    }
    Index missing = n_train - quota[0] - quota[1];
    while (missing > 0) {
      const int a = remainder[1] > remainder[0] ? 1 : 0;
      ++quota[a];
      remainder[a] = -1.0;
      --missing;
    }
    for (int a = 0; a < 2; ++a) {
      const Index size = static_cast<Index>(arms[a].size());
      const int other = 1 - a;
      const Index other_size = static_cast<Index>(arms[other].size());
      if (quota[a] == 0 && quota[other] > 1) {
        ++quota[a];
        --quota[other];
      } else if (quota[a] == size && quota[other] < other_size - 1) {
        --quota[a];
        ++quota[other];
      }
    }
    for (int a = 0; a < 2; ++a) {
      shuffle(arms[a]);
      train.insert(train.end(), arms[a].begin(), arms[a].begin() + quota[a]);
      test.insert(test.end(), arms[a].begin() + quota[a], arms[a].end());
    }
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  Split out{data.subset(train), data.subset(test), train, test};
  return out;
}

}  // namespace dklite
