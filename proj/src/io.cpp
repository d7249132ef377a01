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

#include "dklite/io.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "dklite/error.hpp"

namespace dklite {
namespace {

using nlohmann::json;

json matrix_json(const Matrix& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Matrix matrix_from(const json& j) {
  const Index rows = j.at("rows").get<Index>();
  const Index cols = j.at("cols").get<Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 || static_cast<Index>(data.size()) != rows * cols) {
    throw IoError("checkpoint: matrix data does not match its shape");
  }
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j2 = 0; j2 < cols; ++j2) m(i, j2) = data[static_cast<std::size_t>(i * cols + j2)];
  }
  return m;
}

json layers_json(const std::vector<DenseLayer>& layers) {
  json out = json::array();
  for (const DenseLayer& l : layers) {
    out.push_back({{"weight", matrix_json(l.weight)}, {"bias", matrix_json(l.bias)}});
  }
  return out;
}

std::vector<DenseLayer> layers_from(const json& j) {
  std::vector<DenseLayer> out;
  for (const json& l : j) out.push_back({matrix_from(l.at("weight")), matrix_from(l.at("bias"))});
  return out;
}

}  // namespace

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("failed reading '" + path + "'");
  return buffer.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  out.close();
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::string git_blob_hash(const std::string& content) {
  std::string blob = "blob " + std::to_string(content.size());
  blob += '\0';
  blob += content;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(blob.data(), blob.size(), digest, &length, EVP_sha1(), nullptr) != 1) {
    throw IoError("SHA-1 digest failed");
  }
  std::string hex;
  for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

json model_to_json(const FittedModel& model) {
  json j;
  j["format"] = "dklite-checkpoint";
  j["version"] = 1;
  j["config"] = model.config.to_json();
  j["activation"] = to_string(model.net.activation());
  j["encoder"] = layers_json(model.net.encoder());
  j["decoder"] = layers_json(model.net.decoder());
  j["heads"] = json::array();
  for (const PosteriorHead& h : model.heads) {
    j["heads"].push_back({{"arm", h.arm},
                          {"mean", matrix_json(h.mean)},
                          {"precision", matrix_json(h.precision)},
                          {"factor", matrix_json(h.factor.lower)},
                          {"jitter", h.factor.jitter},
                          {"noise_precision", h.noise_precision},
                          {"prior_precision", h.prior_precision},
                          {"observations", h.observations}});
  }
  j["x_mean"] = matrix_json(model.x_standardizer.mean);
  j["x_scale"] = matrix_json(model.x_standardizer.scale);
  j["y_mean"] = model.y_mean;
  j["y_scale"] = model.y_scale;
  return j;
}

FittedModel model_from_json(const json& j) {
  FittedModel model;
  try {
    if (j.at("format").get<std::string>() != "dklite-checkpoint") {
      throw IoError("not a dklite checkpoint");
    }
    model.config = TrainConfig::from_json(j.at("config"));
    model.net = RepresentationNet(layers_from(j.at("encoder")), layers_from(j.at("decoder")),
                                  activation_from_string(j.at("activation").get<std::string>()));
    const json& heads = j.at("heads");
    if (heads.size() != 2) throw IoError("checkpoint: expected two heads");
    for (std::size_t t = 0; t < 2; ++t) {
      const json& h = heads[t];
      PosteriorHead& head = model.heads[t];
      head.arm = h.at("arm").get<int>();
      head.mean = matrix_from(h.at("mean"));
      head.precision = matrix_from(h.at("precision"));
      head.factor.lower = matrix_from(h.at("factor"));
      head.factor.jitter = h.at("jitter").get<double>();
      head.noise_precision = h.at("noise_precision").get<double>();
      head.prior_precision = h.at("prior_precision").get<double>();
      head.observations = h.at("observations").get<Index>();
      if (head.mean.size() != model.net.latent_dim() ||
          head.precision.rows() != head.mean.size()) {
        throw IoError("checkpoint: head dimension does not match the network");
      }
    }
    model.x_standardizer.mean = matrix_from(j.at("x_mean"));
    model.x_standardizer.scale = matrix_from(j.at("x_scale"));
    model.y_mean = j.at("y_mean").get<double>();
    model.y_scale = j.at("y_scale").get<double>();
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed checkpoint: ") + e.what());
  } catch (const ConfigError& e) {
    throw IoError(std::string("malformed checkpoint: ") + e.what());
  }
  return model;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path) {
  json j = model_to_json(checkpoint.model);
  j["metadata"] = checkpoint.metadata;
  write_text(path, j.dump(1) + "\n");
}

Checkpoint load_checkpoint(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw IoError("'" + path + "' is not valid JSON: " + e.what());
  }
  Checkpoint c;
  c.model = model_from_json(j);
  if (j.contains("metadata")) c.metadata = j["metadata"];
  return c;
}

std::string training_curve_csv(const std::vector<LossBreakdown>& history) {
  std::string out =
      "step,L_lik,L_var,L_rec,L_fin,kl0,kl1,var0,var1,cf_var0,cf_var1,"
      "beta0,beta1,lambda0,lambda1\n";
  for (std::size_t s = 0; s < history.size(); ++s) {
    const LossBreakdown& b = history[s];
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", s + 1, b.lik,
                       b.var, b.rec, b.fin, b.arms[0].kl, b.arms[1].kl,
                       b.arms[0].factual_variance, b.arms[1].factual_variance,
                       b.arms[0].counterfactual_variance,
                       b.arms[1].counterfactual_variance, b.arms[0].noise_precision,
                       b.arms[1].noise_precision, b.arms[0].prior_precision,
                       b.arms[1].prior_precision);
  }
  return out;
}

std::string metrics_csv(const std::vector<MetricRow>& rows) {
  std::string out = "dataset,split,metric,value,seed\n";
  for (const MetricRow& r : rows) {
    out += fmt::format("{},{},{},{},{}\n", r.dataset, r.split, r.metric, r.value, r.seed);
  }
  return out;
}

void RunManifest::add_input(const std::string& path) {
  inputs.emplace_back(path, git_blob_hash(read_text(path)));
}

json RunManifest::to_json() const {
  json j;
  j["command"] = command;
  j["config"] = config;
  j["seed"] = seed;
  j["inputs"] = json::array();
  for (const auto& [path, hash] : inputs) j["inputs"].push_back({{"path", path}, {"hash", hash}});
  j["outputs"] = outputs;
  j["started"] = started;
  j["finished"] = finished;
  return j;
}

std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace dklite
