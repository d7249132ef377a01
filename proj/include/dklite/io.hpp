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

#ifndef DKLITE_IO_HPP_
#define DKLITE_IO_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dklite/objective.hpp"
#include "dklite/trainer.hpp"

namespace dklite {

// Whole-file text I/O; IoError names the path on failure.
std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

// Hex SHA-1 of "blob <size>\0<content>", as computed by `git hash-object`.
std::string git_blob_hash(const std::string& content);

// Lossless JSON form of a fitted model (weights, heads, standardization
// statistics and configuration). The training history is not stored.
nlohmann::json model_to_json(const FittedModel& model);
FittedModel model_from_json(const nlohmann::json& j);

// A checkpoint is the model plus free-form metadata (e.g. split settings).
struct Checkpoint {
  FittedModel model;
  nlohmann::json metadata = nlohmann::json::object();
};
void save_checkpoint(const Checkpoint& checkpoint, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// One row per step: step,L_lik,L_var,L_rec,L_fin followed by per-arm KL,
// factual variance, counterfactual variance, beta and lambda.
std::string training_curve_csv(const std::vector<LossBreakdown>& history);

struct MetricRow {
  std::string dataset;
  std::string split;  // in_sample | out_sample
  std::string metric;
  double value = 0.0;
  std::uint64_t seed = 0;
};
// Header dataset,split,metric,value,seed.
std::string metrics_csv(const std::vector<MetricRow>& rows);

struct RunManifest {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> inputs;  // path, blob hash
  std::vector<std::string> outputs;
  std::string started;
  std::string finished;

  // Records `path` with the hash of its current contents.
  void add_input(const std::string& path);
  nlohmann::json to_json() const;
};

// UTC time as ISO-8601.
std::string utc_timestamp();

}  // namespace dklite

#endif  // DKLITE_IO_HPP_
