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

#include "dklite/representation.hpp"

#include <cmath>
#include <random>
#include <utility>

#include "dklite/error.hpp"

namespace dklite {
namespace {

Matrix activate(const Matrix& x, Activation activation) {
  if (activation == Activation::kIdentity) return x;
  return x.unaryExpr([](double v) { return v > 0.0 ? v : std::expm1(v); });
}

Matrix forward(const std::vector<DenseLayer>& layers, Activation activation,
               const Matrix& input, const char* what) {
  if (layers.empty()) return input;
  if (input.cols() != layers.front().weight.rows()) {
    throw DimensionError(std::string(what) + ": expected " +
                         std::to_string(layers.front().weight.rows()) +
                         " columns, got " + std::to_string(input.cols()));
  }
  Matrix h = input;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    Matrix next = h * layers[i].weight;
    next.rowwise() += layers[i].bias.row(0);
    h = i + 1 < layers.size() ? activate(next, activation) : std::move(next);
  }
  return h;
}

Var forward(const std::vector<Var>& weights, const std::vector<Var>& biases,
            Activation activation, Var input, const char* what) {
  if (weights.empty()) return input;
  if (input.cols() != weights.front().rows()) {
    throw DimensionError(std::string(what) + ": expected " +
                         std::to_string(weights.front().rows()) +
                         " columns, got " + std::to_string(input.cols()));
  }
  Var h = input;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    h = add_row(matmul(h, weights[i]), biases[i]);
    if (i + 1 < weights.size() && activation == Activation::kElu) h = elu(h);
  }
  return h;
}

std::vector<DenseLayer> make_layers(const std::vector<int>& sizes,
                                    std::mt19937_64* rng) {
  std::vector<DenseLayer> layers;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    DenseLayer layer{Matrix::Zero(sizes[i], sizes[i + 1]),
                     Matrix::Zero(1, sizes[i + 1])};
    if (rng != nullptr) {
      std::normal_distribution<double> normal(
          0.0, std::sqrt(2.0 / (sizes[i] + sizes[i + 1])));
      for (Index c = 0; c < layer.weight.cols(); ++c) {
        for (Index r = 0; r < layer.weight.rows(); ++r) {
          layer.weight(r, c) = normal(*rng);
        }
      }
    }
    layers.push_back(std::move(layer));
  }
  return layers;
}

void validate_arch(const Architecture& arch) {
  if (arch.input_dim < 1 || arch.latent_dim < 1) {
    throw ConfigError("architecture: input and latent dims must be >= 1");
  }
  for (int h : arch.hidden) {
    if (h < 1) throw ConfigError("architecture: hidden sizes must be >= 1");
  }
}

}  // namespace

std::string to_string(Activation activation) {
  return activation == Activation::kElu ? "elu" : "identity";
}

Activation activation_from_string(const std::string& name) {
  if (name == "elu") return Activation::kElu;
  if (name == "identity") return Activation::kIdentity;
  throw ConfigError("unknown activation '" + name + "'");
}

std::vector<int> Architecture::encoder_sizes() const {
  std::vector<int> sizes{input_dim};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(latent_dim);
  return sizes;
}

std::vector<int> Architecture::decoder_sizes() const {
  std::vector<int> sizes = encoder_sizes();
  return {sizes.rbegin(), sizes.rend()};
}

RepresentationNet::RepresentationNet(std::vector<DenseLayer> encoder,
                                     std::vector<DenseLayer> decoder,
                                     Activation activation)
    : encoder_(std::move(encoder)),
      decoder_(std::move(decoder)),
      activation_(activation) {
  if (encoder_.empty() || encoder_.size() != decoder_.size()) {
    throw ConfigError("representation: decoder must mirror the encoder");
  }
  const std::size_t n = encoder_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const DenseLayer& e = encoder_[i];
    const DenseLayer& d = decoder_[n - 1 - i];
    if (e.bias.rows() != 1 || e.bias.cols() != e.weight.cols() ||
        d.bias.rows() != 1 || d.bias.cols() != d.weight.cols()) {
      throw ConfigError("representation: bias shape does not match weight");
    }
    if (i > 0 && e.weight.rows() != encoder_[i - 1].weight.cols()) {
      throw ConfigError("representation: encoder layers do not chain");
    }
    if (d.weight.rows() != e.weight.cols() ||
        d.weight.cols() != e.weight.rows()) {
      throw ConfigError("representation: decoder must mirror the encoder");
    }
  }
  for (const Matrix* p : std::as_const(*this).parameters()) {
    if (!p->allFinite()) throw ConfigError("representation: non-finite weight");
  }
}

RepresentationNet RepresentationNet::initialize(const Architecture& arch,
                                                std::uint64_t seed) {
  validate_arch(arch);
  std::mt19937_64 rng(seed);
  auto encoder = make_layers(arch.encoder_sizes(), &rng);
  auto decoder = make_layers(arch.decoder_sizes(), &rng);
  return RepresentationNet(std::move(encoder), std::move(decoder),
                           arch.activation);
}

RepresentationNet RepresentationNet::zeros(const Architecture& arch) {
  validate_arch(arch);
  return RepresentationNet(make_layers(arch.encoder_sizes(), nullptr),
                           make_layers(arch.decoder_sizes(), nullptr),
                           arch.activation);
}

int RepresentationNet::input_dim() const {
  return encoder_.empty() ? 0 : static_cast<int>(encoder_.front().weight.rows());
}

int RepresentationNet::latent_dim() const {
  return encoder_.empty() ? 0 : static_cast<int>(encoder_.back().weight.cols());
}

Architecture RepresentationNet::architecture() const {
  Architecture arch;
  arch.input_dim = input_dim();
  arch.latent_dim = latent_dim();
  arch.activation = activation_;
  arch.hidden.clear();
  for (std::size_t i = 0; i + 1 < encoder_.size(); ++i) {
    arch.hidden.push_back(static_cast<int>(encoder_[i].weight.cols()));
  }
  return arch;
}

std::vector<Matrix*> RepresentationNet::parameters() {
  std::vector<Matrix*> out;
  for (auto* layers : {&encoder_, &decoder_}) {
    for (DenseLayer& layer : *layers) {
      out.push_back(&layer.weight);
      out.push_back(&layer.bias);
    }
  }
  return out;
}

std::vector<const Matrix*> RepresentationNet::parameters() const {
  std::vector<const Matrix*> out;
  for (const auto* layers : {&encoder_, &decoder_}) {
    for (const DenseLayer& layer : *layers) {
      out.push_back(&layer.weight);
      out.push_back(&layer.bias);
    }
  }
  return out;
}

std::size_t RepresentationNet::parameter_count() const {
  std::size_t n = 0;
  for (const Matrix* p : parameters()) n += static_cast<std::size_t>(p->size());
  return n;
}

Matrix RepresentationNet::encode(const Matrix& x) const {
  return forward(encoder_, activation_, x, "encode");
}

Matrix RepresentationNet::decode(const Matrix& z) const {
  return forward(decoder_, activation_, z, "decode");
}

NetBinding RepresentationNet::bind(Tape& tape) const {
  NetBinding b;
  b.activation = activation_;
  for (const DenseLayer& layer : encoder_) {
    b.encoder_weights.push_back(tape.variable(layer.weight));
    b.encoder_biases.push_back(tape.variable(layer.bias));
  }
  for (const DenseLayer& layer : decoder_) {
    b.decoder_weights.push_back(tape.variable(layer.weight));
    b.decoder_biases.push_back(tape.variable(layer.bias));
  }
  return b;
}

Var encode(const NetBinding& net, Var x) {
  return forward(net.encoder_weights, net.encoder_biases, net.activation, x,
                 "encode");
}

Var decode(const NetBinding& net, Var z) {
  return forward(net.decoder_weights, net.decoder_biases, net.activation, z,
                 "decode");
}

}  // namespace dklite
