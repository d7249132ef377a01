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

#ifndef DKLITE_REPRESENTATION_HPP_
#define DKLITE_REPRESENTATION_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "dklite/tensor.hpp"

namespace dklite {

enum class Activation { kElu, kIdentity };

std::string to_string(Activation activation);
Activation activation_from_string(const std::string& name);

// Encoder layer sizes are [input_dim, hidden..., latent_dim]; the decoder
// uses the same list reversed.
struct Architecture {
  int input_dim = 1;
  std::vector<int> hidden = {50, 50};
  int latent_dim = 25;
  Activation activation = Activation::kElu;

  std::vector<int> encoder_sizes() const;
  std::vector<int> decoder_sizes() const;
};

// y = x * weight + bias, with weight stored fan_in x fan_out and bias 1 x fan_out.
struct DenseLayer {
  Matrix weight;
  Matrix bias;
};

// Tape leaves mirroring the parameters of a RepresentationNet.
struct NetBinding {
  std::vector<Var> encoder_weights, encoder_biases;
  std::vector<Var> decoder_weights, decoder_biases;
  Activation activation = Activation::kElu;
};

// Encoder phi: R^d -> R^{d_phi} and decoder psi: R^{d_phi} -> R^d with the
// reversed layer structure. The activation follows every hidden layer; final
// layers of both networks are linear.
class RepresentationNet {
 public:
  RepresentationNet() = default;
  // Throws ConfigError if the decoder is not the mirror image of the encoder.
  RepresentationNet(std::vector<DenseLayer> encoder,
                    std::vector<DenseLayer> decoder, Activation activation);

  // Zero biases, weights ~ N(0, 2 / (fan_in + fan_out)).
  static RepresentationNet initialize(const Architecture& arch,
                                      std::uint64_t seed);
  static RepresentationNet zeros(const Architecture& arch);

  int input_dim() const;
  int latent_dim() const;
  Activation activation() const { return activation_; }
  const std::vector<DenseLayer>& encoder() const { return encoder_; }
  const std::vector<DenseLayer>& decoder() const { return decoder_; }
  std::vector<DenseLayer>& mutable_encoder() { return encoder_; }
  std::vector<DenseLayer>& mutable_decoder() { return decoder_; }
  Architecture architecture() const;

  // Every weight and bias, encoder first, in layer order (weight then bias).
  std::vector<Matrix*> parameters();
  std::vector<const Matrix*> parameters() const;
  std::size_t parameter_count() const;

  // N x d -> N x d_phi and back. Throw DimensionError on column mismatch.
  Matrix encode(const Matrix& x) const;
  Matrix decode(const Matrix& z) const;

  NetBinding bind(Tape& tape) const;

 private:
  std::vector<DenseLayer> encoder_;
  std::vector<DenseLayer> decoder_;
  Activation activation_ = Activation::kElu;
};

Var encode(const NetBinding& net, Var x);
Var decode(const NetBinding& net, Var z);

}  // namespace dklite

#endif  // DKLITE_REPRESENTATION_HPP_
