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

#ifndef DKLITE_TESTS_GRADCHECK_HPP_
#define DKLITE_TESTS_GRADCHECK_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "dklite/tensor.hpp"

namespace gradcheck {

using Builder = std::function<dklite::Var(dklite::Tape&, const std::vector<dklite::Var>&)>;

inline double evaluate(const std::vector<dklite::Matrix>& inputs, const Builder& fn) {
  dklite::Tape tape;
  std::vector<dklite::Var> leaves;
  for (const auto& m : inputs) leaves.push_back(tape.variable(m));
  return fn(tape, leaves).scalar();
}

// Largest |analytic - fd| / max(1, |fd|) over every input entry, with
// central differences of step h.
inline double max_error(const std::vector<dklite::Matrix>& inputs, const Builder& fn,
                        double h = 1e-5) {
  dklite::Tape tape;
  std::vector<dklite::Var> leaves;
  for (const auto& m : inputs) leaves.push_back(tape.variable(m));
  tape.backward(fn(tape, leaves));

  double worst = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const dklite::Matrix analytic = tape.gradient(leaves[i]);
    for (Eigen::Index k = 0; k < inputs[i].size(); ++k) {
      auto plus = inputs;
      auto minus = inputs;
      plus[i](k) += h;
      minus[i](k) -= h;
      const double fd = (evaluate(plus, fn) - evaluate(minus, fn)) / (2.0 * h);
      worst = std::max(worst, std::abs(analytic(k) - fd) / std::max(1.0, std::abs(fd)));
    }
  }
  return worst;
}

}  // namespace gradcheck

#endif  // DKLITE_TESTS_GRADCHECK_HPP_
