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

#ifndef DKLITE_LOG_HPP_
#define DKLITE_LOG_HPP_

#include <functional>
#include <string>

namespace dklite {

using WarningSink = std::function<void(const std::string&)>;

// Emits a warning through the installed sink (stderr by default).
void warn(const std::string& message);

// Installs `sink` for the lifetime of the object and restores the previous
// sink on destruction. Used by tests to capture warnings.
class ScopedWarningSink {
 public:
  explicit ScopedWarningSink(WarningSink sink);
  ~ScopedWarningSink();
  ScopedWarningSink(const ScopedWarningSink&) = delete;
  ScopedWarningSink& operator=(const ScopedWarningSink&) = delete;

 private:
  WarningSink previous_;
};

}  // namespace dklite

#endif  // DKLITE_LOG_HPP_
