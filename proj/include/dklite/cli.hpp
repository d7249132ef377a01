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

#ifndef DKLITE_CLI_HPP_
#define DKLITE_CLI_HPP_

#include <ostream>

namespace dklite {

// Entry point of the `dklite` tool. Returns the process exit status:
// 0 on success, 1 for runtime or numerical failures, 2 for usage and I/O
// errors.
int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

}  // namespace dklite

#endif  // DKLITE_CLI_HPP_
