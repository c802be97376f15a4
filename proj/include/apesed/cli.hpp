/*
 * Copyright 2026 The apesed Authors.
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

#ifndef APESED_CLI_HPP_
#define APESED_CLI_HPP_

namespace apesed {

inline constexpr const char* kVersion = "0.1.0";

// Entry point of the apesed binary. Returns the process exit code: 0 on
// success, otherwise the code of the failing error kind (2 usage, 3 data,
// 4 divergence, 5 I/O) after printing one "error <code> <Kind>: ..." line.
int run(int argc, char** argv);

}  // namespace apesed

#endif  // APESED_CLI_HPP_
