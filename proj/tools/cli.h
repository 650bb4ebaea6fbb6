/*
 * Copyright 2026 The RetainEX Workbench Authors.
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

#ifndef RETAINEX_TOOLS_CLI_H_
#define RETAINEX_TOOLS_CLI_H_

namespace retainex {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntimeError = 1;
inline constexpr int kExitUsageError = 2;

// Entry point of the `retainex` command. Returns the process exit code: 0 on
// success, 2 for usage or validation errors, 1 for runtime failures.
int RunCli(int argc, char** argv);

}  // namespace retainex

#endif  // RETAINEX_TOOLS_CLI_H_
