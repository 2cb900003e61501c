/*
 * Copyright 2026 The hybridfl Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef HYBRIDFL_CLI_H_
#define HYBRIDFL_CLI_H_

#include <ostream>

namespace hybridfl {

// Process exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitRuntimeError = 2;
inline constexpr int kExitPartialSweep = 3;

// Entry point of the hybridfl tool. Subcommands: run, sweep, accountant,
// vote-demo, report.
int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err);

}  // namespace hybridfl

#endif  // HYBRIDFL_CLI_H_
