// Copyright 2026 The DPEM Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPEM_TOOLS_CLI_H_
#define DPEM_TOOLS_CLI_H_

#include <ostream>

namespace dpem::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitBadFlags = 2;
inline constexpr int kExitUnattainable = 3;
inline constexpr int kExitDataError = 4;

// Entry point of the dpem tool: `calibrate` and `fit` subcommands.
int Run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err);

}  // namespace dpem::cli

#endif  // DPEM_TOOLS_CLI_H_
