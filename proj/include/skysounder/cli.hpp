// SPDX-License-Identifier: Apache-2.0
//
// skysounder -- correlation channel sounding toolkit for drone radio links
// Copyright (C) 2026 skysounder contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace skysounder::cli {

// Entry point behind the command-line binary. `args` excludes the program
// name. Word output goes to `out`, diagnostics to `err`; the return value
// is the process exit code (0 on success).
//
// Subcommands: gen-waveform, simulate, process, fit, report.
// Settings resolve as defaults < --config file < explicit flags, and every
// run echoes its resolved configuration into the output directory.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace skysounder::cli
