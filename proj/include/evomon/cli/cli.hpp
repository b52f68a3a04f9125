// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace evomon::cli {

enum ExitCode : int { kOk = 0, kRuntimeError = 1, kUsageError = 2 };

/**
 * Entry point of the `evomon` tool. `args` excludes the program name.
 *
 * Subcommands: serve, embed, fid, simulate, validate. Exit codes: 0 ok,
 * 1 runtime failure, 2 usage or validation error.
 */
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Makes a running `serve` shut down as if it had received SIGINT.
void request_shutdown();

}  // namespace evomon::cli
