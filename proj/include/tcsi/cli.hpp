// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "tcsi/experts.hpp"

namespace tcsi {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // validation or runtime failure
inline constexpr int kExitUsage = 2;

/// Runs one subcommand. args[0] is the program name. Machine-readable output
/// goes to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Builds a backend from "oracle:<corpus>", "lexical:<model>" or
/// "external:<command>". Throws std::invalid_argument on a malformed spec.
std::unique_ptr<ExpertBackend> make_backend(const std::string& spec);

}  // namespace tcsi
