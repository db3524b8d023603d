#pragma once

#include <string>

#include "mfgseg/config.hpp"

namespace mfgseg {

// Exit codes: 0 ok, 1 config/validation, 2 nonconvergence, 3 branch integrity.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitNotConverged = 2;
inline constexpr int kExitBranchIntegrity = 3;

int cmd_solve(const RunConfig& config);
int cmd_branch(const RunConfig& config, int jobs);
int cmd_variational(const RunConfig& config);
int cmd_diagnose(const RunConfig& config);

/// Full argv interface: solve|branch|variational|diagnose --config PATH
/// [--out DIR] [--jobs N] [--format csv|json|both].
int run_cli(int argc, const char* const* argv);

}  // namespace mfgseg
