#pragma once

#include <string>
#include <vector>

namespace pathlearn {

/// Entry point behind the `pathlearn` binary. Subcommands:
///   simulate <scenario.json> [--seed N] [--out DIR]
///   metrics  <run-dir>
///   ablation <scenario.json> [--seeds a,b,c] [--out DIR]
///   bench    [--scenario file] [--runs N]
/// Returns a process exit code; malformed inputs produce a message and a
/// nonzero code, never an uncaught exception.
int cli_main(const std::vector<std::string>& args);

}  // namespace pathlearn
