#pragma once

#include <string>

#include "bsrd/run_config.hpp"

namespace bsrd {

struct RunResult {
  int exit_status = 0;
  std::string out_dir;
  std::string summary;  // human-readable report printed by the CLI
};

/// Dispatches a validated configuration to the module operations and
/// writes manifest.json plus the per-command CSV artifacts into the
/// output directory. Exit status 0 means every enabled assertion
/// passed; scientific outcomes such as a detected blow-up are
/// successes. All outputs are deterministic for a fixed config + seed;
/// the manifest records a hash over every numeric artifact.
RunResult run(const RunConfig& config);

}  // namespace bsrd
