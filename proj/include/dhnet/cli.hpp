#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "dhnet/model.hpp"

namespace dhnet {

// Process exit codes, one per error kind.
enum ExitCode : int {
  kExitOk = 0,
  kExitInvalidArgument = 1,
  kExitIo = 2,
  kExitMissingTool = 3,
  kExitParse = 4,
  kExitIncompatible = 5,
  kExitTrainingAbort = 6,
  kExitUndefinedMetrics = 7,
  kExitToolFailed = 8,
  kExitInternal = 9,
};

int exit_code_for(const char* kind);

// Named network sizes accepted by `train --preset`.
StreamConfig stream_preset(const std::string& name);

// Runs the command line `args` (without the program name). Results go to
// `out`; failures print {"error": {"kind", "message"}} to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dhnet
