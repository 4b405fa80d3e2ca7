#pragma once

#include <string>

namespace rtlmut {

struct CommandResult {
  int exit_code = -1;
  bool timed_out = false;
  std::string output;  // combined stdout + stderr
};

// Runs `command` through /bin/sh -c in its own process group, capturing
// combined output. On timeout the whole group is killed and timed_out is
// set. SpawnError conditions raise InfraError.
CommandResult run_shell(const std::string& command, double timeout_seconds);

}  // namespace rtlmut
