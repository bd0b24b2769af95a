#pragma once

#include <chrono>
#include <string>
#include <vector>

namespace acqbench {

struct ProcessResult {
  int exit_code = -1;  // -1 when killed by a signal or on timeout
  bool timed_out = false;
  std::string standard_output;
};

/// Runs `command` through /bin/sh with `args` appended (each single-quoted),
/// capturing standard output. The process group is killed on timeout.
ProcessResult run_command(const std::string& command, const std::vector<std::string>& args,
                          std::chrono::milliseconds timeout);

/// POSIX shell single-quoting.
std::string shell_quote(const std::string& arg);

}  // namespace acqbench
