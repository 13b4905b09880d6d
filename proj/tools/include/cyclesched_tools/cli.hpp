#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "cyclesched/error.hpp"

namespace cyclesched::cli {

enum class Verb { Simulate, Compare, Synth, Profile };

struct CliCommand {
  Verb verb = Verb::Simulate;
  std::filesystem::path trace;
  std::filesystem::path config;
  std::filesystem::path out;
  std::filesystem::path spec;
  std::filesystem::path events;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> policy;
};

enum ExitCode : int { kOk = 0, kUsage = 2, kInput = 3, kSimulation = 4 };

/// Exit status for a module error: input problems map to kInput, the rest
/// to kSimulation.
int exit_code_for(ErrorCode code);

/// {"error": <code name>, "message": <text>, "exit_code": <n>} on one line.
std::string error_object(const std::string& code, const std::string& message, int exit_code);

/// Runs one verb. Artifacts go under command.out; on failure every file
/// this call created is removed and the error object is written to `err`.
int execute(const CliCommand& command, std::ostream& err);

}  // namespace cyclesched::cli
