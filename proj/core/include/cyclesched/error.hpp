#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cyclesched {

/// Every failure the library reports. The CLI maps these onto exit codes and
/// a machine-readable error object.
enum class ErrorCode {
  MalformedTrace,
  InvariantViolation,
  InvalidSpec,
  InsufficientData,
  NoPeriodicity,
  RangeTooLong,
  OverCommit,
  NoFeasibleShift,
  NoCapacity,
  PreconditionFailed,
  UnknownJob,
  JobCompleted,
  IllegalTransition,
  TierFull,
  PhaseExceedsCycle,
  IncompleteLog,
  ConfigInfeasible,
  InvalidConfig,
  IoFailure,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cyclesched
