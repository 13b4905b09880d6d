#include "cyclesched/error.hpp"

namespace cyclesched {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedTrace: return "MalformedTrace";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::NoPeriodicity: return "NoPeriodicity";
    case ErrorCode::RangeTooLong: return "RangeTooLong";
    case ErrorCode::OverCommit: return "OverCommit";
    case ErrorCode::NoFeasibleShift: return "NoFeasibleShift";
    case ErrorCode::NoCapacity: return "NoCapacity";
    case ErrorCode::PreconditionFailed: return "PreconditionFailed";
    case ErrorCode::UnknownJob: return "UnknownJob";
    case ErrorCode::JobCompleted: return "JobCompleted";
    case ErrorCode::IllegalTransition: return "IllegalTransition";
    case ErrorCode::TierFull: return "TierFull";
    case ErrorCode::PhaseExceedsCycle: return "PhaseExceedsCycle";
    case ErrorCode::IncompleteLog: return "IncompleteLog";
    case ErrorCode::ConfigInfeasible: return "ConfigInfeasible";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace cyclesched
