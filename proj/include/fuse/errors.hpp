#pragma once

#include <stdexcept>
#include <string>

namespace fuse {

// One error type for the whole library. Subsystems attach a code so callers
// (and tests) can branch on the failure kind without parsing messages.
enum class ErrorCode {
    // ingest
    MissingFile,
    MalformedRow,
    UnknownCode,
    NonMonotoneTimestamp,
    WrongStudentCount,
    // indicators / sync
    InsufficientBaselineData,
    SpanMismatch,
    // lca
    NonFiniteLikelihood,
    AllRestartsFailed,
    DimensionMismatch,
    // statkit
    ZeroVariance,
    LengthMismatch,
    EmptyGroup,
    // ena
    EmptyUnit,
    ZeroVector,
    IdenticalGroupMeans,
    GroupTooSmall,
    // synthgen / cli
    InconsistentScript,
    InvalidConfig,
    IoFailure,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace fuse
