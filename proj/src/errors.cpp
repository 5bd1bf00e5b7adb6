#include "fuse/errors.hpp"

namespace fuse {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::MissingFile: return "MissingFile";
        case ErrorCode::MalformedRow: return "MalformedRow";
        case ErrorCode::UnknownCode: return "UnknownCode";
        case ErrorCode::NonMonotoneTimestamp: return "NonMonotoneTimestamp";
        case ErrorCode::WrongStudentCount: return "WrongStudentCount";
        case ErrorCode::InsufficientBaselineData: return "InsufficientBaselineData";
        case ErrorCode::SpanMismatch: return "SpanMismatch";
        case ErrorCode::NonFiniteLikelihood: return "NonFiniteLikelihood";
        case ErrorCode::AllRestartsFailed: return "AllRestartsFailed";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::ZeroVariance: return "ZeroVariance";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::EmptyGroup: return "EmptyGroup";
        case ErrorCode::EmptyUnit: return "EmptyUnit";
        case ErrorCode::ZeroVector: return "ZeroVector";
        case ErrorCode::IdenticalGroupMeans: return "IdenticalGroupMeans";
        case ErrorCode::GroupTooSmall: return "GroupTooSmall";
        case ErrorCode::InconsistentScript: return "InconsistentScript";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::IoFailure: return "IoFailure";
    }
    return "UnknownError";
}

}  // namespace fuse
