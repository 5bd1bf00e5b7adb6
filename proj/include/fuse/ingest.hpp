#pragma once

#include "fuse/catalog.hpp"
#include "fuse/types.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace fuse {

struct ValidationFinding {
    std::string file;
    long row = 0;  // 0 when the finding is not row-specific
    std::string message;
};

/// Outcome of structural and plausibility checks on a parsed session.
/// A session with any error must not proceed to indicator derivation.
struct ValidationReport {
    std::vector<ValidationFinding> errors;
    std::vector<ValidationFinding> warnings;
    // fraction of expected 1 Hz samples present over the session window,
    // keyed by student; one map per continuous stream
    std::map<std::string, double> position_coverage;
    std::map<std::string, double> heart_rate_coverage;

    bool ok() const noexcept { return errors.empty(); }
};

// Heart-rate plausibility bounds for coverage warnings. Samples outside
// [kHeartRateMinBpm, kHeartRateMaxBpm] are flagged OutOfPhysiologicalRange.
inline constexpr double kHeartRateMinBpm = 25.0;
inline constexpr double kHeartRateMaxBpm = 240.0;

/// Parse one session directory into a RawSession.
///
/// Expects: positions.csv, utterances.csv, heartrate.csv, zones.json,
/// phases.json, surveys.csv. All timestamps are rebased to seconds from
/// session start (the minimum timestamp seen across streams and phase
/// bounds) and floored to whole seconds.
///
/// Throws Error with MissingFile, MalformedRow, UnknownCode,
/// NonMonotoneTimestamp or WrongStudentCount.
RawSession load_session(const std::filesystem::path& session_dir,
                        const IndicatorCatalog& catalog = default_catalog());

/// Structural errors (overlapping/unordered phases, bad survey range) and
/// plausibility warnings (1 Hz gaps, utterances outside phase bounds,
/// implausible heart rates). Never throws; findings land in the report.
ValidationReport validate(const RawSession& raw);

}  // namespace fuse
