#pragma once

#include "fuse/types.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fuse {

/// The eight spatial states, in catalog order (indices 0..7).
enum class SpState : std::uint8_t {
    CollaboratePrimary = 0,
    IndividualPrimary,
    CollaborateSecondary,
    IndividualSecondary,
    CollaborateDistraction,
    IndividualDistraction,
    TaskDistribution,
    TaskTransition,
};

const char* sp_state_name(SpState s);

/// Per-student, per-second spatial state over [span_start, span_end).
/// nullopt = no position sample for that second (gaps are never bridged).
struct SpatialStateSeries {
    Second span_start = 0;
    Second span_end = 0;
    std::map<std::string, std::vector<std::optional<SpState>>> states;
};

/// Seconds a student pair must stay within kProximityMetres for the pair
/// to count as collaborating: strictly more than 10 s, i.e. runs >= 11.
inline constexpr int kCollaborationMinRunSeconds = 11;
inline constexpr double kProximityMetres = 1.0;

/// Zone containing the point: centroid distance <= radius, nearest centroid
/// wins among overlapping zones, earlier zone wins exact ties. nullopt when
/// the point is outside every zone.
std::optional<std::size_t> assign_zone(double x, double y, const std::vector<ZoneSpec>& zones);

/// Per-second collaboration flags over [t_begin, t_end). A student is
/// flagged at second t iff some partner is within kProximityMetres at t and
/// t lies inside a maximal run of >= kCollaborationMinRunSeconds consecutive
/// seconds of that pairwise condition. Missing samples break runs.
std::map<std::string, std::vector<bool>> collaboration_flags(
    const std::map<std::string, std::vector<PositionSample>>& positions,
    Second t_begin, Second t_end);

/// Full spatial state derivation for the session's analysis span.
SpatialStateSeries spatial_states(const RawSession& raw);

}  // namespace fuse
