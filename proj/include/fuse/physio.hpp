#pragma once

#include "fuse/types.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fuse {

struct PhysioConfig {
    int window = 30;   // trailing Pearson window, seconds
    double tau = 0.0;  // synchrony flag threshold on the mean pairwise r
};

/// Per-student arousal/synchrony flags per second of [span_start, span_end).
/// nullopt = undefined (missing sample, or no valid correlation pair).
struct PhysioFlags {
    Second span_start = 0;
    Second span_end = 0;
    std::map<std::string, double> baseline_bpm;
    std::map<std::string, std::vector<std::optional<bool>>> arousal;
    std::map<std::string, std::vector<std::optional<bool>>> synchrony;
    std::map<std::string, std::vector<std::optional<double>>> mean_pairwise_r;
};

inline constexpr std::size_t kMinBaselineSamples = 30;

/// Arithmetic mean of heart rate over phase 1 [start, end). Throws
/// InsufficientBaselineData below kMinBaselineSamples samples.
double baseline(const std::vector<HeartRateSample>& hr, Second phase1_start, Second phase1_end);

/// flag(t) = bpm(t) > baseline, strictly; absent seconds have no flag.
std::vector<std::optional<bool>> arousal_flags(const std::vector<HeartRateSample>& hr,
                                               double baseline_bpm, Second t_begin, Second t_end);

/// Trailing-window synchrony: at second t, Pearson r over [t-W+1, t] between
/// the student and each partner (pairs with any missing sample or zero
/// variance are skipped), averaged over partners and thresholded at tau.
/// Result vectors cover [t_begin, t_end); windows may reach before t_begin.
struct SynchronyResult {
    std::map<std::string, std::vector<std::optional<bool>>> flags;
    std::map<std::string, std::vector<std::optional<double>>> mean_r;
};
SynchronyResult synchrony_flags(const std::map<std::string, std::vector<HeartRateSample>>& all_hr,
                                const PhysioConfig& cfg, Second t_begin, Second t_end);

/// Full physiological derivation for the session's analysis span.
PhysioFlags physio_flags(const RawSession& raw, const PhysioConfig& cfg = {});

}  // namespace fuse
