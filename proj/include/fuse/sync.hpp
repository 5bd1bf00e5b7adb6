#pragma once

#include "fuse/catalog.hpp"
#include "fuse/physio.hpp"
#include "fuse/spatial.hpp"
#include "fuse/types.hpp"
#include "fuse/verbal.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace fuse {

/// Interval binarization rules. sp_min_run (>= 10 consecutive seconds,
/// wholly inside the interval) is deliberately distinct from the >10 s
/// proximity-run rule used during state derivation; both are literal
/// readings of the source thresholds and separately configurable.
struct SyncConfig {
    int interval_len = 60;    // seconds per observation window
    int sp_min_run = 10;      // spatial presence: run length >= sp_min_run
    int py_min_seconds = 30;  // physio presence: flagged seconds > py_min_seconds

    void validate() const;
};

/// Fuse the monomodal series into binary per-interval records, one per
/// (student, interval). Trailing partial intervals are dropped; runs that
/// straddle an interval boundary count only via their within-interval part.
std::vector<IntervalRecord> interleave(const std::string& session_id,
                                       const SpatialStateSeries& spatial,
                                       const VerbalPresence& verbal, const PhysioFlags& physio,
                                       const SyncConfig& cfg,
                                       const IndicatorCatalog& catalog = default_catalog());

/// Full monomodal derivation for one session: spatial states, verbal
/// presence and physio flags, fused into per-interval records.
std::vector<IntervalRecord> derive_records(const RawSession& raw, const SyncConfig& sync_cfg = {},
                                           const PhysioConfig& physio_cfg = {},
                                           const IndicatorCatalog& catalog = default_catalog());

/// intervals.csv: `session_id,student_id,interval_index,<code columns>`.
void write_intervals_csv(const std::filesystem::path& path,
                         const std::vector<IntervalRecord>& records,
                         const IndicatorCatalog& catalog = default_catalog());

std::vector<IntervalRecord> read_intervals_csv(const std::filesystem::path& path,
                                               const IndicatorCatalog& catalog = default_catalog());

}  // namespace fuse
