#include "fuse/sync.hpp"

#include "csv.hpp"
#include "fuse/errors.hpp"

#include <algorithm>

namespace fuse {

void SyncConfig::validate() const {
    if (interval_len <= 0) raise(ErrorCode::InvalidConfig, "interval_len must be positive");
    if (sp_min_run <= 0 || sp_min_run > interval_len) {
        raise(ErrorCode::InvalidConfig, "need 0 < sp_min_run <= interval_len");
    }
    if (py_min_seconds < 0 || py_min_seconds >= interval_len) {
        raise(ErrorCode::InvalidConfig, "need 0 <= py_min_seconds < interval_len");
    }
}

namespace {

// Longest consecutive run of `state` within [lo, hi) of the state series.
int max_state_run(const std::vector<std::optional<SpState>>& states, std::size_t lo,
                  std::size_t hi, SpState state) {
    int best = 0, run = 0;
    for (std::size_t t = lo; t < hi; ++t) {
        if (states[t] && *states[t] == state) {
            best = std::max(best, ++run);
        } else {
            run = 0;
        }
    }
    return best;
}

int count_true(const std::vector<std::optional<bool>>& flags, std::size_t lo, std::size_t hi) {
    int n = 0;
    for (std::size_t t = lo; t < hi; ++t) {
        if (flags[t] && *flags[t]) ++n;
    }
    return n;
}

}  // namespace

std::vector<IntervalRecord> interleave(const std::string& session_id,
                                       const SpatialStateSeries& spatial,
                                       const VerbalPresence& verbal, const PhysioFlags& physio,
                                       const SyncConfig& cfg, const IndicatorCatalog& catalog) {
    cfg.validate();
    if (spatial.span_start != physio.span_start || spatial.span_end != physio.span_end ||
        spatial.span_start != verbal.span_start || spatial.span_end != verbal.span_end) {
        raise(ErrorCode::SpanMismatch, "indicator series cover different spans");
    }
    if (verbal.interval_len != cfg.interval_len) {
        raise(ErrorCode::SpanMismatch, "verbal presence built with a different interval length");
    }

    const auto span_len = static_cast<std::size_t>(spatial.span_end - spatial.span_start);
    const auto n_intervals = span_len / static_cast<std::size_t>(cfg.interval_len);

    // SP column index = SpState value; PY columns come after the VB block.
    const std::size_t arousal_col = catalog.index_of("PY.arousal");
    const std::size_t synchrony_col = catalog.index_of("PY.synchrony");

    std::vector<IntervalRecord> records;
    for (const auto& [sid, states] : spatial.states) {
        const auto& arousal = physio.arousal.at(sid);
        const auto& synchrony = physio.synchrony.at(sid);
        const auto verbal_it = verbal.presence.find(sid);

        for (std::size_t i = 0; i < n_intervals; ++i) {
            const auto lo = i * static_cast<std::size_t>(cfg.interval_len);
            const auto hi = lo + static_cast<std::size_t>(cfg.interval_len);

            IntervalRecord rec;
            rec.session_id = session_id;
            rec.student_id = sid;
            rec.interval_index = i;
            rec.values.assign(catalog.size(), 0);

            for (int s = 0; s < static_cast<int>(kSpatialCodeCount); ++s) {
                const auto state = static_cast<SpState>(s);
                if (max_state_run(states, lo, hi, state) >= cfg.sp_min_run) {
                    rec.values[static_cast<std::size_t>(s)] = 1;
                }
            }
            if (verbal_it != verbal.presence.end()) {
                for (std::size_t code : verbal_it->second[i]) rec.values[code] = 1;
            }
            if (count_true(arousal, lo, hi) > cfg.py_min_seconds) rec.values[arousal_col] = 1;
            if (count_true(synchrony, lo, hi) > cfg.py_min_seconds) rec.values[synchrony_col] = 1;

            records.push_back(std::move(rec));
        }
    }
    return records;
}

std::vector<IntervalRecord> derive_records(const RawSession& raw, const SyncConfig& sync_cfg,
                                           const PhysioConfig& physio_cfg,
                                           const IndicatorCatalog& catalog) {
    const auto spatial = spatial_states(raw);
    const auto verbal = verbal_presence(raw.utterances, catalog, sync_cfg.interval_len,
                                        raw.span_start(), raw.span_end());
    const auto physio = physio_flags(raw, physio_cfg);
    return interleave(raw.session_id, spatial, verbal, physio, sync_cfg, catalog);
}

void write_intervals_csv(const std::filesystem::path& path,
                         const std::vector<IntervalRecord>& records,
                         const IndicatorCatalog& catalog) {
    csv::Writer out(path);
    std::vector<std::string> header{"session_id", "student_id", "interval_index"};
    for (const auto& name : catalog.code_names()) header.push_back(name);
    out.row(header);
    for (const auto& rec : records) {
        if (rec.values.size() != catalog.size()) {
            raise(ErrorCode::DimensionMismatch, "record width does not match catalog");
        }
        std::vector<std::string> row{rec.session_id, rec.student_id,
                                     std::to_string(rec.interval_index)};
        for (auto v : rec.values) row.push_back(v ? "1" : "0");
        out.row(row);
    }
}

std::vector<IntervalRecord> read_intervals_csv(const std::filesystem::path& path,
                                               const IndicatorCatalog& catalog) {
    const auto table = csv::read_file(path);
    if (table.header.size() != 3 + catalog.size()) {
        raise(ErrorCode::MalformedRow,
              table.file + ": expected " + std::to_string(3 + catalog.size()) + " columns");
    }
    for (std::size_t j = 0; j < catalog.size(); ++j) {
        if (table.header[3 + j] != catalog.code_at(j)) {
            raise(ErrorCode::MalformedRow, table.file + ": column '" + table.header[3 + j] +
                                               "' does not match catalog order");
        }
    }
    std::vector<IntervalRecord> records;
    records.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        csv::expect_width(table, r, table.header.size());
        IntervalRecord rec;
        rec.session_id = table.rows[r][0];
        rec.student_id = table.rows[r][1];
        rec.interval_index = static_cast<std::size_t>(csv::parse_int(table, r, 2));
        rec.values.reserve(catalog.size());
        for (std::size_t j = 0; j < catalog.size(); ++j) {
            const auto& cell = table.rows[r][3 + j];
            if (cell != "0" && cell != "1") {
                raise(ErrorCode::MalformedRow,
                      table.file + " row " + std::to_string(r + 1) + ": cell '" + cell +
                          "' is not 0/1");
            }
            rec.values.push_back(cell == "1" ? 1 : 0);
        }
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace fuse
