#include "fuse/physio.hpp"

#include "fuse/errors.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace fuse {

namespace {

using HrGrid = std::map<std::string, std::vector<std::optional<double>>>;

HrGrid densify(const std::map<std::string, std::vector<HeartRateSample>>& hr, Second t_begin,
               Second t_end) {
    HrGrid grid;
    const auto len = static_cast<std::size_t>(std::max<Second>(0, t_end - t_begin));
    for (const auto& [sid, samples] : hr) {
        auto& row = grid[sid];
        row.assign(len, std::nullopt);
        for (const auto& s : samples) {
            if (s.t >= t_begin && s.t < t_end) {
                row[static_cast<std::size_t>(s.t - t_begin)] = s.bpm;
            }
        }
    }
    return grid;
}

// Two-pass Pearson over a fully-populated window; nullopt when any sample
// is missing or either side has zero variance.
std::optional<double> window_pearson(const std::vector<std::optional<double>>& a,
                                     const std::vector<std::optional<double>>& b,
                                     std::size_t lo, std::size_t hi) {
    double mean_a = 0.0, mean_b = 0.0;
    const double n = static_cast<double>(hi - lo);
    for (std::size_t t = lo; t < hi; ++t) {
        if (!a[t] || !b[t]) return std::nullopt;
        mean_a += *a[t];
        mean_b += *b[t];
    }
    mean_a /= n;
    mean_b /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t t = lo; t < hi; ++t) {
        const double da = *a[t] - mean_a;
        const double db = *b[t] - mean_b;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) return std::nullopt;
    const double r = sab / std::sqrt(saa * sbb);
    return std::clamp(r, -1.0, 1.0);
}

}  // namespace

double baseline(const std::vector<HeartRateSample>& hr, Second phase1_start, Second phase1_end) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& s : hr) {
        if (s.t >= phase1_start && s.t < phase1_end) {
            sum += s.bpm;
            ++count;
        }
    }
    if (count < kMinBaselineSamples) {
        raise(ErrorCode::InsufficientBaselineData,
              "only " + std::to_string(count) + " phase-1 samples, need >= " +
                  std::to_string(kMinBaselineSamples));
    }
    return sum / static_cast<double>(count);
}

std::vector<std::optional<bool>> arousal_flags(const std::vector<HeartRateSample>& hr,
                                               double baseline_bpm, Second t_begin,
                                               Second t_end) {
    std::vector<std::optional<bool>> flags(
        static_cast<std::size_t>(std::max<Second>(0, t_end - t_begin)), std::nullopt);
    for (const auto& s : hr) {
        if (s.t >= t_begin && s.t < t_end) {
            flags[static_cast<std::size_t>(s.t - t_begin)] = s.bpm > baseline_bpm;
        }
    }
    return flags;
}

SynchronyResult synchrony_flags(const std::map<std::string, std::vector<HeartRateSample>>& all_hr,
                                const PhysioConfig& cfg, Second t_begin, Second t_end) {
    if (cfg.window < 2) raise(ErrorCode::InvalidConfig, "synchrony window must be >= 2 s");
    if (all_hr.size() < 2) {
        raise(ErrorCode::InvalidConfig, "synchrony needs heart rate for >= 2 students");
    }
    // Windows trail back before t_begin, so the grid starts at zero.
    const Second grid_begin = 0;
    const auto grid = densify(all_hr, grid_begin, t_end);
    const auto out_len = static_cast<std::size_t>(std::max<Second>(0, t_end - t_begin));

    SynchronyResult result;
    for (const auto& [sid, _] : grid) {
        result.flags[sid].assign(out_len, std::nullopt);
        result.mean_r[sid].assign(out_len, std::nullopt);
    }

    for (Second t = t_begin; t < t_end; ++t) {
        const Second lo_s = t - cfg.window + 1;
        if (lo_s < grid_begin) continue;  // window not fully inside the data range
        const auto lo = static_cast<std::size_t>(lo_s - grid_begin);
        const auto hi = static_cast<std::size_t>(t - grid_begin) + 1;
        for (auto i = grid.begin(); i != grid.end(); ++i) {
            double sum = 0.0;
            int pairs = 0;
            for (auto j = grid.begin(); j != grid.end(); ++j) {
                if (i == j) continue;
                if (auto r = window_pearson(i->second, j->second, lo, hi)) {
                    sum += *r;
                    ++pairs;
                }
            }
            if (pairs > 0) {
                const double mean_r = sum / pairs;
                const auto idx = static_cast<std::size_t>(t - t_begin);
                result.mean_r[i->first][idx] = mean_r;
                result.flags[i->first][idx] = mean_r > cfg.tau;
            }
        }
    }
    return result;
}

PhysioFlags physio_flags(const RawSession& raw, const PhysioConfig& cfg) {
    PhysioFlags out;
    out.span_start = raw.span_start();
    out.span_end = raw.span_end();
    const auto& phase1 = raw.phases.front();

    for (const auto& sid : raw.students) {
        auto it = raw.heart_rate.find(sid);
        const std::vector<HeartRateSample> empty;
        const auto& hr = it != raw.heart_rate.end() ? it->second : empty;
        out.baseline_bpm[sid] = baseline(hr, phase1.start_s, phase1.end_s);
        out.arousal[sid] = arousal_flags(hr, out.baseline_bpm[sid], out.span_start, out.span_end);
    }

    auto sync = synchrony_flags(raw.heart_rate, cfg, out.span_start, out.span_end);
    for (const auto& sid : raw.students) {
        auto fit = sync.flags.find(sid);
        auto rit = sync.mean_r.find(sid);
        const auto len = static_cast<std::size_t>(out.span_end - out.span_start);
        out.synchrony[sid] =
            fit != sync.flags.end() ? std::move(fit->second)
                                    : std::vector<std::optional<bool>>(len, std::nullopt);
        out.mean_pairwise_r[sid] =
            rit != sync.mean_r.end() ? std::move(rit->second)
                                     : std::vector<std::optional<double>>(len, std::nullopt);
    }
    return out;
}

}  // namespace fuse
