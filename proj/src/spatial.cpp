#include "fuse/spatial.hpp"

#include "fuse/errors.hpp"

#include <cmath>
#include <limits>

namespace fuse {

const char* sp_state_name(SpState s) {
    switch (s) {
        case SpState::CollaboratePrimary: return "SP.collaborate.primary";
        case SpState::IndividualPrimary: return "SP.individual.primary";
        case SpState::CollaborateSecondary: return "SP.collaborate.secondary";
        case SpState::IndividualSecondary: return "SP.individual.secondary";
        case SpState::CollaborateDistraction: return "SP.collaborate.distraction";
        case SpState::IndividualDistraction: return "SP.individual.distraction";
        case SpState::TaskDistribution: return "SP.task.distribution";
        case SpState::TaskTransition: return "SP.task.transition";
    }
    return "unknown";
}

std::optional<std::size_t> assign_zone(double x, double y, const std::vector<ZoneSpec>& zones) {
    std::optional<std::size_t> best;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < zones.size(); ++i) {
        const double dx = x - zones[i].cx;
        const double dy = y - zones[i].cy;
        const double dist = std::hypot(dx, dy);
        if (dist <= zones[i].radius && dist < best_dist) {
            best = i;
            best_dist = dist;
        }
    }
    return best;
}

namespace {

// Dense per-second position grid over [t_begin, t_end); nullopt = gap.
using PositionGrid = std::map<std::string, std::vector<std::optional<PositionSample>>>;

PositionGrid densify(const std::map<std::string, std::vector<PositionSample>>& positions,
                     Second t_begin, Second t_end) {
    PositionGrid grid;
    const auto len = static_cast<std::size_t>(std::max<Second>(0, t_end - t_begin));
    for (const auto& [sid, samples] : positions) {
        auto& row = grid[sid];
        row.assign(len, std::nullopt);
        for (const auto& s : samples) {
            if (s.t >= t_begin && s.t < t_end) {
                row[static_cast<std::size_t>(s.t - t_begin)] = s;
            }
        }
    }
    return grid;
}

// Marks seconds that lie inside a maximal true-run of >= min_run.
void mark_sustained(const std::vector<bool>& condition, int min_run, std::vector<bool>& out) {
    const std::size_t n = condition.size();
    std::size_t i = 0;
    while (i < n) {
        if (!condition[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < n && condition[j + 1]) ++j;
        if (j - i + 1 >= static_cast<std::size_t>(min_run)) {
            for (std::size_t k = i; k <= j; ++k) out[k] = true;
        }
        i = j + 1;
    }
}

}  // namespace

std::map<std::string, std::vector<bool>> collaboration_flags(
    const std::map<std::string, std::vector<PositionSample>>& positions,
    Second t_begin, Second t_end) {
    const auto grid = densify(positions, t_begin, t_end);
    const auto len = static_cast<std::size_t>(std::max<Second>(0, t_end - t_begin));

    std::map<std::string, std::vector<bool>> flags;
    for (const auto& [sid, _] : grid) flags[sid].assign(len, false);

    // Pairwise proximity runs; both members of a qualifying run get flagged,
    // which keeps the pair-level symmetry invariant by construction.
    for (auto a = grid.begin(); a != grid.end(); ++a) {
        for (auto b = std::next(a); b != grid.end(); ++b) {
            std::vector<bool> near(len, false);
            for (std::size_t t = 0; t < len; ++t) {
                const auto& pa = a->second[t];
                const auto& pb = b->second[t];
                if (pa && pb) {
                    near[t] = std::hypot(pa->x - pb->x, pa->y - pb->y) <= kProximityMetres;
                }
            }
            std::vector<bool> sustained(len, false);
            mark_sustained(near, kCollaborationMinRunSeconds, sustained);
            auto& fa = flags[a->first];
            auto& fb = flags[b->first];
            for (std::size_t t = 0; t < len; ++t) {
                if (sustained[t]) {
                    fa[t] = true;
                    fb[t] = true;
                }
            }
        }
    }
    return flags;
}

SpatialStateSeries spatial_states(const RawSession& raw) {
    if (raw.zones.empty()) raise(ErrorCode::InvalidConfig, "no zones defined");

    // Proximity runs are evaluated over the whole session timeline so that
    // behaviour starting before the analysis span still counts inside it;
    // the span window only selects which seconds are reported.
    const Second t_begin = 0;
    const Second t_end = raw.session_end();
    const auto flags = collaboration_flags(raw.positions, t_begin, t_end);
    const auto grid = densify(raw.positions, t_begin, t_end);

    SpatialStateSeries series;
    series.span_start = raw.span_start();
    series.span_end = raw.span_end();
    const auto span_len = static_cast<std::size_t>(series.span_end - series.span_start);

    for (const auto& sid : raw.students) {
        auto& out = series.states[sid];
        out.assign(span_len, std::nullopt);
        auto git = grid.find(sid);
        if (git == grid.end()) continue;
        const auto& row = git->second;
        const auto& flag_row = flags.at(sid);

        for (std::size_t s = 0; s < span_len; ++s) {
            const auto t = static_cast<std::size_t>(series.span_start) + s;
            if (t >= row.size() || !row[t]) continue;  // gap -> no state
            const bool collaborating = flag_row[t];
            const auto zone = assign_zone(row[t]->x, row[t]->y, raw.zones);
            if (zone) {
                switch (raw.zones[*zone].task_type) {
                    case TaskType::Primary:
                        out[s] = collaborating ? SpState::CollaboratePrimary
                                               : SpState::IndividualPrimary;
                        break;
                    case TaskType::Secondary:
                        out[s] = collaborating ? SpState::CollaborateSecondary
                                               : SpState::IndividualSecondary;
                        break;
                    case TaskType::Distraction:
                        out[s] = collaborating ? SpState::CollaborateDistraction
                                               : SpState::IndividualDistraction;
                        break;
                }
            } else {
                out[s] = collaborating ? SpState::TaskDistribution : SpState::TaskTransition;
            }
        }
    }
    return series;
}

}  // namespace fuse
