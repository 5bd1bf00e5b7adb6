#include "fuse/verbal.hpp"

#include "fuse/errors.hpp"

namespace fuse {

VerbalPresence verbal_presence(const std::map<std::string, std::vector<Utterance>>& utterances,
                               const IndicatorCatalog& catalog, int interval_len,
                               Second span_start, Second span_end) {
    if (interval_len <= 0) raise(ErrorCode::InvalidConfig, "interval_len must be positive");

    VerbalPresence out;
    out.span_start = span_start;
    out.span_end = span_end;
    out.interval_len = interval_len;
    out.interval_count =
        static_cast<std::size_t>(std::max<Second>(0, span_end - span_start) / interval_len);

    for (const auto& [sid, events] : utterances) {
        auto& rows = out.presence[sid];
        rows.assign(out.interval_count, {});
        for (const auto& u : events) {
            if (u.t_start < span_start || u.t_start >= span_end) {
                out.warnings.push_back(sid + ": utterance '" + u.code + "' at t=" +
                                       std::to_string(u.t_start) + " outside span, dropped");
                continue;
            }
            const auto interval =
                static_cast<std::size_t>((u.t_start - span_start) / interval_len);
            if (interval >= out.interval_count) continue;  // trailing partial window
            rows[interval].insert(catalog.index_of(u.code));
        }
    }
    return out;
}

}  // namespace fuse
