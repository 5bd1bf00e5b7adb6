#pragma once

#include "fuse/catalog.hpp"
#include "fuse/types.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace fuse {

/// Per-student, per-interval sets of verbal codes that occurred at least
/// once. An utterance belongs to the interval containing its start time;
/// events starting outside the span are dropped with a warning.
struct VerbalPresence {
    Second span_start = 0;
    Second span_end = 0;
    int interval_len = 60;
    std::size_t interval_count = 0;  // trailing partial window excluded
    std::map<std::string, std::vector<std::set<std::size_t>>> presence;  // catalog indices
    std::vector<std::string> warnings;
};

VerbalPresence verbal_presence(const std::map<std::string, std::vector<Utterance>>& utterances,
                               const IndicatorCatalog& catalog, int interval_len,
                               Second span_start, Second span_end);

}  // namespace fuse
