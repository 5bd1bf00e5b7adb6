#include "fuse/catalog.hpp"

#include "fuse/errors.hpp"

#include <algorithm>
#include <unordered_set>

namespace fuse {

const char* modality_name(Modality m) {
    switch (m) {
        case Modality::Spatial: return "spatial";
        case Modality::Verbal: return "verbal";
        case Modality::Physiological: return "physiological";
    }
    return "unknown";
}

Modality modality_from_name(std::string_view name) {
    if (name == "spatial") return Modality::Spatial;
    if (name == "verbal") return Modality::Verbal;
    if (name == "physiological") return Modality::Physiological;
    raise(ErrorCode::InvalidConfig, "unknown modality '" + std::string(name) + "'");
}

IndicatorCatalog::IndicatorCatalog(std::vector<std::pair<std::string, Modality>> codes) {
    std::unordered_set<std::string> seen;
    entries_.reserve(codes.size());
    for (std::size_t i = 0; i < codes.size(); ++i) {
        auto& [code, modality] = codes[i];
        if (!seen.insert(code).second) {
            raise(ErrorCode::InvalidConfig, "duplicate indicator code '" + code + "'");
        }
        entries_.push_back(Entry{std::move(code), modality, i});
    }
}

std::optional<std::size_t> IndicatorCatalog::lookup(std::string_view code) const {
    for (const auto& e : entries_) {
        if (e.code == code) return e.index;
    }
    return std::nullopt;
}

std::size_t IndicatorCatalog::index_of(std::string_view code) const {
    auto idx = lookup(code);
    if (!idx) {
        raise(ErrorCode::UnknownCode, "indicator code '" + std::string(code) + "' not in catalog");
    }
    return *idx;
}

const std::string& IndicatorCatalog::code_at(std::size_t index) const {
    return entries_.at(index).code;
}

Modality IndicatorCatalog::modality_at(std::size_t index) const {
    return entries_.at(index).modality;
}

std::size_t IndicatorCatalog::count(Modality m) const {
    return static_cast<std::size_t>(std::count_if(
        entries_.begin(), entries_.end(), [m](const Entry& e) { return e.modality == m; }));
}

std::vector<std::string> IndicatorCatalog::code_names() const {
    std::vector<std::string> names;
    names.reserve(entries_.size());
    for (const auto& e : entries_) names.push_back(e.code);
    return names;
}

bool IndicatorCatalog::operator==(const IndicatorCatalog& other) const {
    if (entries_.size() != other.entries_.size()) return false;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].code != other.entries_[i].code ||
            entries_[i].modality != other.entries_[i].modality) {
            return false;
        }
    }
    return true;
}

const IndicatorCatalog& default_catalog() {
    static const IndicatorCatalog catalog{{
        {"SP.collaborate.primary", Modality::Spatial},
        {"SP.individual.primary", Modality::Spatial},
        {"SP.collaborate.secondary", Modality::Spatial},
        {"SP.individual.secondary", Modality::Spatial},
        {"SP.collaborate.distraction", Modality::Spatial},
        {"SP.individual.distraction", Modality::Spatial},
        {"SP.task.distribution", Modality::Spatial},
        {"SP.task.transition", Modality::Spatial},
        {"VB.task.allocation", Modality::Verbal},
        {"VB.handover.provision", Modality::Verbal},
        {"VB.escalation", Modality::Verbal},
        {"VB.information.sharing", Modality::Verbal},
        {"VB.information.requesting", Modality::Verbal},
        {"VB.responding.to.requests", Modality::Verbal},
        {"VB.agreement", Modality::Verbal},
        {"PY.arousal", Modality::Physiological},
        {"PY.synchrony", Modality::Physiological},
    }};
    return catalog;
}

}  // namespace fuse
