#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fuse {

enum class Modality { Spatial, Verbal, Physiological };

const char* modality_name(Modality m);
Modality modality_from_name(std::string_view name);

/// Ordered registry of monomodal indicator codes. Entry order defines the
/// column layout of every indicator vector and CSV, so it is part of the
/// on-disk contract: never reorder entries of an existing dataset.
class IndicatorCatalog {
public:
    struct Entry {
        std::string code;
        Modality modality;
        std::size_t index;
    };

    IndicatorCatalog() = default;
    explicit IndicatorCatalog(std::vector<std::pair<std::string, Modality>> codes);

    const std::vector<Entry>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }

    std::optional<std::size_t> lookup(std::string_view code) const;
    // Throws Error(UnknownCode) when the code is not registered.
    std::size_t index_of(std::string_view code) const;
    const std::string& code_at(std::size_t index) const;
    Modality modality_at(std::size_t index) const;

    std::size_t count(Modality m) const;
    std::vector<std::string> code_names() const;

    bool operator==(const IndicatorCatalog& other) const;

private:
    std::vector<Entry> entries_;
};

/// The canonical 17-code catalog: 8 spatial, 7 verbal, 2 physiological,
/// in fixed declaration order (SP block, VB block, PY block).
const IndicatorCatalog& default_catalog();

inline constexpr std::size_t kSpatialCodeCount = 8;
inline constexpr std::size_t kVerbalCodeCount = 7;
inline constexpr std::size_t kPhysioCodeCount = 2;
inline constexpr std::size_t kDefaultCodeCount =
    kSpatialCodeCount + kVerbalCodeCount + kPhysioCodeCount;

}  // namespace fuse
