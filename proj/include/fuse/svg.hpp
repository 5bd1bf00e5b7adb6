#pragma once

#include "fuse/lca.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace fuse::svg {

/// Per-class presence profiles as small-multiple line graphs: code index on
/// the x-axis, presence (0/1) on the y-axis, one panel per class. Item
/// probabilities are drawn as faint dots behind the binarized line.
void write_profiles(const std::filesystem::path& path, const LcaModel& model,
                    double threshold = 0.5);

/// Subtracted co-occurrence network: codes on a circle, edge width scaled
/// by |weight|, colored by which group the edge is stronger in (positive =
/// first group). Edges with |weight| < min_abs_weight are dropped.
void write_network(const std::filesystem::path& path, const std::vector<std::string>& codes,
                   const std::vector<double>& edges, const std::string& positive_label,
                   const std::string& negative_label, double min_abs_weight = 0.0);

}  // namespace fuse::svg
