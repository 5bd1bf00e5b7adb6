#pragma once

#include "fuse/lca.hpp"
#include "fuse/statkit.hpp"
#include "fuse/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace fuse::ena {

/// Context window for co-occurrence accumulation. WholeConversation uses
/// an expanding context (the current line plus every prior line of the
/// unit's conversation); Window(w) keeps the w-1 prior lines.
struct Stanza {
    enum class Mode { WholeConversation, Window };
    Mode mode = Mode::WholeConversation;
    int window = 0;  // lines, only for Mode::Window

    static Stanza whole() { return {Mode::WholeConversation, 0}; }
    static Stanza moving_window(int w) { return {Mode::Window, w}; }
};

/// One analysis unit (a session-scoped student): its lines in temporal
/// order, each line a bitmask of the codes present in that interval.
struct Unit {
    std::string unit_id;
    std::vector<std::uint64_t> lines;
};

struct AdjacencyVector {
    std::string unit_id;
    std::vector<double> weights;  // one per unordered code pair
};

struct EnaSpace {
    std::vector<std::string> unit_ids;
    std::vector<double> grand_mean;
    std::vector<std::vector<double>> axes;        // axes[0]=MR1, axes[1]=SVD2, ...
    std::vector<double> variance_explained;       // per axis, fraction of total
    std::vector<std::vector<double>> unit_scores; // [unit][axis]
};

struct GroupComparison {
    std::string axis;      // "MR1", "SVD2", ...
    double u = 0.0;        // Mann-Whitney U for group A (Unsatisfied)
    double p = 1.0;        // two-sided
    double r = 0.0;        // rank-biserial, 1 - 2U/(n1*n2)
    double median_a = 0.0;
    double median_b = 0.0;
    std::size_t n1 = 0;    // group A size
    std::size_t n2 = 0;    // group B size
    double alpha_adjusted = 0.05;
    bool significant = false;
    stats::TestMethod method = stats::TestMethod::Exact;
};

std::size_t pair_count(std::size_t n_codes);
std::size_t pair_index(std::size_t i, std::size_t j, std::size_t n_codes);  // i < j
std::pair<std::size_t, std::size_t> pair_codes(std::size_t index, std::size_t n_codes);

/// Build units from interval records: one line per interval, the line's
/// codes are the record's set bits. Lines are ordered by interval index.
std::vector<Unit> units_from_records(const std::vector<IntervalRecord>& records);

/// Build units from MAP class labels: each line carries exactly one code
/// (its class), so all co-occurrence signal is cross-line.
std::vector<Unit> units_from_assignments(const std::vector<AssignedRecord>& records,
                                         int n_classes);

std::vector<std::string> class_code_names(int n_classes);

struct AccumulationResult {
    std::vector<AdjacencyVector> vectors;
    std::vector<std::string> skipped_units;  // EmptyUnit warnings
};

/// Binary summation: for each line, each unordered code pair gains at most
/// +1 when one code is on the line and the other is in the context.
AccumulationResult accumulate(const std::vector<Unit>& units, std::size_t n_codes,
                              const Stanza& stanza = Stanza::whole());

struct NormalizedVectors {
    std::vector<AdjacencyVector> normalized;  // unit L2 norm
    std::vector<AdjacencyVector> centered;    // normalized minus grand mean
    std::vector<double> grand_mean;
    std::vector<std::string> dropped_units;   // ZeroVector warnings
};

NormalizedVectors normalize_and_center(const std::vector<AdjacencyVector>& vectors);

/// Means rotation: MR1 is the normalized difference of the two group means
/// in the centered space; the remaining axes are the singular directions of
/// the data deflated against MR1, ordered by singular value.
EnaSpace means_rotation(const std::vector<AdjacencyVector>& centered,
                        const OutcomeGroups& groups);

/// Mann-Whitney per axis (default: MR1 and SVD2) with Bonferroni-adjusted
/// significance. Group A = Unsatisfied, B = Satisfied.
std::vector<GroupComparison> compare_groups(const EnaSpace& space, const OutcomeGroups& groups,
                                            std::size_t n_axes = 2, double alpha = 0.05,
                                            std::size_t m_tests = 0 /* 0 = n_axes */);

/// Edge weights of the subtracted network: per-pair difference of group
/// means over the sphere-normalized vectors (positive = stronger in A).
std::vector<double> subtracted_network(const std::vector<AdjacencyVector>& normalized,
                                       const OutcomeGroups& groups);

struct Report {
    std::vector<std::string> codes;
    OutcomeGroups groups;
    NormalizedVectors vectors;
    EnaSpace space;
    std::vector<GroupComparison> comparisons;
    std::vector<double> subtracted_edges;
    std::vector<std::string> skipped_units;
};

/// Full ENA pass over prepared units.
Report run(const std::vector<Unit>& units, const std::vector<std::string>& codes,
           const OutcomeGroups& groups, const Stanza& stanza = Stanza::whole(),
           double alpha = 0.05, std::size_t m_tests = 0);

void write_report_json(const std::filesystem::path& path, const Report& report);
void write_edges_csv(const std::filesystem::path& path, const Report& report);

}  // namespace fuse::ena
