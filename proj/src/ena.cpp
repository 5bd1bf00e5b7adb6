#include "fuse/ena.hpp"

#include "csv.hpp"
#include "fuse/errors.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

namespace fuse::ena {

std::size_t pair_count(std::size_t n_codes) { return n_codes * (n_codes - 1) / 2; }

std::size_t pair_index(std::size_t i, std::size_t j, std::size_t n_codes) {
    // upper-triangle enumeration: (0,1), (0,2), ..., (0,C-1), (1,2), ...
    return i * (2 * n_codes - i - 1) / 2 + (j - i - 1);
}

std::pair<std::size_t, std::size_t> pair_codes(std::size_t index, std::size_t n_codes) {
    for (std::size_t i = 0; i + 1 < n_codes; ++i) {
        const std::size_t row = n_codes - i - 1;
        if (index < row) return {i, i + 1 + index};
        index -= row;
    }
    raise(ErrorCode::InvalidConfig, "pair index out of range");
}

std::vector<Unit> units_from_records(const std::vector<IntervalRecord>& records) {
    // interval_index orders lines within a unit; map keys order the units
    std::map<std::string, std::map<std::size_t, std::uint64_t>> by_unit;
    for (const auto& rec : records) {
        std::uint64_t mask = 0;
        for (std::size_t j = 0; j < rec.values.size(); ++j) {
            if (rec.values[j]) mask |= std::uint64_t{1} << j;
        }
        by_unit[make_unit_id(rec.session_id, rec.student_id)][rec.interval_index] = mask;
    }
    std::vector<Unit> units;
    units.reserve(by_unit.size());
    for (auto& [unit_id, lines] : by_unit) {
        Unit u;
        u.unit_id = unit_id;
        for (auto& [_, mask] : lines) u.lines.push_back(mask);
        units.push_back(std::move(u));
    }
    return units;
}

std::vector<Unit> units_from_assignments(const std::vector<AssignedRecord>& records,
                                         int n_classes) {
    std::map<std::string, std::map<std::size_t, std::uint64_t>> by_unit;
    for (const auto& rec : records) {
        if (rec.map_class < 0 || rec.map_class >= n_classes) {
            raise(ErrorCode::DimensionMismatch, "class label outside model range");
        }
        by_unit[make_unit_id(rec.session_id, rec.student_id)][rec.interval_index] =
            std::uint64_t{1} << rec.map_class;
    }
    std::vector<Unit> units;
    units.reserve(by_unit.size());
    for (auto& [unit_id, lines] : by_unit) {
        Unit u;
        u.unit_id = unit_id;
        for (auto& [_, mask] : lines) u.lines.push_back(mask);
        units.push_back(std::move(u));
    }
    return units;
}

std::vector<std::string> class_code_names(int n_classes) {
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(n_classes));
    for (int k = 1; k <= n_classes; ++k) names.push_back("class." + std::to_string(k));
    return names;
}

AccumulationResult accumulate(const std::vector<Unit>& units, std::size_t n_codes,
                              const Stanza& stanza) {
    if (n_codes < 2 || n_codes > 64) {
        raise(ErrorCode::InvalidConfig, "accumulation needs 2..64 codes");
    }
    if (stanza.mode == Stanza::Mode::Window && stanza.window < 1) {
        raise(ErrorCode::InvalidConfig, "window stanza needs w >= 1");
    }

    AccumulationResult result;
    for (const auto& unit : units) {
        if (unit.lines.empty()) {
            result.skipped_units.push_back(unit.unit_id);
            continue;
        }
        AdjacencyVector vec;
        vec.unit_id = unit.unit_id;
        vec.weights.assign(pair_count(n_codes), 0.0);

        for (std::size_t t = 0; t < unit.lines.size(); ++t) {
            const std::uint64_t line = unit.lines[t];
            std::uint64_t context = 0;
            if (stanza.mode == Stanza::Mode::WholeConversation) {
                for (std::size_t s = 0; s <= t; ++s) context |= unit.lines[s];
            } else {
                const std::size_t lo =
                    t + 1 >= static_cast<std::size_t>(stanza.window)
                        ? t + 1 - static_cast<std::size_t>(stanza.window)
                        : 0;
                for (std::size_t s = lo; s <= t; ++s) context |= unit.lines[s];
            }
            for (std::size_t i = 0; i + 1 < n_codes; ++i) {
                for (std::size_t j = i + 1; j < n_codes; ++j) {
                    const bool i_line = (line >> i) & 1u;
                    const bool j_line = (line >> j) & 1u;
                    const bool i_ctx = (context >> i) & 1u;
                    const bool j_ctx = (context >> j) & 1u;
                    if ((i_line && j_ctx) || (j_line && i_ctx)) {
                        vec.weights[pair_index(i, j, n_codes)] += 1.0;
                    }
                }
            }
        }
        result.vectors.push_back(std::move(vec));
    }
    return result;
}

NormalizedVectors normalize_and_center(const std::vector<AdjacencyVector>& vectors) {
    NormalizedVectors out;
    for (const auto& v : vectors) {
        double norm2 = 0.0;
        for (double w : v.weights) norm2 += w * w;
        if (norm2 == 0.0) {
            out.dropped_units.push_back(v.unit_id);
            continue;
        }
        AdjacencyVector n;
        n.unit_id = v.unit_id;
        n.weights.reserve(v.weights.size());
        const double norm = std::sqrt(norm2);
        for (double w : v.weights) n.weights.push_back(w / norm);
        out.normalized.push_back(std::move(n));
    }
    if (out.normalized.size() < 2) {
        raise(ErrorCode::InvalidConfig, "need >= 2 nonzero adjacency vectors");
    }

    const std::size_t dim = out.normalized.front().weights.size();
    out.grand_mean.assign(dim, 0.0);
    for (const auto& v : out.normalized) {
        for (std::size_t d = 0; d < dim; ++d) out.grand_mean[d] += v.weights[d];
    }
    for (auto& g : out.grand_mean) g /= static_cast<double>(out.normalized.size());

    out.centered.reserve(out.normalized.size());
    for (const auto& v : out.normalized) {
        AdjacencyVector c;
        c.unit_id = v.unit_id;
        c.weights.reserve(dim);
        for (std::size_t d = 0; d < dim; ++d) c.weights.push_back(v.weights[d] - out.grand_mean[d]);
        out.centered.push_back(std::move(c));
    }
    return out;
}

namespace {

std::vector<std::size_t> group_rows(const std::vector<AdjacencyVector>& vectors,
                                    const OutcomeGroups& groups, Satisfaction which) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        auto it = groups.membership.find(vectors[i].unit_id);
        if (it != groups.membership.end() && it->second == which) rows.push_back(i);
    }
    return rows;
}

Eigen::VectorXd mean_of_rows(const Eigen::MatrixXd& x, const std::vector<std::size_t>& rows) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(x.cols());
    for (auto r : rows) mean += x.row(static_cast<Eigen::Index>(r)).transpose();
    return mean / static_cast<double>(rows.size());
}

}  // namespace

EnaSpace means_rotation(const std::vector<AdjacencyVector>& centered,
                        const OutcomeGroups& groups) {
    if (centered.size() < 2) raise(ErrorCode::InvalidConfig, "need >= 2 centered vectors");
    const auto n = static_cast<Eigen::Index>(centered.size());
    const auto dim = static_cast<Eigen::Index>(centered.front().weights.size());

    Eigen::MatrixXd x(n, dim);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index d = 0; d < dim; ++d) {
            x(i, d) = centered[static_cast<std::size_t>(i)].weights[static_cast<std::size_t>(d)];
        }
    }

    const auto rows_a = group_rows(centered, groups, Satisfaction::Unsatisfied);
    const auto rows_b = group_rows(centered, groups, Satisfaction::Satisfied);
    if (rows_a.empty() || rows_b.empty()) {
        raise(ErrorCode::GroupTooSmall, "means rotation needs both outcome groups non-empty");
    }

    Eigen::VectorXd diff = mean_of_rows(x, rows_a) - mean_of_rows(x, rows_b);
    const double diff_norm = diff.norm();
    if (diff_norm < 1e-12) {
        raise(ErrorCode::IdenticalGroupMeans, "group means coincide; MR1 undefined");
    }
    Eigen::VectorXd mr1 = diff / diff_norm;

    // Deflate MR1 out of the data, then take the residual singular
    // directions, largest singular value first.
    Eigen::MatrixXd deflated = x - (x * mr1) * mr1.transpose();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(deflated, Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double sv_cutoff =
        sv.size() > 0 ? sv(0) * std::max(n, dim) * std::numeric_limits<double>::epsilon() : 0.0;

    std::vector<Eigen::VectorXd> axes;
    axes.push_back(mr1);
    for (Eigen::Index a = 0; a < sv.size(); ++a) {
        if (sv(a) <= sv_cutoff) break;
        Eigen::VectorXd v = svd.matrixV().col(a);
        // Modified Gram-Schmidt against the axes kept so far; guards the
        // orthonormality invariant against SVD round-off near rank edges.
        for (const auto& prev : axes) v -= prev.dot(v) * prev;
        const double norm = v.norm();
        if (norm < 1e-8) continue;
        axes.push_back(v / norm);
    }

    EnaSpace space;
    space.grand_mean.assign(centered.front().weights.size(), 0.0);  // data already centered
    for (const auto& v : centered) space.unit_ids.push_back(v.unit_id);

    const double total_var = x.squaredNorm();
    space.axes.reserve(axes.size());
    space.variance_explained.reserve(axes.size());
    space.unit_scores.assign(static_cast<std::size_t>(n), {});
    for (const auto& axis : axes) {
        Eigen::VectorXd scores = x * axis;
        space.axes.emplace_back(axis.data(), axis.data() + axis.size());
        space.variance_explained.push_back(total_var > 0.0 ? scores.squaredNorm() / total_var
                                                           : 0.0);
        for (Eigen::Index i = 0; i < n; ++i) {
            space.unit_scores[static_cast<std::size_t>(i)].push_back(scores(i));
        }
    }
    return space;
}

std::vector<GroupComparison> compare_groups(const EnaSpace& space, const OutcomeGroups& groups,
                                            std::size_t n_axes, double alpha,
                                            std::size_t m_tests) {
    n_axes = std::min(n_axes, space.axes.size());
    if (n_axes == 0) raise(ErrorCode::InvalidConfig, "no axes to compare");
    if (m_tests == 0) m_tests = n_axes;
    const double alpha_adjusted = stats::bonferroni(alpha, m_tests);

    std::vector<GroupComparison> comparisons;
    for (std::size_t axis = 0; axis < n_axes; ++axis) {
        std::vector<double> scores_a, scores_b;
        for (std::size_t i = 0; i < space.unit_ids.size(); ++i) {
            auto it = groups.membership.find(space.unit_ids[i]);
            if (it == groups.membership.end()) continue;
            (it->second == Satisfaction::Unsatisfied ? scores_a : scores_b)
                .push_back(space.unit_scores[i][axis]);
        }
        if (scores_a.empty() || scores_b.empty()) {
            raise(ErrorCode::GroupTooSmall, "both groups need at least one unit");
        }
        const auto test = stats::mann_whitney(scores_a, scores_b);

        GroupComparison cmp;
        cmp.axis = axis == 0 ? "MR1" : "SVD" + std::to_string(axis + 1);
        cmp.u = test.statistic;
        cmp.p = test.p_value;
        cmp.r = stats::rank_biserial(test.statistic, test.n1, test.n2);
        cmp.median_a = stats::median(scores_a);
        cmp.median_b = stats::median(scores_b);
        cmp.n1 = test.n1;
        cmp.n2 = test.n2;
        cmp.alpha_adjusted = alpha_adjusted;
        cmp.significant = test.p_value < alpha_adjusted;
        cmp.method = test.method;
        comparisons.push_back(std::move(cmp));
    }
    return comparisons;
}

std::vector<double> subtracted_network(const std::vector<AdjacencyVector>& normalized,
                                       const OutcomeGroups& groups) {
    if (normalized.empty()) raise(ErrorCode::InvalidConfig, "no vectors");
    const auto rows_a = group_rows(normalized, groups, Satisfaction::Unsatisfied);
    const auto rows_b = group_rows(normalized, groups, Satisfaction::Satisfied);
    if (rows_a.empty() || rows_b.empty()) {
        raise(ErrorCode::GroupTooSmall, "subtracted network needs both groups non-empty");
    }
    const std::size_t dim = normalized.front().weights.size();
    std::vector<double> edges(dim, 0.0);
    for (auto r : rows_a) {
        for (std::size_t d = 0; d < dim; ++d) {
            edges[d] += normalized[r].weights[d] / static_cast<double>(rows_a.size());
        }
    }
    for (auto r : rows_b) {
        for (std::size_t d = 0; d < dim; ++d) {
            edges[d] -= normalized[r].weights[d] / static_cast<double>(rows_b.size());
        }
    }
    return edges;
}

Report run(const std::vector<Unit>& units, const std::vector<std::string>& codes,
           const OutcomeGroups& groups, const Stanza& stanza, double alpha,
           std::size_t m_tests) {
    Report report;
    report.codes = codes;
    report.groups = groups;

    auto acc = accumulate(units, codes.size(), stanza);
    report.skipped_units = std::move(acc.skipped_units);
    report.vectors = normalize_and_center(acc.vectors);
    for (const auto& dropped : report.vectors.dropped_units) {
        report.skipped_units.push_back(dropped);
    }
    report.space = means_rotation(report.vectors.centered, groups);
    report.comparisons = compare_groups(report.space, groups, 2, alpha, m_tests);
    report.subtracted_edges = subtracted_network(report.vectors.normalized, groups);
    return report;
}

void write_report_json(const std::filesystem::path& path, const Report& report) {
    using ordered_json = nlohmann::ordered_json;
    ordered_json j;
    j["codes"] = report.codes;
    j["measure"] = outcome_measure_name(report.groups.measure);
    j["threshold"] = report.groups.threshold;

    ordered_json membership = ordered_json::object();
    for (const auto& [unit, s] : report.groups.membership) {
        membership[unit] = s == Satisfaction::Satisfied ? "satisfied" : "unsatisfied";
    }
    j["groups"] = membership;
    j["n_unsatisfied"] = report.groups.count(Satisfaction::Unsatisfied);
    j["n_satisfied"] = report.groups.count(Satisfaction::Satisfied);

    j["variance_explained"] = ordered_json::object();
    for (std::size_t a = 0; a < report.space.variance_explained.size() && a < 2; ++a) {
        const std::string name = a == 0 ? "MR1" : "SVD" + std::to_string(a + 1);
        j["variance_explained"][name] = report.space.variance_explained[a];
    }

    ordered_json scores = ordered_json::object();
    for (std::size_t i = 0; i < report.space.unit_ids.size(); ++i) {
        ordered_json row = ordered_json::array();
        for (std::size_t a = 0; a < report.space.unit_scores[i].size() && a < 2; ++a) {
            row.push_back(report.space.unit_scores[i][a]);
        }
        scores[report.space.unit_ids[i]] = row;
    }
    j["unit_scores"] = scores;

    ordered_json comparisons = ordered_json::array();
    for (const auto& c : report.comparisons) {
        comparisons.push_back({{"axis", c.axis},
                               {"U", c.u},
                               {"p", c.p},
                               {"r", c.r},
                               {"median_unsatisfied", c.median_a},
                               {"median_satisfied", c.median_b},
                               {"n_unsatisfied", c.n1},
                               {"n_satisfied", c.n2},
                               {"alpha_adjusted", c.alpha_adjusted},
                               {"significant", c.significant},
                               {"method", c.method == stats::TestMethod::Exact
                                              ? "exact"
                                              : "normal_approx"}});
    }
    j["comparisons"] = comparisons;

    ordered_json edges = ordered_json::array();
    const std::size_t n_codes = report.codes.size();
    for (std::size_t d = 0; d < report.subtracted_edges.size(); ++d) {
        const auto [i, k] = pair_codes(d, n_codes);
        edges.push_back({{"a", report.codes[i]},
                         {"b", report.codes[k]},
                         {"weight", report.subtracted_edges[d]}});
    }
    j["subtracted_edges"] = edges;
    j["skipped_units"] = report.skipped_units;

    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorCode::IoFailure, "cannot write " + path.string());
    out << j.dump(2) << '\n';
}

void write_edges_csv(const std::filesystem::path& path, const Report& report) {
    csv::Writer out(path);
    out.row({"code_a", "code_b", "weight", "stronger_in"});
    const std::size_t n_codes = report.codes.size();
    for (std::size_t d = 0; d < report.subtracted_edges.size(); ++d) {
        const auto [i, k] = pair_codes(d, n_codes);
        const double w = report.subtracted_edges[d];
        out.row({report.codes[i], report.codes[k], csv::format_double(w),
                 w > 0 ? "unsatisfied" : (w < 0 ? "satisfied" : "neither")});
    }
}

}  // namespace fuse::ena
