#include "fuse/ena.hpp"
#include "fuse/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace fuse;
using namespace fuse::ena;

namespace {

OutcomeGroups groups_of(const std::map<std::string, Satisfaction>& membership) {
    OutcomeGroups g;
    g.membership = membership;
    return g;
}

AdjacencyVector vec(const std::string& id, std::vector<double> w) {
    return {id, std::move(w)};
}

}  // namespace

TEST_CASE("pair index enumeration is a bijection") {
    const std::size_t n = 17;
    std::size_t idx = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j, ++idx) {
            CHECK(pair_index(i, j, n) == idx);
            const auto [a, b] = pair_codes(idx, n);
            CHECK(a == i);
            CHECK(b == j);
        }
    }
    CHECK(pair_count(n) == idx);
}

TEST_CASE("within-line co-occurrence counts once") {
    Unit u{"x", {0b011}};  // codes 0 and 1 on one line
    const auto acc = accumulate({u}, 3);
    REQUIRE(acc.vectors.size() == 1);
    CHECK(acc.vectors[0].weights[pair_index(0, 1, 3)] == doctest::Approx(1.0));
    CHECK(acc.vectors[0].weights[pair_index(0, 2, 3)] == doctest::Approx(0.0));
}

TEST_CASE("whole-conversation context reaches back to earlier lines") {
    Unit u{"x", {0b001, 0b010}};  // line 0: code 0; line 1: code 1
    const auto acc = accumulate({u}, 2);
    CHECK(acc.vectors[0].weights[pair_index(0, 1, 2)] == doctest::Approx(1.0));

    // one more line with code 0 again: line 2 sees code 1 in context -> +1
    Unit u2{"x", {0b001, 0b010, 0b001}};
    const auto acc2 = accumulate({u2}, 2);
    CHECK(acc2.vectors[0].weights[pair_index(0, 1, 2)] == doctest::Approx(2.0));
}

TEST_CASE("a window stanza forgets lines beyond w-1 back") {
    Unit u{"x", {0b001, 0b100, 0b010}};  // codes 0, 2, 1 on successive lines
    const auto whole = accumulate({u}, 3, Stanza::whole());
    CHECK(whole.vectors[0].weights[pair_index(0, 1, 3)] == doctest::Approx(1.0));

    const auto windowed = accumulate({u}, 3, Stanza::moving_window(2));
    // line 2 (code 1) only sees line 1 (code 2): pair (0,1) never co-occurs
    CHECK(windowed.vectors[0].weights[pair_index(0, 1, 3)] == doctest::Approx(0.0));
    CHECK(windowed.vectors[0].weights[pair_index(1, 2, 3)] == doctest::Approx(1.0));
}

TEST_CASE("single-code lines accumulate only cross-line pairs") {
    // MAP-class style unit: exactly one code per line
    Unit u{"x", {0b0001, 0b0010, 0b0001, 0b0100}};
    const auto acc = accumulate({u}, 4);
    // no line has two codes, so every weight comes from the context
    CHECK(acc.vectors[0].weights[pair_index(0, 1, 4)] > 0.0);
    CHECK(acc.vectors[0].weights[pair_index(0, 2, 4)] > 0.0);
    CHECK(acc.vectors[0].weights[pair_index(1, 3, 4)] == doctest::Approx(0.0));
}

TEST_CASE("a line that adds no new pair context changes nothing beyond its own contribution") {
    // duplicating the final line of a <=5-line fixture adds exactly the
    // same increment again (binary summation, expanding context)
    Unit base{"x", {0b011, 0b100, 0b010}};
    Unit dup{"x", {0b011, 0b100, 0b010, 0b010}};
    const auto a = accumulate({base}, 3).vectors[0].weights;
    const auto b = accumulate({dup}, 3).vectors[0].weights;
    // the duplicate line sees the same context as the original line plus
    // itself, so the delta equals the delta of line 2 -> hand-enumerated
    CHECK(b[pair_index(0, 1, 3)] == a[pair_index(0, 1, 3)] + 1.0);
    CHECK(b[pair_index(1, 2, 3)] == a[pair_index(1, 2, 3)] + 1.0);
    CHECK(b[pair_index(0, 2, 3)] == a[pair_index(0, 2, 3)]);
}

TEST_CASE("empty units are skipped with a warning") {
    Unit empty{"gone", {}};
    Unit ok{"x", {0b11}};
    const auto acc = accumulate({empty, ok}, 2);
    CHECK(acc.vectors.size() == 1);
    REQUIRE(acc.skipped_units.size() == 1);
    CHECK(acc.skipped_units[0] == "gone");
}

TEST_CASE("unit order does not change any unit's accumulated vector") {
    std::mt19937_64 rng(3);
    std::vector<Unit> units;
    for (int i = 0; i < 6; ++i) {
        Unit u{"u" + std::to_string(i), {}};
        for (int l = 0; l < 10; ++l) u.lines.push_back(rng() % 32);
        units.push_back(std::move(u));
    }
    auto shuffled = units;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);

    const auto a = accumulate(units, 5);
    const auto b = accumulate(shuffled, 5);
    for (const auto& va : a.vectors) {
        for (const auto& vb : b.vectors) {
            if (va.unit_id == vb.unit_id) CHECK(va.weights == vb.weights);
        }
    }
}

TEST_CASE("normalization is the 3-4-5 triangle and centering zeroes the mean") {
    auto nc = normalize_and_center({vec("a", {3, 4, 0}), vec("b", {0, 5, 0})});
    CHECK(nc.normalized[0].weights[0] == doctest::Approx(0.6));
    CHECK(nc.normalized[0].weights[1] == doctest::Approx(0.8));
    CHECK(nc.normalized[1].weights[1] == doctest::Approx(1.0));
    for (std::size_t d = 0; d < 3; ++d) {
        double mean = 0.0;
        for (const auto& v : nc.centered) mean += v.weights[d];
        CHECK(std::abs(mean) < 1e-12);
    }
}

TEST_CASE("zero vectors are dropped with a warning") {
    auto nc = normalize_and_center({vec("a", {1, 0}), vec("zero", {0, 0}), vec("b", {0, 1})});
    CHECK(nc.normalized.size() == 2);
    REQUIRE(nc.dropped_units.size() == 1);
    CHECK(nc.dropped_units[0] == "zero");

    CHECK_THROWS_AS(normalize_and_center({vec("a", {1, 0}), vec("z", {0, 0})}), Error);
}

TEST_CASE("means rotation puts MR1 along the group mean difference") {
    // centered 6-dim data where groups differ only in coordinate 5
    std::vector<AdjacencyVector> centered;
    std::map<std::string, Satisfaction> membership;
    for (int i = 0; i < 4; ++i) {
        std::vector<double> w(6, 0.0);
        w[5] = i < 2 ? 1.0 : -1.0;
        w[0] = (i % 2 == 0) ? 0.3 : -0.3;  // shared within-group scatter
        const std::string id = "u" + std::to_string(i);
        centered.push_back(vec(id, w));
        membership[id] = i < 2 ? Satisfaction::Unsatisfied : Satisfaction::Satisfied;
    }
    const auto space = means_rotation(centered, groups_of(membership));
    REQUIRE(!space.axes.empty());
    CHECK(std::abs(space.axes[0][5]) == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t d = 0; d < 5; ++d) {
        CHECK(std::abs(space.axes[0][d]) < 1e-12);
    }
}

TEST_CASE("geometry invariants: orthonormal axes, collinear MR1, recomputable variance") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<AdjacencyVector> raw;
    std::map<std::string, Satisfaction> membership;
    for (int i = 0; i < 12; ++i) {
        std::vector<double> w(10);
        for (auto& v : w) v = std::abs(gauss(rng));
        const std::string id = "u" + std::to_string(i);
        raw.push_back(vec(id, w));
        membership[id] = i % 2 ? Satisfaction::Satisfied : Satisfaction::Unsatisfied;
    }
    const auto groups = groups_of(membership);
    const auto nc = normalize_and_center(raw);
    const auto space = means_rotation(nc.centered, groups);

    // axes orthonormal within 1e-10
    for (std::size_t a = 0; a < space.axes.size(); ++a) {
        for (std::size_t b = a; b < space.axes.size(); ++b) {
            double dot = 0.0;
            for (std::size_t d = 0; d < space.axes[a].size(); ++d) {
                dot += space.axes[a][d] * space.axes[b][d];
            }
            CHECK(std::abs(dot - (a == b ? 1.0 : 0.0)) < 1e-10);
        }
    }

    // MR1 collinear with the group mean difference
    std::vector<double> diff(10, 0.0);
    std::size_t na = 0, nb = 0;
    for (std::size_t i = 0; i < nc.centered.size(); ++i) {
        const bool is_a = groups.membership.at(nc.centered[i].unit_id) ==
                          Satisfaction::Unsatisfied;
        (is_a ? na : nb) += 1;
    }
    for (std::size_t i = 0; i < nc.centered.size(); ++i) {
        const bool is_a = groups.membership.at(nc.centered[i].unit_id) ==
                          Satisfaction::Unsatisfied;
        const double denom = is_a ? static_cast<double>(na) : -static_cast<double>(nb);
        for (std::size_t d = 0; d < 10; ++d) {
            diff[d] += nc.centered[i].weights[d] / denom;
        }
    }
    double dot = 0.0, nd = 0.0;
    for (std::size_t d = 0; d < 10; ++d) {
        dot += diff[d] * space.axes[0][d];
        nd += diff[d] * diff[d];
    }
    CHECK(std::abs(std::abs(dot) / std::sqrt(nd) - 1.0) < 1e-9);

    // variance explained recomputes from the unit scores
    double total = 0.0;
    for (const auto& v : nc.centered) {
        for (double w : v.weights) total += w * w;
    }
    for (std::size_t a = 0; a < space.axes.size(); ++a) {
        double var = 0.0;
        for (std::size_t i = 0; i < space.unit_scores.size(); ++i) {
            var += space.unit_scores[i][a] * space.unit_scores[i][a];
        }
        CHECK(std::abs(space.variance_explained[a] - var / total) < 1e-10);
        CHECK(space.variance_explained[a] >= 0.0);
        CHECK(space.variance_explained[a] <= 1.0);
    }
    double sum = 0.0;
    for (double v : space.variance_explained) sum += v;
    CHECK(sum <= 1.0 + 1e-9);
}

TEST_CASE("identical group means raise IdenticalGroupMeans") {
    std::vector<AdjacencyVector> centered{vec("a", {1, 0}), vec("b", {-1, 0}),
                                          vec("c", {1, 0}), vec("d", {-1, 0})};
    std::map<std::string, Satisfaction> membership{{"a", Satisfaction::Unsatisfied},
                                                   {"b", Satisfaction::Unsatisfied},
                                                   {"c", Satisfaction::Satisfied},
                                                   {"d", Satisfaction::Satisfied}};
    CHECK_THROWS_AS(means_rotation(centered, groups_of(membership)), Error);
}

TEST_CASE("group comparison on a hand-checkable score split") {
    EnaSpace space;
    space.unit_ids = {"a", "b", "c", "d"};
    space.axes = {{1.0}, {1.0}};
    space.variance_explained = {0.5, 0.5};
    space.unit_scores = {{1.0, 1.0}, {2.0, 2.0}, {3.0, 3.0}, {4.0, 4.0}};
    std::map<std::string, Satisfaction> membership{{"a", Satisfaction::Unsatisfied},
                                                   {"b", Satisfaction::Unsatisfied},
                                                   {"c", Satisfaction::Satisfied},
                                                   {"d", Satisfaction::Satisfied}};
    const auto comparisons = compare_groups(space, groups_of(membership), 2, 0.05, 2);
    REQUIRE(comparisons.size() == 2);
    CHECK(comparisons[0].axis == "MR1");
    CHECK(comparisons[1].axis == "SVD2");
    CHECK(comparisons[0].u == doctest::Approx(0.0));
    CHECK(comparisons[0].p == doctest::Approx(1.0 / 3.0));
    CHECK(comparisons[0].r == doctest::Approx(1.0));  // 1 - 2*0/(2*2)
    CHECK(comparisons[0].median_a == doctest::Approx(1.5));
    CHECK(comparisons[0].median_b == doctest::Approx(3.5));
    CHECK(comparisons[0].alpha_adjusted == doctest::Approx(0.025));
    CHECK(!comparisons[0].significant);
}

TEST_CASE("subtracted network is the difference of group means on the sphere") {
    std::vector<AdjacencyVector> normalized{vec("a", {1.0, 0.0}), vec("b", {0.6, 0.8})};
    std::map<std::string, Satisfaction> membership{{"a", Satisfaction::Unsatisfied},
                                                   {"b", Satisfaction::Satisfied}};
    const auto edges = subtracted_network(normalized, groups_of(membership));
    CHECK(edges[0] == doctest::Approx(0.4));
    CHECK(edges[1] == doctest::Approx(-0.8));

    // identical groups cancel exactly
    std::vector<AdjacencyVector> same{vec("a", {0.6, 0.8}), vec("b", {0.6, 0.8})};
    const auto zero = subtracted_network(same, groups_of(membership));
    CHECK(zero[0] == doctest::Approx(0.0));
    CHECK(zero[1] == doctest::Approx(0.0));
}

TEST_CASE("scaling all raw weights by one constant changes nothing downstream") {
    std::mt19937_64 rng(29);
    std::vector<Unit> units;
    std::map<std::string, Satisfaction> membership;
    for (int i = 0; i < 8; ++i) {
        Unit u{"u" + std::to_string(i), {}};
        for (int l = 0; l < 12; ++l) u.lines.push_back(rng() % 16);
        units.push_back(std::move(u));
        membership["u" + std::to_string(i)] =
            i % 2 ? Satisfaction::Satisfied : Satisfaction::Unsatisfied;
    }
    const auto groups = groups_of(membership);
    const auto acc = accumulate(units, 4);
    auto scaled = acc.vectors;
    for (auto& v : scaled) {
        for (auto& w : v.weights) w *= 37.5;
    }
    const auto nc1 = normalize_and_center(acc.vectors);
    const auto nc2 = normalize_and_center(scaled);
    for (std::size_t i = 0; i < nc1.normalized.size(); ++i) {
        for (std::size_t d = 0; d < nc1.normalized[i].weights.size(); ++d) {
            CHECK(nc1.normalized[i].weights[d] ==
                  doctest::Approx(nc2.normalized[i].weights[d]).epsilon(1e-12));
        }
    }
    const auto s1 = means_rotation(nc1.centered, groups);
    const auto s2 = means_rotation(nc2.centered, groups);
    const auto c1 = compare_groups(s1, groups);
    const auto c2 = compare_groups(s2, groups);
    for (std::size_t i = 0; i < c1.size(); ++i) {
        CHECK(c1[i].p == doctest::Approx(c2[i].p).epsilon(1e-12));
        CHECK(c1[i].r == doctest::Approx(c2[i].r).epsilon(1e-12));
    }
}

TEST_CASE("units_from_records and units_from_assignments build ordered lines") {
    std::vector<IntervalRecord> records;
    IntervalRecord r;
    r.session_id = "S1";
    r.student_id = "a";
    r.values = {1, 0, 1};
    r.interval_index = 1;
    records.push_back(r);
    r.interval_index = 0;
    r.values = {0, 1, 0};
    records.push_back(r);
    const auto units = units_from_records(records);
    REQUIRE(units.size() == 1);
    CHECK(units[0].unit_id == "S1/a");
    REQUIRE(units[0].lines.size() == 2);
    CHECK(units[0].lines[0] == 0b010);  // interval 0 first
    CHECK(units[0].lines[1] == 0b101);

    std::vector<AssignedRecord> assigned{{"S1", "a", 0, 2}, {"S1", "a", 1, 0}};
    const auto multi = units_from_assignments(assigned, 3);
    CHECK(multi[0].lines[0] == 0b100);
    CHECK(multi[0].lines[1] == 0b001);
    CHECK(class_code_names(3) == std::vector<std::string>{"class.1", "class.2", "class.3"});
}
