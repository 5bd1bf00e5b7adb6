#include "fuse/errors.hpp"
#include "fuse/sync.hpp"

#include "support/fixtures.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <filesystem>
#include <random>

using namespace fuse;

namespace {

// Hand-built indicator series for one student over a span, no ingest.
struct SeriesBuilder {
    Second span_start = 0;
    Second span_end = 120;
    SpatialStateSeries spatial;
    VerbalPresence verbal;
    PhysioFlags physio;

    explicit SeriesBuilder(Second start = 0, Second end = 120, int interval_len = 60) {
        spatial.span_start = verbal.span_start = physio.span_start = start;
        spatial.span_end = verbal.span_end = physio.span_end = end;
        span_start = start;
        span_end = end;
        verbal.interval_len = interval_len;
        verbal.interval_count = static_cast<std::size_t>((end - start) / interval_len);
    }

    void add_student(const std::string& sid) {
        const auto len = static_cast<std::size_t>(span_end - span_start);
        spatial.states[sid].assign(len, std::nullopt);
        verbal.presence[sid].assign(verbal.interval_count, {});
        physio.arousal[sid].assign(len, false);
        physio.synchrony[sid].assign(len, false);
        physio.mean_pairwise_r[sid].assign(len, std::nullopt);
    }
};

}  // namespace

TEST_CASE("an SP run of exactly sp_min_run inside the interval sets the bit") {
    SeriesBuilder b;
    b.add_student("s1");
    for (std::size_t t = 0; t < 10; ++t) b.spatial.states["s1"][t] = SpState::CollaboratePrimary;

    const auto records = interleave("S", b.spatial, b.verbal, b.physio, {});
    REQUIRE(records.size() == 2);
    CHECK(records[0].values[0] == 1);  // SP.collaborate.primary is column 0
    CHECK(records[1].values[0] == 0);
    CHECK(records[0].hamming_weight() == 1);
}

TEST_CASE("scattered presence without a long run does not set the bit") {
    SeriesBuilder b;
    b.add_student("s1");
    // 20 s of state in runs of at most 9
    std::vector<bool> condition(60, false);
    std::size_t t = 0;
    for (int block = 0; block < 3; ++block) {
        for (int i = 0; i < 7 && t < 60; ++i, ++t) {
            b.spatial.states["s1"][t] = SpState::IndividualPrimary;
            condition[t] = true;
        }
        t += 3;  // gap
    }
    CHECK(oracle::max_run(condition) < 10);
    const auto records = interleave("S", b.spatial, b.verbal, b.physio, {});
    CHECK(records[0].values[1] == 0);
}

TEST_CASE("a run straddling the interval boundary needs sp_min_run on each side") {
    SeriesBuilder b;
    b.add_student("s1");
    // 14-second run: seconds 53..66 -> 7 s in interval 0, 7 s in interval 1
    for (std::size_t t = 53; t < 67; ++t) b.spatial.states["s1"][t] = SpState::TaskTransition;
    const auto records = interleave("S", b.spatial, b.verbal, b.physio, {});
    CHECK(records[0].values[7] == 0);
    CHECK(records[1].values[7] == 0);

    // 17-second run: seconds 50..66 -> 10 s in interval 0, 7 s in interval 1
    SeriesBuilder c;
    c.add_student("s1");
    for (std::size_t t = 50; t < 67; ++t) c.spatial.states["s1"][t] = SpState::TaskTransition;
    const auto records2 = interleave("S", c.spatial, c.verbal, c.physio, {});
    CHECK(records2[0].values[7] == 1);
    CHECK(records2[1].values[7] == 0);
}

TEST_CASE("PY bits need strictly more than half the interval") {
    SeriesBuilder b;
    b.add_student("s1");
    const auto arousal_col = default_catalog().index_of("PY.arousal");

    SUBCASE("exactly 30 of 60 is not enough") {
        for (std::size_t t = 0; t < 30; ++t) b.physio.arousal["s1"][t] = true;
        const auto records = interleave("S", b.spatial, b.verbal, b.physio, {});
        CHECK(records[0].values[arousal_col] == 0);
    }
    SUBCASE("31 of 60 is enough, even non-consecutive") {
        for (std::size_t t = 0; t < 60; t += 2) b.physio.arousal["s1"][t] = true;  // 30 seconds
        b.physio.arousal["s1"][1] = true;                                          // 31st
        const auto records = interleave("S", b.spatial, b.verbal, b.physio, {});
        CHECK(records[0].values[arousal_col] == 1);
    }
    SUBCASE("undefined seconds do not count as flagged") {
        for (std::size_t t = 0; t < 31; ++t) b.physio.arousal["s1"][t] = true;
        for (std::size_t t = 31; t < 60; ++t) b.physio.arousal["s1"][t] = std::nullopt;
        const auto records = interleave("S", b.spatial, b.verbal, b.physio, {});
        CHECK(records[0].values[arousal_col] == 1);  // 31 true seconds
    }
}

TEST_CASE("verbal bits come straight from interval presence") {
    SeriesBuilder b;
    b.add_student("s1");
    const auto& cat = default_catalog();
    b.verbal.presence["s1"][1].insert(cat.index_of("VB.agreement"));
    const auto records = interleave("S", b.spatial, b.verbal, b.physio, {});
    CHECK(records[0].values[cat.index_of("VB.agreement")] == 0);
    CHECK(records[1].values[cat.index_of("VB.agreement")] == 1);
}

TEST_CASE("trailing partial intervals are dropped") {
    SeriesBuilder b(0, 150);  // 2.5 intervals
    b.add_student("s1");
    const auto records = interleave("S", b.spatial, b.verbal, b.physio, {});
    CHECK(records.size() == 2);
}

TEST_CASE("with interval_len = span each student yields exactly one record") {
    SeriesBuilder b(0, 120, 120);
    b.add_student("s1");
    b.add_student("s2");
    SyncConfig cfg;
    cfg.interval_len = 120;
    cfg.py_min_seconds = 60;
    const auto records = interleave("S", b.spatial, b.verbal, b.physio, cfg);
    CHECK(records.size() == 2);
    CHECK(records[0].student_id == "s1");
    CHECK(records[1].student_id == "s2");
}

TEST_CASE("every record is 17 wide with 0/1 cells and contiguous indices") {
    SeriesBuilder b;
    b.add_student("s2");
    b.add_student("s1");
    for (std::size_t t = 20; t < 40; ++t) b.spatial.states["s1"][t] = SpState::IndividualPrimary;
    const auto records = interleave("S", b.spatial, b.verbal, b.physio, {});
    REQUIRE(records.size() == 4);
    // map ordering: s1 before s2 regardless of insertion order
    CHECK(records[0].student_id == "s1");
    CHECK(records[0].interval_index == 0);
    CHECK(records[1].interval_index == 1);
    for (const auto& rec : records) {
        CHECK(rec.values.size() == 17);
        for (auto v : rec.values) CHECK((v == 0 || v == 1));
    }
}

TEST_CASE("span mismatches are rejected") {
    SeriesBuilder b;
    b.add_student("s1");
    b.physio.span_end = 180;
    CHECK_THROWS_AS(interleave("S", b.spatial, b.verbal, b.physio, {}), Error);
}

TEST_CASE("config invariants are enforced") {
    SyncConfig bad;
    bad.sp_min_run = 0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = {};
    bad.sp_min_run = 61;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = {};
    bad.py_min_seconds = 60;
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("intervals.csv round-trips records exactly") {
    SeriesBuilder b;
    b.add_student("s1");
    b.add_student("s2");
    std::mt19937_64 rng(19);
    for (auto& [sid, states] : b.spatial.states) {
        for (std::size_t t = 0; t < states.size(); ++t) {
            if (rng() % 3 == 0) states[t] = static_cast<SpState>(rng() % 8);
        }
    }
    for (std::size_t t = 0; t < 120; ++t) {
        b.physio.arousal["s1"][t] = rng() % 2 == 0;
        b.physio.synchrony["s2"][t] = rng() % 2 == 0;
    }
    const auto records = interleave("S", b.spatial, b.verbal, b.physio, {});

    const auto dir = fixtures::fresh_dir("sync_roundtrip");
    const auto path = dir / "intervals.csv";
    write_intervals_csv(path, records);
    const auto loaded = read_intervals_csv(path);
    REQUIRE(loaded.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(loaded[i].session_id == records[i].session_id);
        CHECK(loaded[i].student_id == records[i].student_id);
        CHECK(loaded[i].interval_index == records[i].interval_index);
        CHECK(loaded[i].values == records[i].values);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("brute-force law: SP bit == (max within-interval run >= 10)") {
    std::mt19937_64 rng(101);
    for (int rep = 0; rep < 200; ++rep) {
        SeriesBuilder b(0, 60);
        b.add_student("s1");
        std::vector<bool> condition(60, false);
        for (std::size_t t = 0; t < 60; ++t) {
            if (rng() % 2 == 0) {
                b.spatial.states["s1"][t] = SpState::CollaborateSecondary;
                condition[t] = true;
            }
        }
        const auto records = interleave("S", b.spatial, b.verbal, b.physio, {});
        const bool expected = oracle::max_run(condition) >= 10;
        CHECK(records[0].values[2] == (expected ? 1 : 0));
    }
}
