#include "fuse/catalog.hpp"
#include "fuse/errors.hpp"
#include "fuse/types.hpp"

#include <doctest.h>

using namespace fuse;

TEST_CASE("default catalog has the 17 codes in declaration order") {
    const auto& cat = default_catalog();
    CHECK(cat.size() == 17);
    CHECK(cat.count(Modality::Spatial) == 8);
    CHECK(cat.count(Modality::Verbal) == 7);
    CHECK(cat.count(Modality::Physiological) == 2);

    CHECK(cat.code_at(0) == "SP.collaborate.primary");
    CHECK(cat.code_at(7) == "SP.task.transition");
    CHECK(cat.code_at(8) == "VB.task.allocation");
    CHECK(cat.code_at(14) == "VB.agreement");
    CHECK(cat.index_of("PY.arousal") == 15);
    CHECK(cat.index_of("PY.synchrony") == 16);

    for (std::size_t i = 0; i < cat.size(); ++i) {
        CHECK(cat.entries()[i].index == i);
    }
}

TEST_CASE("unknown codes are rejected") {
    const auto& cat = default_catalog();
    CHECK(!cat.lookup("VB.greeting"));
    CHECK_THROWS_AS(cat.index_of("VB.greeting"), Error);
    try {
        cat.index_of("VB.greeting");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnknownCode);
    }
}

TEST_CASE("catalog round-trips through its code/modality listing") {
    const auto& cat = default_catalog();
    std::vector<std::pair<std::string, Modality>> listing;
    for (const auto& e : cat.entries()) listing.emplace_back(e.code, e.modality);
    const IndicatorCatalog rebuilt{listing};
    CHECK(rebuilt == cat);
    CHECK(rebuilt.code_names() == cat.code_names());
}

TEST_CASE("duplicate codes are rejected at construction") {
    CHECK_THROWS_AS(IndicatorCatalog({{"a", Modality::Spatial}, {"a", Modality::Verbal}}), Error);
}

TEST_CASE("interval record hamming weight counts present codes") {
    IntervalRecord rec;
    rec.values = {1, 0, 1, 1, 0};
    CHECK(rec.hamming_weight() == 3);
    rec.values.assign(17, 0);
    CHECK(rec.hamming_weight() == 0);
}

TEST_CASE("outcome grouping splits at the likert threshold") {
    RawSession s;
    s.session_id = "S1";
    s.surveys["a"] = {4, 3};
    s.surveys["b"] = {3, 7};
    const auto task = group_by_outcome({s}, OutcomeMeasure::TaskSatisfaction);
    CHECK(task.membership.at("S1/a") == Satisfaction::Satisfied);   // 4 >= 4
    CHECK(task.membership.at("S1/b") == Satisfaction::Unsatisfied); // 3 < 4
    const auto collab = group_by_outcome({s}, OutcomeMeasure::CollabSatisfaction);
    CHECK(collab.membership.at("S1/a") == Satisfaction::Unsatisfied);
    CHECK(collab.membership.at("S1/b") == Satisfaction::Satisfied);
    CHECK(collab.count(Satisfaction::Satisfied) == 1);
}
