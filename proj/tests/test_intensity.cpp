#include "helpers.hpp"

#include "migedu/error.hpp"
#include "migedu/intensity.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace migedu;
using testing::person;

namespace {

/// Weighted corpus whose CMI per education level equals `cmi` exactly.
std::vector<PersonRecord> planted_by_education(const std::array<double, 4> &cmi) {
    std::vector<PersonRecord> out;
    for (std::size_t e = 0; e < 4; ++e) {
        out.push_back(person(0, 2, 30, kKnownEducation[e], cmi[e]));
        out.push_back(person(0, 0, 30, kKnownEducation[e], 100.0 - cmi[e]));
    }
    return out;
}

} // namespace

TEST_CASE("cmi: boundaries") {
    std::vector<PersonRecord> stayers(1000, person(0, 0));
    const auto zero = cmi(stayers, {});
    CHECK(zero.value == 0.0);
    CHECK(zero.par == 1000.0);

    std::vector<PersonRecord> movers(10, person(0, 3));
    CHECK(cmi(movers, {}).value == 100.0);
    CHECK(cmi(movers, {Scale::Minor, ParMode::ExcludeUnknownPrev}).value == 100.0);

    CHECK_THROWS_AS(cmi(std::vector<PersonRecord>{}, {}), InsufficientDataError);
}

TEST_CASE("cmi: weights, scales and unknown previous residence") {
    std::vector<PersonRecord> rs{person(0, 0, 30, Education::Primary, 2.0), person(0, 1, 30, Education::Primary, 1.0),
                                 person(0, 2, 30, Education::Primary, 1.0), person(-1, 2, 30, Education::Primary, 4.0)};
    const auto major = cmi(rs, {Scale::Major, ParMode::ExcludeUnknownPrev});
    CHECK(major.migrants == 1.0);
    CHECK(major.par == 4.0);
    CHECK(major.value == doctest::Approx(25.0));
    const auto minor = cmi(rs, {Scale::Minor, ParMode::ExcludeUnknownPrev});
    CHECK(minor.value == doctest::Approx(50.0));
    CHECK(minor.value >= major.value);
    const auto incl = cmi(rs, {Scale::Major, ParMode::IncludeUnknownPrev});
    CHECK(incl.par == 8.0);
    CHECK(incl.value == doctest::Approx(12.5));

    CHECK_THROWS_AS(cmi(rs, {}, RecordFilter::aged(40, 50)), InsufficientDataError);
}

TEST_CASE("cmi: minor scale unavailable") {
    auto r = person(0, 2);
    r.minor_now = r.minor_prev = kUnknownRegion;
    const std::vector<PersonRecord> rs{r};
    CHECK(cmi(rs, {Scale::Major, ParMode::ExcludeUnknownPrev}).value == 100.0);
    CHECK_THROWS_AS(cmi(rs, {Scale::Minor, ParMode::ExcludeUnknownPrev}), InsufficientDataError);
}

TEST_CASE("cmi by education: planted levels and ratios") {
    const auto rs = planted_by_education({7.98, 21.04, 34.69, 41.33});
    const auto t = cmi_by_education(rs, {});
    REQUIRE(t.rows.size() == 5);
    CHECK(t.rows[0].key == "Total");
    CHECK(t.rows[1].key == "LtPrimary");
    CHECK(*t.rows[1].value == doctest::Approx(7.98).epsilon(1e-12));
    CHECK(*t.rows[2].value == doctest::Approx(21.04).epsilon(1e-12));
    CHECK(*t.rows[3].value == doctest::Approx(34.69).epsilon(1e-12));
    CHECK(*t.rows[4].value == doctest::Approx(41.33).epsilon(1e-12));

    const auto ratios = education_ratios(t);
    CHECK(*ratios.ratio[0] == 1.0);
    CHECK(std::round(*ratios.ratio[1] * 100) / 100 == doctest::Approx(2.64));
    CHECK(std::round(*ratios.ratio[2] * 100) / 100 == doctest::Approx(4.35));
    CHECK(std::round(*ratios.ratio[3] * 100) / 100 == doctest::Approx(5.18));

    const auto global = education_ratios(cmi_by_education(planted_by_education({10, 18, 28, 38}), {}));
    CHECK(*global.ratio[1] == doctest::Approx(1.8));
    CHECK(*global.ratio[2] == doctest::Approx(2.8));
    CHECK(*global.ratio[3] == doctest::Approx(3.8));
}

TEST_CASE("cmi by education: identical strata, empty stratum, under-15s") {
    const auto same = cmi_by_education(planted_by_education({20, 20, 20, 20}), {});
    for (const auto &row : same.rows) {
        CHECK(*row.value == doctest::Approx(*same.rows[0].value));
    }
    const auto equal = education_ratios(same);
    for (const auto &r : equal.ratio) {
        CHECK(*r == doctest::Approx(1.0));
    }

    auto rs = planted_by_education({5, 10, 15, 20});
    rs.erase(rs.begin() + 6, rs.end());
    rs.push_back(person(0, 2, 10, Education::LtPrimary, 1000.0));
    const auto t = cmi_by_education(rs, {});
    REQUIRE(t.rows.size() == 5);
    CHECK_FALSE(t.rows[4].value.has_value());
    CHECK(*t.rows[1].value == doctest::Approx(5.0));
    const auto ratios = education_ratios(t);
    CHECK_FALSE(ratios.ratio[3].has_value());

    CHECK_THROWS_AS(education_ratios(cmi_by_education(planted_by_education({0, 10, 15, 20}), {})),
                    InsufficientDataError);
}

TEST_CASE("cmi table: sex and age groups") {
    std::vector<PersonRecord> rs{person(0, 2, 17), person(0, 0, 17), person(0, 0, 70), person(0, 2, 70)};
    rs[0].sex = Sex::F;
    rs[1].sex = Sex::F;
    const auto by_sex = cmi_table(rs, {}, {}, Dimension::Sex);
    REQUIRE(by_sex.rows.size() == 3);
    CHECK(by_sex.find("F")->value == doctest::Approx(50.0));
    CHECK(by_sex.find("M")->value == doctest::Approx(50.0));

    const auto by_age = cmi_table(rs, {}, {}, Dimension::AgeGroup);
    CHECK(by_age.rows.size() == 1 + kAgeGroupCount);
    CHECK(by_age.find("15-19")->par == 2.0);
    CHECK(by_age.find("65+")->migrants == 1.0);
    CHECK_FALSE(by_age.find("0-4")->value.has_value());
    CHECK(age_group_index(4) == 0);
    CHECK(age_group_index(64) == 12);
    CHECK(age_group_index(99) == 13);
}

TEST_CASE("partitioned counting agrees with serial counting") {
    std::vector<PersonRecord> rs;
    for (int i = 0; i < 20000; ++i) {
        rs.push_back(person(i % 4, (i / 3) % 4, 5 + i % 60, kKnownEducation[i % 4], 0.5 + (i % 7) * 0.37));
    }
    const auto serial = cmi_by_education(rs, {}, Parallelism{1});
    const auto parallel = cmi_by_education(rs, {}, Parallelism{8});
    for (std::size_t i = 0; i < serial.rows.size(); ++i) {
        CHECK(std::abs(*serial.rows[i].value - *parallel.rows[i].value) <= 1e-9 * *serial.rows[i].value);
    }
}

TEST_CASE("acmi: closed forms and preconditions") {
    const std::vector<ScaleObservation> exact{{10, 4.605170185988092}, {100, 9.210340371976184}};
    const auto e = acmi_estimate(exact, 1e6);
    CHECK(e.courgeau_k == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(e.acmi_value == doctest::Approx(27.631021115928547).epsilon(1e-12));
    CHECK_FALSE(e.capped);

    const std::vector<ScaleObservation> one{{std::exp(1.0), 2.0}};
    const auto s = acmi_estimate(one, std::exp(2.0));
    CHECK(s.courgeau_k == doctest::Approx(1.0));
    CHECK(s.acmi_value == doctest::Approx(4.0));

    const auto capped = acmi_estimate(exact, 1e30);
    CHECK(capped.acmi_value == 100.0);
    CHECK(capped.capped);

    CHECK_THROWS_AS(acmi_estimate(std::vector<ScaleObservation>{}, 10), std::invalid_argument);
    CHECK_THROWS_AS(acmi_estimate(std::vector<ScaleObservation>{{1, 3}}, 10), std::invalid_argument);
    CHECK_THROWS_AS(acmi_estimate(std::vector<ScaleObservation>{{10, 0}}, 100), std::invalid_argument);
    CHECK_THROWS_AS(acmi_estimate(exact, 50), std::invalid_argument);
}

TEST_CASE("asmi: flat, single age and reason restriction") {
    std::vector<PersonRecord> rs;
    for (int age = 5; age <= 65; ++age) {
        rs.push_back(person(0, 2, age, Education::Primary, 1.0));
        rs.push_back(person(0, 0, age, Education::Primary, 3.0));
    }
    const auto flat = asmi(rs, {});
    CHECK(flat.ages.size() == 61);
    for (double v : flat.values) {
        CHECK(v == doctest::Approx(0.25));
    }

    std::vector<PersonRecord> twenty;
    for (int age = 5; age <= 65; ++age) {
        twenty.push_back(person(0, age == 20 ? 2 : 0, age));
    }
    const auto single = asmi(twenty, {});
    for (std::size_t i = 0; i < single.ages.size(); ++i) {
        CHECK(single.values[i] == (single.ages[i] == 20.0 ? 1.0 : 0.0));
    }

    std::vector<PersonRecord> partial{person(0, 2, 30), person(0, 0, 31)};
    const auto gaps = asmi(partial, {});
    CHECK(gaps.ages.size() == 2);
    CHECK(gaps.missing_ages.size() == 59);

    rs[0].reason = Reason::Marriage;
    const auto counts = asmi_counts(rs, {}, Reason::Marriage);
    CHECK(counts.migrants[0] == 1.0);
    CHECK(counts.migrants[1] == 0.0);
    CHECK(counts.par[1] == 4.0);
}
