#include "helpers.hpp"

#include "migedu/error.hpp"
#include "migedu/fixtures.hpp"
#include "migedu/selectivity.hpp"

#include <doctest.h>

#include <cmath>

using namespace migedu;
using testing::person;

namespace {

double round2(double v) { return std::round(v * 100.0) / 100.0; }

PersonRecord timed(int duration, Urban up, Urban un, Education edu, double years = 8.0, double w = 1.0) {
    auto r = person(0, 2, 30, edu, w);
    r.urban_prev = up;
    r.urban_now = un;
    r.duration_years = duration;
    r.years_schooling = years;
    return r;
}

} // namespace

TEST_CASE("mys by status") {
    std::vector<PersonRecord> rs;
    for (const auto &[prev, now, urban] : {std::tuple{0, 2, Urban::Urban}, std::tuple{0, 2, Urban::Rural},
                                           std::tuple{0, 0, Urban::Urban}, std::tuple{1, 1, Urban::Rural}}) {
        auto r = person(prev, now, 40);
        r.urban_now = urban;
        r.years_schooling = 6.0;
        rs.push_back(r);
    }
    const auto flat = mys_by_status(rs, FieldSet::all());
    for (const auto &m : flat.mean) {
        CHECK(*m == 6.0);
    }
    CHECK(*flat.total_mean == 6.0);
    const auto equal = selectivity_ratios(flat);
    CHECK(equal.ratio_to_urban_stayers == 1.0);
    CHECK(equal.ratio_to_rural_stayers == 1.0);

    const auto cameroon = mys_by_status(status_corpus({7.93, 4.97, 6.61, 3.27}, 30), FieldSet::all());
    CHECK(*cameroon.of(MigrantStatus::UrbanInMigrant) == doctest::Approx(7.93).epsilon(1e-12));
    CHECK(*cameroon.of(MigrantStatus::RuralInMigrant) == doctest::Approx(4.97).epsilon(1e-12));
    CHECK(*cameroon.of(MigrantStatus::UrbanStayer) == doctest::Approx(6.61).epsilon(1e-12));
    CHECK(*cameroon.of(MigrantStatus::RuralStayer) == doctest::Approx(3.27).epsilon(1e-12));
    const auto r15 = selectivity_ratios(cameroon);
    CHECK(round2(r15.ratio_to_urban_stayers) == doctest::Approx(1.20));
    CHECK(round2(r15.ratio_to_rural_stayers) == doctest::Approx(2.43));

    const auto young = mys_by_status(status_corpus({9.97, 0, 9.35, 4.73}, 22), FieldSet::all(),
                                     RecordFilter::aged(20, 24));
    const auto r20 = selectivity_ratios(young);
    CHECK(round2(r20.ratio_to_urban_stayers) == doctest::Approx(1.07));
    CHECK(round2(r20.ratio_to_rural_stayers) == doctest::Approx(2.11));

    CHECK_THROWS_AS(mys_by_status(rs, FieldSet::all().without(Field::YearsSchooling)), InsufficientDataError);
    const auto none = mys_by_status(rs, FieldSet::all(), RecordFilter::aged(20, 24));
    CHECK_FALSE(none.mean[0].has_value());
    CHECK_THROWS_AS(selectivity_ratios(none), InsufficientDataError);
}

TEST_CASE("cross-country fit") {
    std::vector<CountryPoint> line;
    for (double x : {2.0, 4.0, 6.0, 8.0, 10.0}) {
        line.push_back({"c" + std::to_string(int(x)), x, -0.15 * x + 2.71});
    }
    line.push_back({"outlier", 3.0, 9.0});
    const auto f = cross_country_fit(line, {"outlier", "nowhere"});
    CHECK(f.linear.slope == doctest::Approx(-0.15));
    CHECK(f.linear.intercept == doctest::Approx(2.71));
    CHECK(f.linear.r_squared == doctest::Approx(1.0));
    CHECK(f.linear.n_points == 5);
    CHECK(f.power.n_points == 6);
    CHECK(f.excluded == std::vector<std::string>{"outlier"});
    CHECK(f.unmatched_exclusions == std::vector<std::string>{"nowhere"});

    std::vector<CountryPoint> flat{{"a", 1, 2}, {"b", 2, 2}, {"c", 5, 2}};
    CHECK(cross_country_fit(flat, {}).power.exponent == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_THROWS_AS(cross_country_fit(flat, {"a"}), std::invalid_argument);
}

TEST_CASE("attainment by duration") {
    CHECK(duration_range(5, std::nullopt) == 5);
    CHECK(duration_range(5, 4) == 4);
    CHECK(duration_range(10, 4) == 4);

    std::vector<PersonRecord> rs;
    for (int d = 0; d <= 5; ++d) {
        rs.push_back(timed(d, Urban::Rural, Urban::Urban, Education::Secondary, 10, 35));
        rs.push_back(timed(d, Urban::Rural, Urban::Urban, Education::Primary, 6, 65));
        rs.push_back(timed(d, Urban::Rural, Urban::Urban, Education::Unknown, 6, 100));
    }
    const auto s = attainment_by_duration(rs, FieldSet::all(), 5);
    REQUIRE(s.points.size() == 6);
    for (const auto &p : s.points) {
        CHECK(*p.percent == doctest::Approx(35.0));
        CHECK(p.known_weight == 100.0);
    }

    std::vector<PersonRecord> thai;
    for (int d = 0; d <= 4; ++d) {
        thai.push_back(timed(d, Urban::Urban, Urban::Urban, Education::Tertiary));
    }
    const auto t = attainment_by_duration(thai, FieldSet::all(), duration_range(5, 4), SettlementFlow::UU);
    CHECK(t.points.size() == 5);
    for (const auto &p : t.points) {
        CHECK(*p.percent == 100.0);
    }
    const auto empty = attainment_by_duration(thai, FieldSet::all(), 4, SettlementFlow::RR);
    CHECK_FALSE(empty.points[0].percent.has_value());

    CHECK_THROWS_AS(attainment_by_duration(rs, FieldSet::all().without(Field::DurationYears), 5),
                    InsufficientDataError);
    CHECK_THROWS_AS(attainment_by_duration(rs, FieldSet::all().without(Field::UrbanPrev), 5), InsufficientDataError);
}

TEST_CASE("mys by duration") {
    std::vector<PersonRecord> rs{timed(0, Urban::Rural, Urban::Urban, Education::Primary, 8.0),
                                 timed(0, Urban::Urban, Urban::Urban, Education::Primary, 8.0),
                                 timed(2, Urban::Rural, Urban::Rural, Education::Primary, 8.0),
                                 timed(2, Urban::Rural, Urban::Rural, Education::Primary, 4.0, 3.0)};
    const auto rows = mys_by_duration(rs, FieldSet::all(), 5);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].duration == 0);
    CHECK(rows[0].flow == SettlementFlow::RU);
    CHECK(rows[0].mean == 8.0);
    CHECK(rows[1].flow == SettlementFlow::UU);
    CHECK(rows[2].duration == 2);
    CHECK(rows[2].flow == SettlementFlow::RR);
    CHECK(rows[2].mean == doctest::Approx(5.0));
    CHECK(rows[2].weight == 4.0);
}
