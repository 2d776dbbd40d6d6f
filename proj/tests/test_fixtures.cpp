#include "migedu/fixtures.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>

using namespace migedu;

namespace {

const std::filesystem::path kDir = MIGEDU_FIXTURE_DIR;

} // namespace

TEST_CASE("fixtures: transcriptions load") {
    const auto a7 = load_mys_fixture(kDir / "mys_by_status_15plus.csv");
    const auto a8 = load_mys_fixture(kDir / "mys_by_status_20_24.csv");
    CHECK(a7.size() == 29);
    CHECK(a8.size() == 29);
    const auto cam = std::find_if(a7.begin(), a7.end(), [](const auto &r) { return r.country == "Cameroon"; });
    REQUIRE(cam != a7.end());
    CHECK(cam->mys == std::array<double, 4>{7.93, 4.97, 6.61, 3.27});
    CHECK(cam->total.has_value());
    CHECK_FALSE(a8.front().total.has_value());

    const auto ratios = load_ratio_fixture(kDir / "selectivity_ratios.csv");
    CHECK(ratios.size() == 29);
    const auto means = load_ratio_means(kDir / "selectivity_ratio_means.csv");
    CHECK(means == std::array<double, 4>{0.99, 1.75, 1.11, 2.11});

    const auto national = load_national_schooling(kDir / "national_schooling_25plus.csv");
    CHECK(national.size() == 57);
    CHECK(canonical_country("Columbia") == "Colombia");
    CHECK(canonical_country("Kenya") == "Kenya");

    CHECK(load_sex_shares(kDir / "education_share_by_sex_major.csv").size() == 10);
    CHECK(load_sex_shares(kDir / "education_share_by_sex_minor.csv").size() == 5);
    CHECK_THROWS(load_mys_fixture(kDir / "missing.csv"));
}

TEST_CASE("fixtures: every published ratio is reproduced") {
    const auto report = verify_fixtures(kDir);
    CHECK(report.ratio_checks.size() == 29 * 4);
    CHECK(report.mean_checks.size() == 4);
    CHECK(report.sex_ratio_checks.size() == 15);
    for (const auto *group : {&report.ratio_checks, &report.mean_checks, &report.sex_ratio_checks}) {
        for (const auto &c : *group) {
            INFO(c.name);
            CHECK(c.pass());
        }
    }
    CHECK(report.all_pass());
    REQUIRE(report.fits.size() == 4);
    for (const auto &f : report.fits) {
        CHECK(f.fit.power.exponent < 0.0);
    }
}

TEST_CASE("fixtures: cross-country fit variants") {
    // Frozen from an independent numpy OLS over the transcribed tables.
    const auto report = verify_fixtures(kDir);
    const auto &literal = report.fits[2];
    CHECK(literal.n_points == 23);
    CHECK(literal.fit.linear.slope == doctest::Approx(-0.146367).epsilon(1e-5));
    CHECK(literal.fit.linear.intercept == doctest::Approx(2.683421).epsilon(1e-5));
    CHECK(literal.fit.linear.slope >= -0.20);
    CHECK(literal.fit.linear.slope <= -0.10);

    const auto &three = report.fits[1];
    CHECK(three.n_points == 26);
    CHECK(three.fit.linear.slope == doctest::Approx(-0.148908).epsilon(1e-5));
    CHECK(three.fit.linear.intercept == doctest::Approx(2.706091).epsilon(1e-5));
    CHECK(three.fit.linear.r_squared == doctest::Approx(0.552334).epsilon(1e-5));
}

TEST_CASE("fixtures: corrupted transcription is detected") {
    const auto tmp = std::filesystem::temp_directory_path() / "migedu_bad_fixtures";
    std::filesystem::remove_all(tmp);
    std::filesystem::copy(kDir, tmp);
    {
        std::ofstream out(tmp / "selectivity_ratio_means.csv");
        out << "urban_stayers_20_24,rural_stayers_20_24,urban_stayers_15plus,rural_stayers_15plus\n"
               "0.5,1.75,1.11,2.11\n";
    }
    const auto report = verify_fixtures(tmp);
    CHECK_FALSE(report.all_pass());
    std::filesystem::remove_all(tmp);
}
