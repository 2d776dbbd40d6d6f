#pragma once

#include "migedu/selectivity.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace migedu {

/// Maps known alternate spellings to one canonical country name.
std::string canonical_country(std::string_view name);

struct MysFixtureRow {
    std::string region;
    std::string country;
    /// UrbanInMigrant, RuralInMigrant, UrbanStayer, RuralStayer.
    std::array<double, 4> mys{};
    std::optional<double> total;
};

/// Published selectivity ratios: to urban and rural stayers at 20-24, then at 15+.
struct RatioFixtureRow {
    std::string region;
    std::string country;
    std::array<double, 4> ratio{};
};

struct NationalSchooling {
    std::string region;
    std::string country;
    std::optional<double> mean_years;
};

struct SexShareRow {
    std::string country;
    double men_percent = 0.0;
    double women_percent = 0.0;
    double published_ratio = 0.0;
};

std::vector<MysFixtureRow> load_mys_fixture(const std::filesystem::path &path);
std::vector<RatioFixtureRow> load_ratio_fixture(const std::filesystem::path &path);
std::array<double, 4> load_ratio_means(const std::filesystem::path &path);
std::vector<NationalSchooling> load_national_schooling(const std::filesystem::path &path);
std::vector<SexShareRow> load_sex_shares(const std::filesystem::path &path);

/// Micro-corpus whose four status cells have exactly the given weighted means.
std::vector<PersonRecord> status_corpus(const std::array<double, 4> &mys, int age);

/// Migrants aged 15-24 whose education shares by sex equal the given percents.
std::vector<PersonRecord> reason_corpus(double men_percent, double women_percent);

struct FixtureCheck {
    std::string name;
    double expected = 0.0;
    double actual = 0.0;
    double tolerance = 0.0;
    [[nodiscard]] bool pass() const;
};

struct CountryFitReport {
    std::string label;
    std::string x_source;
    CrossCountryFit fit;
    std::size_t n_points = 0;
    /// Countries dropped for lacking an x value.
    std::vector<std::string> missing_x;
};

struct FixtureReport {
    std::vector<FixtureCheck> ratio_checks;
    std::vector<FixtureCheck> mean_checks;
    std::vector<FixtureCheck> sex_ratio_checks;
    std::vector<CountryFitReport> fits;

    [[nodiscard]] bool all_pass() const;
};

struct CountryFitSpec {
    std::string label;
    /// "microdata_total_15plus" or "national_25plus".
    std::string x_source;
    std::vector<std::string> exclusions;
    /// Also drop countries without a national 25+ value.
    bool require_national = false;
};

/// The default fit variants reported by verify-fixtures.
std::vector<CountryFitSpec> default_fit_specs();

/// Recomputes every published selectivity ratio and sex ratio from the
/// transcribed inputs through the library's own estimators.
FixtureReport verify_fixtures(const std::filesystem::path &dir);

CountryFitReport country_fit(const std::vector<MysFixtureRow> &mys15, const std::vector<NationalSchooling> &national,
                             const CountryFitSpec &spec);

} // namespace migedu
