#include "migedu/fixtures.hpp"

#include "migedu/error.hpp"
#include "migedu/flows.hpp"
#include "text.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>

namespace migedu {

std::string canonical_country(std::string_view name) {
    if (name == "Columbia") {
        return "Colombia";
    }
    return std::string(name);
}

namespace {

/// Rows of a small comma-separated file, header checked and dropped.
std::vector<std::vector<std::string_view>> read_table(const std::filesystem::path &path, std::size_t columns,
                                                      std::vector<std::string> &storage) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open fixture " + path.string());
    }
    std::string line;
    storage.clear();
    while (std::getline(in, line)) {
        if (!text::trim(line).empty()) {
            storage.push_back(line);
        }
    }
    if (storage.empty()) {
        throw ValidationError("fixture " + path.string() + " is empty");
    }
    std::vector<std::vector<std::string_view>> rows;
    for (std::size_t i = 1; i < storage.size(); ++i) {
        auto cells = text::split(storage[i], ',');
        if (cells.size() != columns) {
            throw ValidationError("fixture " + path.string() + " line " + std::to_string(i + 1) + ": expected " +
                                  std::to_string(columns) + " columns");
        }
        rows.push_back(std::move(cells));
    }
    return rows;
}

double number(std::string_view cell, const std::filesystem::path &path) {
    const auto v = text::parse_double(cell);
    if (!v) {
        throw ValidationError("fixture " + path.string() + ": '" + std::string(cell) + "' is not a number");
    }
    return *v;
}

} // namespace

std::vector<MysFixtureRow> load_mys_fixture(const std::filesystem::path &path) {
    std::vector<std::string> storage;
    std::ifstream probe(path);
    std::string header;
    std::getline(probe, header);
    const std::size_t columns = text::split(header, ',').size();
    if (columns != 6 && columns != 7) {
        throw ValidationError("fixture " + path.string() + ": expected 6 or 7 columns");
    }
    std::vector<MysFixtureRow> out;
    for (const auto &cells : read_table(path, columns, storage)) {
        MysFixtureRow row;
        row.region = std::string(cells[0]);
        row.country = canonical_country(cells[1]);
        for (std::size_t i = 0; i < 4; ++i) {
            row.mys[i] = number(cells[2 + i], path);
        }
        if (columns == 7) {
            row.total = number(cells[6], path);
        }
        out.push_back(std::move(row));
    }
    return out;
}

std::vector<RatioFixtureRow> load_ratio_fixture(const std::filesystem::path &path) {
    std::vector<std::string> storage;
    std::vector<RatioFixtureRow> out;
    for (const auto &cells : read_table(path, 6, storage)) {
        RatioFixtureRow row;
        row.region = std::string(cells[0]);
        row.country = canonical_country(cells[1]);
        for (std::size_t i = 0; i < 4; ++i) {
            row.ratio[i] = number(cells[2 + i], path);
        }
        out.push_back(std::move(row));
    }
    return out;
}

std::array<double, 4> load_ratio_means(const std::filesystem::path &path) {
    std::vector<std::string> storage;
    const auto rows = read_table(path, 4, storage);
    if (rows.size() != 1) {
        throw ValidationError("fixture " + path.string() + ": expected a single row");
    }
    std::array<double, 4> out{};
    for (std::size_t i = 0; i < 4; ++i) {
        out[i] = number(rows[0][i], path);
    }
    return out;
}

std::vector<NationalSchooling> load_national_schooling(const std::filesystem::path &path) {
    std::vector<std::string> storage;
    std::vector<NationalSchooling> out;
    for (const auto &cells : read_table(path, 3, storage)) {
        NationalSchooling row;
        row.region = std::string(cells[0]);
        row.country = canonical_country(cells[1]);
        if (!cells[2].empty()) {
            row.mean_years = number(cells[2], path);
        }
        out.push_back(std::move(row));
    }
    return out;
}

std::vector<SexShareRow> load_sex_shares(const std::filesystem::path &path) {
    std::vector<std::string> storage;
    std::vector<SexShareRow> out;
    for (const auto &cells : read_table(path, 4, storage)) {
        out.push_back(SexShareRow{canonical_country(cells[0]), number(cells[1], path), number(cells[2], path),
                                  number(cells[3], path)});
    }
    return out;
}

std::vector<PersonRecord> status_corpus(const std::array<double, 4> &mys, int age) {
    std::vector<PersonRecord> out;
    for (std::size_t s = 0; s < 4; ++s) {
        const auto status = kKnownStatuses[s];
        PersonRecord base;
        base.age = age;
        base.sex = s % 2 == 0 ? Sex::M : Sex::F;
        base.education = Education::Primary;
        const bool migrant = status == MigrantStatus::UrbanInMigrant || status == MigrantStatus::RuralInMigrant;
        const bool urban = status == MigrantStatus::UrbanInMigrant || status == MigrantStatus::UrbanStayer;
        base.major_prev = 0;
        base.major_now = migrant ? 1 : 0;
        base.urban_now = urban ? Urban::Urban : Urban::Rural;
        // Two records per cell, weights 3 and 1, whose weighted mean is the target.
        const double spread = 0.25 * mys[s];
        PersonRecord a = base;
        a.weight = 3.0;
        a.years_schooling = mys[s] + spread / 3.0;
        PersonRecord b = base;
        b.weight = 1.0;
        b.years_schooling = mys[s] - spread;
        out.push_back(a);
        out.push_back(b);
    }
    return out;
}

std::vector<PersonRecord> reason_corpus(double men_percent, double women_percent) {
    std::vector<PersonRecord> out;
    auto add = [&out](Sex sex, Reason reason, double weight, int age) {
        if (weight <= 0.0) {
            return;
        }
        PersonRecord r;
        r.weight = weight;
        r.age = age;
        r.sex = sex;
        r.major_prev = 0;
        r.major_now = 1;
        r.reason = reason;
        out.push_back(r);
    };
    for (const auto &[sex, share] : {std::pair{Sex::M, men_percent}, std::pair{Sex::F, women_percent}}) {
        add(sex, Reason::Education, share, 18);
        add(sex, Reason::Employment, 0.6 * (100.0 - share), 22);
        add(sex, Reason::Family, 0.4 * (100.0 - share), 20);
        // Outside the 15-24 window; must not affect the shares.
        add(sex, Reason::Education, 50.0, 40);
    }
    return out;
}

bool FixtureCheck::pass() const { return std::abs(actual - expected) <= tolerance; }

bool FixtureReport::all_pass() const {
    for (const auto *checks : {&ratio_checks, &mean_checks, &sex_ratio_checks}) {
        for (const auto &c : *checks) {
            if (!c.pass()) {
                return false;
            }
        }
    }
    return true;
}

std::vector<CountryFitSpec> default_fit_specs() {
    const std::vector<std::string> low_schooling{"Guinea", "Mali", "Senegal"};
    return {
        CountryFitSpec{"all countries", "microdata_total_15plus", {}, false},
        CountryFitSpec{"excluding Guinea, Mali, Senegal", "microdata_total_15plus", low_schooling, false},
        CountryFitSpec{"excluding Guinea, Mali, Senegal and countries without national 25+ schooling",
                       "microdata_total_15plus", low_schooling, true},
        CountryFitSpec{"national 25+ schooling, excluding Guinea, Mali, Senegal", "national_25plus", low_schooling,
                       true},
    };
}

namespace {

SelectivityRatios computed_ratios(const std::array<double, 4> &mys, bool aged_20_24) {
    const auto corpus = status_corpus(mys, aged_20_24 ? 22 : 30);
    const auto filter = aged_20_24 ? RecordFilter::aged(20, 24) : RecordFilter::aged_15_plus();
    return selectivity_ratios(mys_by_status(corpus, FieldSet::all(), filter));
}

} // namespace

CountryFitReport country_fit(const std::vector<MysFixtureRow> &mys15, const std::vector<NationalSchooling> &national,
                             const CountryFitSpec &spec) {
    std::map<std::string, std::optional<double>> national_by_country;
    for (const auto &n : national) {
        national_by_country[n.country] = n.mean_years;
    }
    CountryFitReport report;
    report.label = spec.label;
    report.x_source = spec.x_source;
    std::vector<CountryPoint> points;
    for (const auto &row : mys15) {
        const auto it = national_by_country.find(row.country);
        const std::optional<double> nat = it == national_by_country.end() ? std::nullopt : it->second;
        std::optional<double> x;
        if (spec.x_source == "national_25plus") {
            x = nat;
        } else if (spec.x_source == "microdata_total_15plus") {
            x = row.total;
        } else {
            throw std::invalid_argument("country_fit: unknown x source " + spec.x_source);
        }
        if (!x || (spec.require_national && !nat)) {
            report.missing_x.push_back(row.country);
            continue;
        }
        points.push_back(CountryPoint{row.country, *x, computed_ratios(row.mys, false).ratio_to_rural_stayers});
    }
    const std::set<std::string> exclusions(spec.exclusions.begin(), spec.exclusions.end());
    report.fit = cross_country_fit(points, exclusions);
    report.n_points = report.fit.linear.n_points;
    return report;
}

FixtureReport verify_fixtures(const std::filesystem::path &dir) {
    const auto mys15 = load_mys_fixture(dir / "mys_by_status_15plus.csv");
    const auto mys20 = load_mys_fixture(dir / "mys_by_status_20_24.csv");
    const auto published = load_ratio_fixture(dir / "selectivity_ratios.csv");
    const auto published_means = load_ratio_means(dir / "selectivity_ratio_means.csv");
    const auto national = load_national_schooling(dir / "national_schooling_25plus.csv");

    std::map<std::string, const MysFixtureRow *> by_country15, by_country20;
    for (const auto &r : mys15) {
        by_country15[r.country] = &r;
    }
    for (const auto &r : mys20) {
        by_country20[r.country] = &r;
    }

    FixtureReport report;
    std::array<CompensatedSum, 4> sums{};
    for (const auto &row : published) {
        const auto a = by_country20.find(row.country);
        const auto b = by_country15.find(row.country);
        if (a == by_country20.end() || b == by_country15.end()) {
            throw ValidationError("fixture: no schooling row for " + row.country);
        }
        const auto r20 = computed_ratios(a->second->mys, true);
        const auto r15 = computed_ratios(b->second->mys, false);
        const std::array<double, 4> actual{r20.ratio_to_urban_stayers, r20.ratio_to_rural_stayers,
                                           r15.ratio_to_urban_stayers, r15.ratio_to_rural_stayers};
        static constexpr std::array<std::string_view, 4> labels{"20-24 urban stayers", "20-24 rural stayers",
                                                                "15+ urban stayers", "15+ rural stayers"};
        for (std::size_t i = 0; i < 4; ++i) {
            report.ratio_checks.push_back(
                FixtureCheck{row.country + " " + std::string(labels[i]), row.ratio[i], actual[i], 0.05});
            sums[i] += actual[i];
        }
    }
    static constexpr std::array<std::string_view, 4> mean_labels{
        "mean 20-24 urban stayers", "mean 20-24 rural stayers", "mean 15+ urban stayers", "mean 15+ rural stayers"};
    for (std::size_t i = 0; i < 4; ++i) {
        report.mean_checks.push_back(FixtureCheck{std::string(mean_labels[i]), published_means[i],
                                                  sums[i].value() / static_cast<double>(published.size()), 0.02});
    }

    for (const auto &[file, scale] : {std::pair{"education_share_by_sex_major.csv", "major"},
                                      std::pair{"education_share_by_sex_minor.csv", "minor"}}) {
        for (const auto &row : load_sex_shares(dir / file)) {
            const auto corpus = reason_corpus(row.men_percent, row.women_percent);
            const auto table = reason_shares(corpus, Scale::Major, FieldSet::all(), true);
            const auto ratio = reason_sex_ratio(table).of(Reason::Education);
            report.sex_ratio_checks.push_back(FixtureCheck{row.country + " " + scale + " education share ratio",
                                                           row.published_ratio, ratio.value.value_or(NAN), 0.2});
        }
    }

    for (const auto &spec : default_fit_specs()) {
        report.fits.push_back(country_fit(mys15, national, spec));
    }
    return report;
}

} // namespace migedu
