#include "migedu/intensity.hpp"

#include "migedu/classify.hpp"
#include "migedu/error.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace migedu {

std::string RecordFilter::describe() const {
    std::string out;
    if (max_age == std::numeric_limits<int>::max()) {
        out = min_age > 0 ? "age>=" + std::to_string(min_age) : "all ages";
    } else {
        out = "age " + std::to_string(min_age) + "-" + std::to_string(max_age);
    }
    if (sex) {
        out += "; sex=" + std::string(name_of(*sex));
    }
    if (education) {
        out += "; education=" + std::string(name_of(*education));
    }
    return out;
}

std::string_view dimension_name(Dimension d) {
    switch (d) {
    case Dimension::None:
        return "none";
    case Dimension::Education:
        return "education";
    case Dimension::Sex:
        return "sex";
    case Dimension::AgeGroup:
        return "age_group";
    }
    return "none";
}

std::optional<Dimension> parse_dimension(std::string_view text) {
    for (auto d : {Dimension::None, Dimension::Education, Dimension::Sex, Dimension::AgeGroup}) {
        if (dimension_name(d) == text) {
            return d;
        }
    }
    if (text == "age-group") {
        return Dimension::AgeGroup;
    }
    return std::nullopt;
}

const IndicatorRow *IndicatorTable::find(std::string_view key) const {
    for (const auto &row : rows) {
        if (row.key == key) {
            return &row;
        }
    }
    return nullptr;
}

int age_group_index(int age) { return std::clamp(age / 5, 0, kAgeGroupCount - 1); }

std::string age_group_label(int index) {
    if (index == kAgeGroupCount - 1) {
        return std::to_string(index * 5) + "+";
    }
    return std::to_string(index * 5) + "-" + std::to_string(index * 5 + 4);
}

std::size_t stratum_count(Dimension d) {
    switch (d) {
    case Dimension::None:
        return 0;
    case Dimension::Education:
        return kKnownEducation.size();
    case Dimension::Sex:
        return 2;
    case Dimension::AgeGroup:
        return kAgeGroupCount;
    }
    return 0;
}

std::string stratum_label(Dimension d, std::size_t i) {
    switch (d) {
    case Dimension::Education:
        return std::string(name_of(kKnownEducation[i]));
    case Dimension::Sex:
        return std::string(name_of(static_cast<Sex>(i)));
    case Dimension::AgeGroup:
        return age_group_label(static_cast<int>(i));
    case Dimension::None:
        break;
    }
    return {};
}

int stratum_index(Dimension d, const PersonRecord &r) {
    switch (d) {
    case Dimension::None:
        return -1;
    case Dimension::Education:
        return r.education == Education::Unknown ? -1 : static_cast<int>(r.education);
    case Dimension::Sex:
        return r.sex == Sex::Unknown ? -1 : static_cast<int>(r.sex);
    case Dimension::AgeGroup:
        return age_group_index(r.age);
    }
    return -1;
}

namespace {

std::optional<double> percent(double migrants, double par) {
    if (!(par > 0.0)) {
        return std::nullopt;
    }
    return 100.0 * migrants / par;
}

} // namespace

CmiCounter::CmiCounter(IntensityOptions options, RecordFilter filter, Dimension dimension)
    : options_(options), filter_(std::move(filter)), dimension_(dimension),
      stratum_migrants_(stratum_count(dimension)), stratum_par_(stratum_count(dimension)) {}

void CmiCounter::add(const PersonRecord &r) {
    if (!filter_.matches(r)) {
        return;
    }
    minor_seen_ = minor_seen_ || r.minor_now != kUnknownRegion;
    const auto migrant = migrant_at(r, options_.scale);
    if (!migrant && options_.par_mode == ParMode::ExcludeUnknownPrev) {
        return;
    }
    const bool moved = migrant.value_or(false);
    const int s = stratum_index(dimension_, r);
    par_ += r.weight;
    if (moved) {
        migrants_ += r.weight;
    }
    if (s >= 0) {
        stratum_par_[static_cast<std::size_t>(s)] += r.weight;
        if (moved) {
            stratum_migrants_[static_cast<std::size_t>(s)] += r.weight;
        }
    }
}

void CmiCounter::merge(const CmiCounter &other) {
    migrants_.merge(other.migrants_);
    par_.merge(other.par_);
    for (std::size_t i = 0; i < stratum_par_.size(); ++i) {
        stratum_migrants_[i].merge(other.stratum_migrants_[i]);
        stratum_par_[i].merge(other.stratum_par_[i]);
    }
    minor_seen_ = minor_seen_ || other.minor_seen_;
}

void CmiCounter::check_available() const {
    if (options_.scale == Scale::Minor && !minor_seen_) {
        throw InsufficientDataError("minor-scale residence is not available in this data");
    }
    if (!(par_.value() > 0.0)) {
        throw InsufficientDataError("empty population at risk for " + filter_.describe());
    }
}

IndicatorTable CmiCounter::table() const {
    check_available();
    IndicatorTable table;
    table.dimension = dimension_;
    table.scale = options_.scale;
    table.filter = filter_.describe();
    table.rows.push_back(IndicatorRow{"Total", migrants_.value(), par_.value(),
                                      percent(migrants_.value(), par_.value())});
    for (std::size_t i = 0; i < stratum_par_.size(); ++i) {
        const double m = stratum_migrants_[i].value();
        const double p = stratum_par_[i].value();
        table.rows.push_back(IndicatorRow{stratum_label(dimension_, i), m, p, percent(m, p)});
    }
    return table;
}

Intensity CmiCounter::total() const {
    check_available();
    return Intensity{migrants_.value(), par_.value(), *percent(migrants_.value(), par_.value()), options_.scale,
                     filter_.describe()};
}

Intensity cmi(std::span<const PersonRecord> records, IntensityOptions options, RecordFilter filter,
              Parallelism par) {
    return reduce_partitioned(records, par, [&] { return CmiCounter(options, filter); }).total();
}

IndicatorTable cmi_table(std::span<const PersonRecord> records, IntensityOptions options, RecordFilter filter,
                         Dimension dimension, Parallelism par) {
    return reduce_partitioned(records, par, [&] { return CmiCounter(options, filter, dimension); }).table();
}

IndicatorTable cmi_by_education(std::span<const PersonRecord> records, IntensityOptions options,
                                Parallelism par) {
    return cmi_table(records, options, RecordFilter::aged_15_plus(), Dimension::Education, par);
}

EducationRatios education_ratios(const IndicatorTable &table) {
    if (table.dimension != Dimension::Education) {
        throw std::invalid_argument("education_ratios: table is not stratified by education");
    }
    const auto *reference = table.find(name_of(Education::LtPrimary));
    if (!reference || !reference->value || !(*reference->value > 0.0)) {
        throw InsufficientDataError("education_ratios: zero reference CMI (less than primary)");
    }
    EducationRatios ratios;
    ratios.scale = table.scale;
    for (std::size_t i = 0; i < kKnownEducation.size(); ++i) {
        const auto *row = table.find(name_of(kKnownEducation[i]));
        if (row && row->value) {
            ratios.ratio[i] = i == 0 ? 1.0 : *row->value / *reference->value;
        }
    }
    return ratios;
}

AcmiEstimate acmi_estimate(std::span<const ScaleObservation> observed, double n_addresses) {
    if (observed.empty()) {
        throw std::invalid_argument("acmi_estimate: at least one observed scale required");
    }
    double max_n = 0.0;
    CompensatedSum cross, square;
    for (const auto &obs : observed) {
        if (!(obs.n_regions > 1.0)) {
            throw std::invalid_argument("acmi_estimate: region count must exceed 1");
        }
        if (!(obs.cmi > 0.0)) {
            throw std::invalid_argument("acmi_estimate: CMI must be positive");
        }
        const double log_n2 = std::log(obs.n_regions * obs.n_regions);
        cross += obs.cmi * log_n2;
        square += log_n2 * log_n2;
        max_n = std::max(max_n, obs.n_regions);
    }
    if (!(n_addresses >= max_n)) {
        throw std::invalid_argument("acmi_estimate: n_addresses below the finest observed scale");
    }
    AcmiEstimate estimate;
    estimate.courgeau_k = cross.value() / square.value();
    estimate.observed.assign(observed.begin(), observed.end());
    estimate.n_addresses = n_addresses;
    const double extrapolated = estimate.courgeau_k * std::log(n_addresses * n_addresses);
    estimate.capped = extrapolated > 100.0;
    estimate.acmi_value = std::min(100.0, extrapolated);
    return estimate;
}

namespace {
constexpr std::size_t kProfileAges = static_cast<std::size_t>(kProfileMaxAge - kProfileMinAge + 1);
}

AsmiCounter::AsmiCounter(IntensityOptions options, std::optional<Reason> reason, RecordFilter filter)
    : options_(options), reason_(reason), filter_(std::move(filter)), migrants_(kProfileAges),
      par_(kProfileAges) {}

void AsmiCounter::add(const PersonRecord &r) {
    if (r.age < kProfileMinAge || r.age > kProfileMaxAge || !filter_.matches(r)) {
        return;
    }
    const auto migrant = migrant_at(r, options_.scale);
    if (!migrant && options_.par_mode == ParMode::ExcludeUnknownPrev) {
        return;
    }
    const auto i = static_cast<std::size_t>(r.age - kProfileMinAge);
    par_[i] += r.weight;
    if (migrant.value_or(false) && (!reason_ || r.reason == *reason_)) {
        migrants_[i] += r.weight;
    }
}

void AsmiCounter::merge(const AsmiCounter &other) {
    for (std::size_t i = 0; i < kProfileAges; ++i) {
        migrants_[i].merge(other.migrants_[i]);
        par_[i].merge(other.par_[i]);
    }
}

AgeCounts AsmiCounter::counts() const {
    AgeCounts counts;
    counts.migrants.reserve(kProfileAges);
    counts.par.reserve(kProfileAges);
    for (std::size_t i = 0; i < kProfileAges; ++i) {
        counts.migrants.push_back(migrants_[i].value());
        counts.par.push_back(par_[i].value());
    }
    return counts;
}

AgeCounts asmi_counts(std::span<const PersonRecord> records, IntensityOptions options,
                      std::optional<Reason> reason, Parallelism par) {
    return reduce_partitioned(records, par, [&] { return AsmiCounter(options, reason); }).counts();
}

AgeProfile to_profile(const AgeCounts &counts) {
    AgeProfile profile;
    for (std::size_t i = 0; i < counts.par.size(); ++i) {
        const double age = counts.age_at(i);
        if (counts.par[i] > 0.0) {
            profile.ages.push_back(age);
            profile.values.push_back(counts.migrants[i] / counts.par[i]);
        } else {
            profile.missing_ages.push_back(age);
        }
    }
    if (profile.ages.empty()) {
        throw InsufficientDataError("age profile: no population at risk at ages 5-65");
    }
    return profile;
}

AgeProfile asmi(std::span<const PersonRecord> records, IntensityOptions options, Parallelism par) {
    return to_profile(asmi_counts(records, options, std::nullopt, par));
}

} // namespace migedu
