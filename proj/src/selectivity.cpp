#include "migedu/selectivity.hpp"

#include "migedu/classify.hpp"
#include "migedu/error.hpp"

#include <algorithm>
#include <stdexcept>

namespace migedu {

MysCounter::MysCounter(RecordFilter filter) : filter_(std::move(filter)) {}

void MysCounter::add(const PersonRecord &r) {
    if (!r.has_years_schooling() || !filter_.matches(r)) {
        return;
    }
    const auto s = index_of(classify_migrant_status(r));
    years_[s] += r.weight * r.years_schooling;
    weight_[s] += r.weight;
}

void MysCounter::merge(const MysCounter &other) {
    for (std::size_t i = 0; i < years_.size(); ++i) {
        years_[i].merge(other.years_[i]);
        weight_[i].merge(other.weight_[i]);
    }
}

MysTable MysCounter::result() const {
    MysTable table;
    table.filter = filter_.describe();
    CompensatedSum years, weight;
    for (std::size_t i = 0; i < years_.size(); ++i) {
        years.merge(years_[i]);
        weight.merge(weight_[i]);
        if (i < table.mean.size()) {
            table.weight[i] = weight_[i].value();
            if (table.weight[i] > 0.0) {
                table.mean[i] = years_[i].value() / table.weight[i];
            }
        }
    }
    table.total_weight = weight.value();
    if (table.total_weight > 0.0) {
        table.total_mean = years.value() / table.total_weight;
    }
    return table;
}

MysTable mys_by_status(std::span<const PersonRecord> records, FieldSet fields, RecordFilter filter,
                       Parallelism par) {
    if (!fields.has(Field::YearsSchooling)) {
        throw InsufficientDataError("years of schooling unavailable");
    }
    return reduce_partitioned(records, par, [&] { return MysCounter(filter); }).result();
}

SelectivityRatios selectivity_ratios(const MysTable &table) {
    const auto migrants = table.of(MigrantStatus::UrbanInMigrant);
    const auto urban = table.of(MigrantStatus::UrbanStayer);
    const auto rural = table.of(MigrantStatus::RuralStayer);
    if (!migrants) {
        throw InsufficientDataError("no urban in-migrants with known schooling");
    }
    if (!urban || !(*urban > 0.0) || !rural || !(*rural > 0.0)) {
        throw InsufficientDataError("stayer mean years of schooling absent or zero");
    }
    return SelectivityRatios{*migrants / *urban, *migrants / *rural};
}

CrossCountryFit cross_country_fit(std::span<const CountryPoint> points, const std::set<std::string> &exclusions) {
    if (points.size() < 3) {
        throw std::invalid_argument("cross_country_fit: at least three countries required");
    }
    CrossCountryFit fit;
    std::vector<Point> all;
    std::vector<Point> kept;
    std::set<std::string> matched;
    for (const auto &p : points) {
        all.push_back(Point{p.x, p.y});
        if (exclusions.contains(p.country)) {
            matched.insert(p.country);
        } else {
            kept.push_back(Point{p.x, p.y});
        }
    }
    if (kept.size() < 3) {
        throw std::invalid_argument("cross_country_fit: fewer than three countries left after exclusions");
    }
    fit.power = power_fit(all);
    fit.linear = ols(kept);
    for (const auto &name : exclusions) {
        (matched.contains(name) ? fit.excluded : fit.unmatched_exclusions).push_back(name);
    }
    return fit;
}

DurationCounter::DurationCounter(int max_duration, Scale scale)
    : max_duration_(max_duration), scale_(scale), cells_(static_cast<std::size_t>(std::max(0, max_duration) + 1)) {
    if (max_duration < 0) {
        throw std::invalid_argument("DurationCounter: negative duration range");
    }
}

void DurationCounter::add(const PersonRecord &r) {
    if (!r.has_duration() || !migrant_at(r, scale_).value_or(false)) {
        return;
    }
    const auto flow = classify_settlement_flow(r);
    if (flow == SettlementFlow::Unknown) {
        return;
    }
    if (r.duration_years > max_duration_) {
        out_of_range_ += r.weight;
        return;
    }
    auto &cell = cells_[static_cast<std::size_t>(r.duration_years)][index_of(flow)];
    if (r.education != Education::Unknown) {
        cell.known_education += r.weight;
        if (secondary_or_higher(r.education)) {
            cell.secondary_plus += r.weight;
        }
    }
    if (r.has_years_schooling()) {
        cell.years += r.weight * r.years_schooling;
        cell.years_weight += r.weight;
    }
}

void DurationCounter::merge(const DurationCounter &other) {
    if (other.max_duration_ != max_duration_) {
        throw std::invalid_argument("DurationCounter: merging different duration ranges");
    }
    for (std::size_t d = 0; d < cells_.size(); ++d) {
        for (std::size_t f = 0; f < cells_[d].size(); ++f) {
            auto &into = cells_[d][f];
            const auto &from = other.cells_[d][f];
            into.known_education.merge(from.known_education);
            into.secondary_plus.merge(from.secondary_plus);
            into.years.merge(from.years);
            into.years_weight.merge(from.years_weight);
        }
    }
    out_of_range_.merge(other.out_of_range_);
}

int duration_range(int interval_years, std::optional<int> top_code) {
    return top_code ? std::min(interval_years, *top_code) : interval_years;
}

namespace {

void require_duration_fields(FieldSet fields, bool schooling) {
    if (!fields.has(Field::DurationYears)) {
        throw InsufficientDataError("duration of residence unavailable");
    }
    if (!fields.has(Field::UrbanPrev) || !fields.has(Field::UrbanNow)) {
        throw InsufficientDataError("urban status of previous residence unavailable");
    }
    if (schooling && !fields.has(Field::YearsSchooling)) {
        throw InsufficientDataError("years of schooling unavailable");
    }
}

} // namespace

DurationSeries attainment_by_duration(const DurationCounter &counter, FieldSet fields, SettlementFlow flow) {
    require_duration_fields(fields, false);
    if (flow == SettlementFlow::Unknown) {
        throw std::invalid_argument("attainment_by_duration: flow type must be known");
    }
    DurationSeries series;
    series.flow = flow;
    for (int d = 0; d <= counter.max_duration(); ++d) {
        const auto &cell = counter.cell(d, flow);
        DurationShare point;
        point.duration = d;
        point.known_weight = cell.known_education.value();
        if (point.known_weight > 0.0) {
            point.percent = 100.0 * cell.secondary_plus.value() / point.known_weight;
        }
        series.points.push_back(point);
    }
    return series;
}

DurationSeries attainment_by_duration(std::span<const PersonRecord> records, FieldSet fields, int max_duration,
                                      SettlementFlow flow, Parallelism par) {
    require_duration_fields(fields, false);
    return attainment_by_duration(reduce_partitioned(records, par, [&] { return DurationCounter(max_duration); }),
                                  fields, flow);
}

std::vector<DurationMysRow> mys_by_duration(const DurationCounter &counter, FieldSet fields) {
    require_duration_fields(fields, true);
    constexpr std::array<SettlementFlow, 4> order{SettlementFlow::RU, SettlementFlow::UU, SettlementFlow::UR,
                                                  SettlementFlow::RR};
    std::vector<DurationMysRow> rows;
    for (int d = 0; d <= counter.max_duration(); ++d) {
        for (const auto flow : order) {
            const auto &cell = counter.cell(d, flow);
            const double w = cell.years_weight.value();
            if (w > 0.0) {
                rows.push_back(DurationMysRow{d, flow, cell.years.value() / w, w});
            }
        }
    }
    return rows;
}

std::vector<DurationMysRow> mys_by_duration(std::span<const PersonRecord> records, FieldSet fields,
                                            int max_duration, Parallelism par) {
    require_duration_fields(fields, true);
    return mys_by_duration(reduce_partitioned(records, par, [&] { return DurationCounter(max_duration); }), fields);
}

} // namespace migedu
