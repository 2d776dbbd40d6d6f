#include "migedu/flows.hpp"

#include "migedu/classify.hpp"
#include "migedu/error.hpp"

#include <limits>
#include <stdexcept>

namespace migedu {

double FlowMatrix::cell(RegionIndex origin, RegionIndex destination) const {
    const auto it = cells.find({origin, destination});
    return it == cells.end() ? 0.0 : it->second;
}

std::vector<double> FlowMatrix::outflows(std::size_t region_count) const {
    std::vector<CompensatedSum> sums(region_count);
    for (const auto &[key, w] : cells) {
        sums.at(static_cast<std::size_t>(key.first)) += w;
    }
    std::vector<double> out;
    for (const auto &s : sums) {
        out.push_back(s.value());
    }
    return out;
}

std::vector<double> FlowMatrix::inflows(std::size_t region_count) const {
    std::vector<CompensatedSum> sums(region_count);
    for (const auto &[key, w] : cells) {
        sums.at(static_cast<std::size_t>(key.second)) += w;
    }
    std::vector<double> out;
    for (const auto &s : sums) {
        out.push_back(s.value());
    }
    return out;
}

FlowCounter::FlowCounter(Scale scale, Dimension dimension, RecordFilter filter)
    : scale_(scale), dimension_(dimension), filter_(std::move(filter)), strata_(stratum_count(dimension)),
      strata_unplaced_(stratum_count(dimension)) {}

void FlowCounter::add(const PersonRecord &r) {
    if (!filter_.matches(r) || !migrant_at(r, scale_).value_or(false)) {
        return;
    }
    const RegionIndex o = origin_at(r, scale_);
    const RegionIndex d = destination_at(r, scale_);
    const int s = stratum_index(dimension_, r);
    if (o == kUnknownRegion || d == kUnknownRegion) {
        unplaced_ += r.weight;
        if (s >= 0) {
            strata_unplaced_[static_cast<std::size_t>(s)] += r.weight;
        }
        return;
    }
    total_[{o, d}] += r.weight;
    if (s >= 0) {
        strata_[static_cast<std::size_t>(s)][{o, d}] += r.weight;
    }
}

namespace {

template <typename Cells>
void merge_cells(Cells &into, const Cells &from) {
    for (const auto &[key, sum] : from) {
        into[key].merge(sum);
    }
}

template <typename Cells>
FlowMatrix to_matrix(const Cells &cells, Scale scale, std::string stratum, double unplaced) {
    FlowMatrix m;
    m.scale = scale;
    m.stratum = std::move(stratum);
    m.unplaced = unplaced;
    CompensatedSum total;
    for (const auto &[key, sum] : cells) {
        m.cells.emplace(key, sum.value());
        total += sum.value();
    }
    m.total = total.value();
    return m;
}

} // namespace

void FlowCounter::merge(const FlowCounter &other) {
    merge_cells(total_, other.total_);
    unplaced_.merge(other.unplaced_);
    for (std::size_t i = 0; i < strata_.size(); ++i) {
        merge_cells(strata_[i], other.strata_[i]);
        strata_unplaced_[i].merge(other.strata_unplaced_[i]);
    }
}

FlowMatrices FlowCounter::result() const {
    FlowMatrices out;
    out.dimension = dimension_;
    out.total = to_matrix(total_, scale_, "", unplaced_.value());
    for (std::size_t i = 0; i < strata_.size(); ++i) {
        out.strata.push_back(
            to_matrix(strata_[i], scale_, stratum_label(dimension_, i), strata_unplaced_[i].value()));
    }
    return out;
}

FlowMatrices flow_matrix(std::span<const PersonRecord> records, Scale scale, Dimension strat, Parallelism par) {
    return reduce_partitioned(records, par, [&] { return FlowCounter(scale, strat); }).result();
}

CompositionCounter::CompositionCounter(Scale scale) : scale_(scale) {}

void CompositionCounter::add(const PersonRecord &r) {
    if (r.age < kCompositionMinAge || r.age >= kCompositionMinAge + 5 * kCompositionGroups ||
        !migrant_at(r, scale_).value_or(false)) {
        return;
    }
    weight_[static_cast<std::size_t>((r.age - kCompositionMinAge) / 5)][index_of(r.education)] += r.weight;
}

void CompositionCounter::merge(const CompositionCounter &other) {
    for (std::size_t g = 0; g < weight_.size(); ++g) {
        for (std::size_t e = 0; e < weight_[g].size(); ++e) {
            weight_[g][e].merge(other.weight_[g][e]);
        }
    }
}

CompositionTable CompositionCounter::result() const {
    CompositionTable table;
    table.scale = scale_;
    for (std::size_t g = 0; g < weight_.size(); ++g) {
        CompositionRow row;
        row.age_group = age_group_label(kCompositionMinAge / 5 + static_cast<int>(g));
        CompensatedSum known;
        for (const auto e : kKnownEducation) {
            known += weight_[g][index_of(e)].value();
        }
        row.known_weight = known.value();
        row.unknown_weight = weight_[g][index_of(Education::Unknown)].value();
        row.empty = !(row.known_weight > 0.0);
        if (!row.empty) {
            for (std::size_t e = 0; e < kKnownEducation.size(); ++e) {
                row.percent[e] = 100.0 * weight_[g][e].value() / row.known_weight;
            }
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

CompositionTable composition_by_education_age(std::span<const PersonRecord> records, Scale scale,
                                              Parallelism par) {
    return reduce_partitioned(records, par, [&] { return CompositionCounter(scale); }).result();
}

SettlementCounter::SettlementCounter(Scale scale, RecordFilter filter) : scale_(scale), filter_(std::move(filter)) {}

void SettlementCounter::add(const PersonRecord &r) {
    if (!filter_.matches(r) || !migrant_at(r, scale_).value_or(false)) {
        return;
    }
    weight_[index_of(classify_settlement_flow(r))][index_of(r.education)] += r.weight;
}

void SettlementCounter::merge(const SettlementCounter &other) {
    for (std::size_t f = 0; f < weight_.size(); ++f) {
        for (std::size_t e = 0; e < weight_[f].size(); ++e) {
            weight_[f][e].merge(other.weight_[f][e]);
        }
    }
}

namespace {

void require_urban_prev(FieldSet fields) {
    if (!fields.has(Field::UrbanPrev) || !fields.has(Field::UrbanNow)) {
        throw InsufficientDataError("urban status of previous residence unavailable");
    }
}

double flow_weight(const SettlementCounter &counter, SettlementFlow flow) {
    CompensatedSum sum;
    for (std::size_t e = 0; e < category_count<Education>(); ++e) {
        sum += counter.weight(flow, static_cast<Education>(e));
    }
    return sum.value();
}

} // namespace

SettlementShares settlement_shares(const SettlementCounter &counter, FieldSet fields) {
    require_urban_prev(fields);
    SettlementShares shares;
    shares.scale = counter.scale();
    CompensatedSum known;
    for (std::size_t i = 0; i < kKnownFlows.size(); ++i) {
        shares.weight[i] = flow_weight(counter, kKnownFlows[i]);
        known += shares.weight[i];
    }
    shares.unknown_weight = flow_weight(counter, SettlementFlow::Unknown);
    if (!(known.value() > 0.0)) {
        throw InsufficientDataError("no migrants with known urban status at both ends of the interval");
    }
    for (std::size_t i = 0; i < kKnownFlows.size(); ++i) {
        shares.percent[i] = 100.0 * shares.weight[i] / known.value();
    }
    return shares;
}

SettlementShares settlement_shares(std::span<const PersonRecord> records, Scale scale, FieldSet fields,
                                   Parallelism par) {
    require_urban_prev(fields);
    return settlement_shares(reduce_partitioned(records, par, [&] { return SettlementCounter(scale); }), fields);
}

SecondaryShareTable secondary_plus_share_by_flow(const SettlementCounter &counter, FieldSet fields) {
    require_urban_prev(fields);
    SecondaryShareTable table;
    table.scale = counter.scale();
    for (const auto flow : kKnownFlows) {
        CompensatedSum known, secondary;
        for (const auto e : kKnownEducation) {
            known += counter.weight(flow, e);
            if (secondary_or_higher(e)) {
                secondary += counter.weight(flow, e);
            }
        }
        if (known.value() > 0.0) {
            table.rows.push_back(FlowEducationShare{flow, 100.0 * secondary.value() / known.value(), known.value(),
                                                    counter.weight(flow, Education::Unknown)});
        }
    }
    if (table.rows.empty()) {
        throw InsufficientDataError("no known-education migrants");
    }
    return table;
}

SecondaryShareTable secondary_plus_share_by_flow(std::span<const PersonRecord> records, Scale scale,
                                                 FieldSet fields, Parallelism par) {
    require_urban_prev(fields);
    return secondary_plus_share_by_flow(
        reduce_partitioned(records, par, [&] { return SettlementCounter(scale); }), fields);
}

ReasonCounter::ReasonCounter(Scale scale, RecordFilter filter) : scale_(scale), filter_(std::move(filter)) {}

void ReasonCounter::add(const PersonRecord &r) {
    if (!filter_.matches(r) || !migrant_at(r, scale_).value_or(false)) {
        return;
    }
    weight_[index_of(r.sex)][index_of(r.reason)] += r.weight;
}

void ReasonCounter::merge(const ReasonCounter &other) {
    for (std::size_t s = 0; s < weight_.size(); ++s) {
        for (std::size_t k = 0; k < weight_[s].size(); ++k) {
            weight_[s][k].merge(other.weight_[s][k]);
        }
    }
}

namespace {

template <typename Row>
std::optional<ReasonShares> shares_of(const Row &weights) {
    ReasonShares shares;
    CompensatedSum known;
    for (const auto reason : kKnownReasons) {
        known += weights[index_of(reason)];
    }
    shares.known_weight = known.value();
    shares.unknown_weight = weights[index_of(Reason::Unknown)];
    if (!(shares.known_weight > 0.0)) {
        return std::nullopt;
    }
    for (std::size_t k = 0; k < kKnownReasons.size(); ++k) {
        shares.percent[k] = 100.0 * weights[k] / shares.known_weight;
    }
    return shares;
}

} // namespace

ReasonShareTable ReasonCounter::result(bool by_sex) const {
    std::array<std::array<double, 6>, 3> w{};
    std::array<double, 6> all{};
    for (std::size_t k = 0; k < all.size(); ++k) {
        CompensatedSum sum;
        for (std::size_t s = 0; s < w.size(); ++s) {
            w[s][k] = weight_[s][k].value();
            sum += w[s][k];
        }
        all[k] = sum.value();
    }
    auto total = shares_of(all);
    if (!total) {
        throw InsufficientDataError("no migrants aged " + std::to_string(filter_.min_age) + "-" +
                                    std::to_string(filter_.max_age) + " with a known reason for moving");
    }
    ReasonShareTable table;
    table.scale = scale_;
    table.all = *total;
    if (by_sex) {
        table.men = shares_of(w[index_of(Sex::M)]);
        table.women = shares_of(w[index_of(Sex::F)]);
    }
    return table;
}

namespace {

void require_reason(FieldSet fields) {
    if (!fields.has(Field::Reason)) {
        throw InsufficientDataError("reason for moving unavailable");
    }
}

} // namespace

ReasonShareTable reason_shares(std::span<const PersonRecord> records, Scale scale, FieldSet fields, bool by_sex,
                               Parallelism par) {
    require_reason(fields);
    return reduce_partitioned(records, par, [&] { return ReasonCounter(scale); }).result(by_sex);
}

ReasonSexRatios reason_sex_ratio(const ReasonShareTable &table) {
    if (!table.men || !table.women) {
        throw InsufficientDataError("sex ratio needs known-reason migrants of both sexes");
    }
    ReasonSexRatios out;
    for (std::size_t k = 0; k < kKnownReasons.size(); ++k) {
        const double m = table.men->percent[k];
        const double f = table.women->percent[k];
        if (f > 0.0) {
            out.ratio[k].value = m / f;
        } else if (m > 0.0) {
            out.ratio[k].value = std::numeric_limits<double>::infinity();
            out.ratio[k].infinite = true;
        }
    }
    return out;
}

AgeProfile reason_age_profile(const AgeCounts &counts, double bandwidth) {
    CompensatedSum migrants;
    for (const double m : counts.migrants) {
        migrants += m;
    }
    if (!(migrants.value() > 0.0)) {
        throw InsufficientDataError("no migrants cite this reason");
    }
    return smooth_and_normalize(to_profile(counts), bandwidth);
}

AgeProfile reason_age_profile(std::span<const PersonRecord> records, Reason reason, Scale scale, FieldSet fields,
                              double bandwidth, Parallelism par) {
    require_reason(fields);
    IntensityOptions options;
    options.scale = scale;
    return reason_age_profile(asmi_counts(records, options, reason, par), bandwidth);
}

} // namespace migedu
