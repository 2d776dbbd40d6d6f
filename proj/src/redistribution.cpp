#include "migedu/redistribution.hpp"

#include "migedu/classify.hpp"
#include "migedu/error.hpp"

#include <cmath>
#include <stdexcept>

namespace migedu {

NmrCounter::NmrCounter(Scale scale, std::size_t region_count, std::optional<Education> education, ParMode par_mode)
    : scale_(scale), education_(education), par_mode_(par_mode), inflow_(region_count), outflow_(region_count),
      par_(region_count), total_par_(region_count) {}

void NmrCounter::add(const PersonRecord &r) {
    const RegionIndex d = destination_at(r, scale_);
    const auto migrant = migrant_at(r, scale_);
    if (d == kUnknownRegion || (!migrant && par_mode_ == ParMode::ExcludeUnknownPrev)) {
        return;
    }
    const auto di = static_cast<std::size_t>(d);
    total_par_[di] += r.weight;
    if (education_ && (r.education != *education_ || r.age < 15)) {
        return;
    }
    par_[di] += r.weight;
    if (!migrant.value_or(false)) {
        return;
    }
    const RegionIndex o = origin_at(r, scale_);
    if (o == kUnknownRegion) {
        unplaced_ += r.weight;
        return;
    }
    inflow_[di] += r.weight;
    outflow_[static_cast<std::size_t>(o)] += r.weight;
}

void NmrCounter::merge(const NmrCounter &other) {
    for (std::size_t i = 0; i < par_.size(); ++i) {
        inflow_[i].merge(other.inflow_[i]);
        outflow_[i].merge(other.outflow_[i]);
        par_[i].merge(other.par_[i]);
        total_par_[i].merge(other.total_par_[i]);
    }
    unplaced_.merge(other.unplaced_);
}

NmrTable NmrCounter::result(const RegionHierarchy &hierarchy) const {
    if (hierarchy.count(scale_) != par_.size()) {
        throw std::invalid_argument("NmrCounter: hierarchy does not match the counted region set");
    }
    NmrTable table;
    table.scale = scale_;
    table.stratum = education_ ? std::string(name_of(*education_)) : "all";
    table.unplaced = unplaced_.value();
    for (std::size_t i = 0; i < par_.size(); ++i) {
        NmrRow row;
        row.region = static_cast<RegionIndex>(i);
        row.region_id = hierarchy.region(scale_, row.region).id;
        row.inflow = inflow_[i].value();
        row.outflow = outflow_[i].value();
        row.par = par_[i].value();
        row.total_par = total_par_[i].value();
        if (row.par > 0.0) {
            row.nmr = 100.0 * (row.inflow - row.outflow) / row.par;
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

NmrTable nmr_by_region(std::span<const PersonRecord> records, Scale scale, const RegionHierarchy &hierarchy,
                       std::optional<Education> education, Parallelism par) {
    if (!hierarchy.has_scale(scale)) {
        throw InsufficientDataError(std::string(name_of(scale)) + " regions are not defined in the hierarchy");
    }
    const std::size_t n = hierarchy.count(scale);
    return reduce_partitioned(records, par, [&] { return NmrCounter(scale, n, education); }).result(hierarchy);
}

std::string_view weighting_name(SlopeWeighting w) {
    switch (w) {
    case SlopeWeighting::StratumPar:
        return "stratum-par";
    case SlopeWeighting::TotalPar:
        return "total-par";
    case SlopeWeighting::Unweighted:
        return "unweighted";
    }
    return "stratum-par";
}

std::optional<SlopeWeighting> parse_weighting(std::string_view text) {
    for (auto w : {SlopeWeighting::StratumPar, SlopeWeighting::TotalPar, SlopeWeighting::Unweighted}) {
        if (weighting_name(w) == text) {
            return w;
        }
    }
    return std::nullopt;
}

DensitySlope density_slope(const NmrTable &nmr, const RegionHierarchy &hierarchy, DensityOptions options) {
    double log_scale = 1.0;
    if (options.log_base) {
        const double b = *options.log_base;
        if (!(b > 0.0) || b == 1.0) {
            throw std::invalid_argument("density_slope: log base must be positive and not 1");
        }
        log_scale = 1.0 / std::log(b);
    }
    DensitySlope out;
    out.stratum = nmr.stratum;
    out.weighting = options.weighting;
    out.log_base = options.log_base;

    std::vector<Point> points;
    std::vector<double> weights;
    for (const auto &row : nmr.rows) {
        const auto &density = hierarchy.region(nmr.scale, row.region).density;
        if (!row.nmr || !density) {
            ++out.skipped;
            continue;
        }
        if (!(*density > 0.0)) {
            throw std::invalid_argument("density_slope: density of region " + row.region_id + " is not positive");
        }
        points.push_back(Point{std::log(*density) * log_scale, *row.nmr});
        switch (options.weighting) {
        case SlopeWeighting::StratumPar:
            weights.push_back(row.par);
            break;
        case SlopeWeighting::TotalPar:
            weights.push_back(row.total_par);
            break;
        case SlopeWeighting::Unweighted:
            weights.push_back(1.0);
            break;
        }
    }
    try {
        out.fit = weighted_ols(points, weights);
    } catch (const std::invalid_argument &e) {
        if (std::string_view(e.what()).find("no x variation") != std::string_view::npos) {
            throw std::invalid_argument("density_slope: all regions have identical densities");
        }
        throw;
    }
    return out;
}

} // namespace migedu
