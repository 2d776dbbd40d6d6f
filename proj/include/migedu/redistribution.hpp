#pragma once

#include "migedu/accumulate.hpp"
#include "migedu/hierarchy.hpp"
#include "migedu/intensity.hpp"
#include "migedu/record.hpp"
#include "migedu/stats.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace migedu {

struct NmrRow {
    RegionIndex region = kUnknownRegion;
    std::string region_id;
    double inflow = 0.0;
    double outflow = 0.0;
    /// Population at risk of the analysed stratum.
    double par = 0.0;
    /// Population at risk over all ages and education levels.
    double total_par = 0.0;
    /// 100 · (inflow − outflow) / par; absent when par is zero.
    std::optional<double> nmr;
};

struct NmrTable {
    Scale scale = Scale::Major;
    /// "all" or the education level name.
    std::string stratum = "all";
    std::vector<NmrRow> rows;
    /// Migrants of the stratum whose origin or destination is unknown at this scale.
    double unplaced = 0.0;
};

class NmrCounter {
  public:
    /// With an education filter, flows and PAR are restricted to that level at
    /// ages 15 and over; total_par always covers everyone.
    NmrCounter(Scale scale, std::size_t region_count, std::optional<Education> education = std::nullopt,
               ParMode par_mode = ParMode::ExcludeUnknownPrev);

    void add(const PersonRecord &r);
    void merge(const NmrCounter &other);
    [[nodiscard]] NmrTable result(const RegionHierarchy &hierarchy) const;

  private:
    Scale scale_;
    std::optional<Education> education_;
    ParMode par_mode_;
    std::vector<CompensatedSum> inflow_;
    std::vector<CompensatedSum> outflow_;
    std::vector<CompensatedSum> par_;
    std::vector<CompensatedSum> total_par_;
    CompensatedSum unplaced_;
};

/// Throws InsufficientDataError when the hierarchy lacks the scale.
NmrTable nmr_by_region(std::span<const PersonRecord> records, Scale scale, const RegionHierarchy &hierarchy,
                       std::optional<Education> education = std::nullopt, Parallelism par = {});

enum class SlopeWeighting { StratumPar, TotalPar, Unweighted };

std::string_view weighting_name(SlopeWeighting w);
std::optional<SlopeWeighting> parse_weighting(std::string_view text);

struct DensityOptions {
    /// Natural log unless set; any base > 0, ≠ 1.
    std::optional<double> log_base;
    SlopeWeighting weighting = SlopeWeighting::StratumPar;
};

struct DensitySlope {
    LinearFit fit;
    std::string stratum;
    SlopeWeighting weighting = SlopeWeighting::StratumPar;
    std::optional<double> log_base;
    /// Regions left out for lacking a density or a PAR.
    std::size_t skipped = 0;
};

/// Weighted OLS of NMR on log density. Throws std::invalid_argument on
/// non-positive densities, identical densities, or fewer than two regions.
DensitySlope density_slope(const NmrTable &nmr, const RegionHierarchy &hierarchy, DensityOptions options = {});

} // namespace migedu
