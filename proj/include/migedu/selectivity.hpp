#pragma once

#include "migedu/accumulate.hpp"
#include "migedu/intensity.hpp"
#include "migedu/record.hpp"
#include "migedu/schema.hpp"
#include "migedu/stats.hpp"

#include <array>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace migedu {

/// Weighted mean years of schooling by migrant status.
struct MysTable {
    std::string filter;
    /// Indexed by MigrantStatus (UrbanInMigrant..RuralStayer); absent when the cell is empty.
    std::array<std::optional<double>, 4> mean{};
    std::array<double, 4> weight{};
    /// Over every record with known schooling, classifiable or not.
    std::optional<double> total_mean;
    double total_weight = 0.0;

    [[nodiscard]] std::optional<double> of(MigrantStatus status) const { return mean[index_of(status)]; }
};

class MysCounter {
  public:
    explicit MysCounter(RecordFilter filter = RecordFilter::aged_15_plus());
    void add(const PersonRecord &r);
    void merge(const MysCounter &other);
    [[nodiscard]] MysTable result() const;

  private:
    RecordFilter filter_;
    std::array<CompensatedSum, 5> years_{};
    std::array<CompensatedSum, 5> weight_{};
};

/// Throws InsufficientDataError when years of schooling are not bound.
MysTable mys_by_status(std::span<const PersonRecord> records, FieldSet fields,
                       RecordFilter filter = RecordFilter::aged_15_plus(), Parallelism par = {});

struct SelectivityRatios {
    double ratio_to_urban_stayers = 0.0;
    double ratio_to_rural_stayers = 0.0;
};

/// MYS of urban in-migrants over each stayer group. Throws
/// InsufficientDataError when a needed cell is absent or a stayer mean is zero.
SelectivityRatios selectivity_ratios(const MysTable &table);

struct CountryPoint {
    std::string country;
    /// National mean years of schooling.
    double x = 0.0;
    /// Selectivity ratio to rural stayers.
    double y = 0.0;
};

struct CrossCountryFit {
    /// Over every point.
    PowerFit power;
    /// Over the points not excluded.
    LinearFit linear;
    /// Requested exclusions that matched a point.
    std::vector<std::string> excluded;
    std::vector<std::string> unmatched_exclusions;
};

/// Throws std::invalid_argument with fewer than three points in either fit.
CrossCountryFit cross_country_fit(std::span<const CountryPoint> points, const std::set<std::string> &exclusions);

/// Per-(duration, settlement flow) weights for migrants with known duration.
class DurationCounter {
  public:
    DurationCounter(int max_duration, Scale scale = Scale::Major);
    void add(const PersonRecord &r);
    void merge(const DurationCounter &other);

    struct Cell {
        CompensatedSum known_education;
        CompensatedSum secondary_plus;
        CompensatedSum years;
        CompensatedSum years_weight;
    };

    [[nodiscard]] int max_duration() const { return max_duration_; }
    [[nodiscard]] const Cell &cell(int duration, SettlementFlow flow) const {
        return cells_[static_cast<std::size_t>(duration)][index_of(flow)];
    }
    /// Migrants whose duration exceeds the reporting range.
    [[nodiscard]] double out_of_range() const { return out_of_range_.value(); }

  private:
    int max_duration_;
    Scale scale_;
    std::vector<std::array<Cell, 4>> cells_;
    CompensatedSum out_of_range_;
};

struct DurationShare {
    int duration = 0;
    /// Absent when no known-education migrant has this duration.
    std::optional<double> percent;
    double known_weight = 0.0;
};

struct DurationSeries {
    SettlementFlow flow = SettlementFlow::RU;
    std::vector<DurationShare> points;
};

/// Reporting range 0..min(interval, top code).
int duration_range(int interval_years, std::optional<int> top_code);

/// Percent with at least secondary education among migrants of `flow`, per
/// duration of residence. Throws InsufficientDataError when duration or
/// urban_prev is unbound.
DurationSeries attainment_by_duration(const DurationCounter &counter, FieldSet fields,
                                      SettlementFlow flow = SettlementFlow::RU);
DurationSeries attainment_by_duration(std::span<const PersonRecord> records, FieldSet fields, int max_duration,
                                      SettlementFlow flow = SettlementFlow::RU, Parallelism par = {});

struct DurationMysRow {
    int duration = 0;
    SettlementFlow flow = SettlementFlow::RU;
    double mean = 0.0;
    double weight = 0.0;
};

/// Rows for non-empty (duration, flow) cells, flows in RU, UU, UR, RR order.
std::vector<DurationMysRow> mys_by_duration(const DurationCounter &counter, FieldSet fields);
std::vector<DurationMysRow> mys_by_duration(std::span<const PersonRecord> records, FieldSet fields,
                                            int max_duration, Parallelism par = {});

} // namespace migedu
