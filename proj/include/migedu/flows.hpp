#pragma once

#include "migedu/accumulate.hpp"
#include "migedu/age_profile.hpp"
#include "migedu/intensity.hpp"
#include "migedu/record.hpp"
#include "migedu/schema.hpp"

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace migedu {

/// Weighted origin→destination counts of migrants at one scale. Cells are
/// sparse; stayers never enter.
struct FlowMatrix {
    Scale scale = Scale::Major;
    /// Empty for the unstratified matrix.
    std::string stratum;
    std::map<std::pair<RegionIndex, RegionIndex>, double> cells;
    double total = 0.0;
    /// Migrants whose origin or destination is unknown at this scale.
    double unplaced = 0.0;

    [[nodiscard]] double cell(RegionIndex origin, RegionIndex destination) const;
    /// Σ over destinations per origin, indexed by region.
    [[nodiscard]] std::vector<double> outflows(std::size_t region_count) const;
    [[nodiscard]] std::vector<double> inflows(std::size_t region_count) const;
};

struct FlowMatrices {
    FlowMatrix total;
    /// One matrix per known stratum, in category order.
    std::vector<FlowMatrix> strata;
    Dimension dimension = Dimension::None;
};

class FlowCounter {
  public:
    FlowCounter(Scale scale, Dimension dimension = Dimension::None, RecordFilter filter = {});

    void add(const PersonRecord &r);
    void merge(const FlowCounter &other);
    [[nodiscard]] FlowMatrices result() const;

  private:
    using Cells = std::map<std::pair<RegionIndex, RegionIndex>, CompensatedSum>;

    Scale scale_;
    Dimension dimension_;
    RecordFilter filter_;
    Cells total_;
    std::vector<Cells> strata_;
    CompensatedSum unplaced_;
    std::vector<CompensatedSum> strata_unplaced_;
};

FlowMatrices flow_matrix(std::span<const PersonRecord> records, Scale scale,
                         Dimension strat = Dimension::None, Parallelism par = {});

/// Five-year groups 15-19 … 40-44.
inline constexpr int kCompositionGroups = 6;
inline constexpr int kCompositionMinAge = 15;

struct CompositionRow {
    std::string age_group;
    /// Percent of known-education migrants at each level; all absent when the row is empty.
    std::array<std::optional<double>, 4> percent{};
    double known_weight = 0.0;
    double unknown_weight = 0.0;
    bool empty = true;
};

struct CompositionTable {
    Scale scale = Scale::Major;
    std::vector<CompositionRow> rows;
};

class CompositionCounter {
  public:
    explicit CompositionCounter(Scale scale);
    void add(const PersonRecord &r);
    void merge(const CompositionCounter &other);
    [[nodiscard]] CompositionTable result() const;

  private:
    Scale scale_;
    std::array<std::array<CompensatedSum, 5>, kCompositionGroups> weight_{};
};

CompositionTable composition_by_education_age(std::span<const PersonRecord> records, Scale scale,
                                              Parallelism par = {});

/// Migrant weight by settlement flow and education; feeds both the flow shares
/// and the secondary-or-higher share per flow.
class SettlementCounter {
  public:
    explicit SettlementCounter(Scale scale, RecordFilter filter = {});
    void add(const PersonRecord &r);
    void merge(const SettlementCounter &other);

    [[nodiscard]] Scale scale() const { return scale_; }
    [[nodiscard]] double weight(SettlementFlow flow, Education education) const {
        return weight_[index_of(flow)][index_of(education)].value();
    }

  private:
    Scale scale_;
    RecordFilter filter_;
    std::array<std::array<CompensatedSum, 5>, 5> weight_{};
};

struct SettlementShares {
    Scale scale = Scale::Major;
    /// RR, RU, UR, UU percentages over migrants with both statuses known.
    std::array<double, 4> percent{};
    std::array<double, 4> weight{};
    double unknown_weight = 0.0;
};

/// Throws InsufficientDataError when urban_prev is not bound or no migrant
/// has both statuses known.
SettlementShares settlement_shares(const SettlementCounter &counter, FieldSet fields);
SettlementShares settlement_shares(std::span<const PersonRecord> records, Scale scale, FieldSet fields,
                                   Parallelism par = {});

struct FlowEducationShare {
    SettlementFlow flow = SettlementFlow::RR;
    double percent = 0.0;
    double known_weight = 0.0;
    double unknown_weight = 0.0;
};

/// Rows only for flow types that have known-education migrants.
struct SecondaryShareTable {
    Scale scale = Scale::Major;
    std::vector<FlowEducationShare> rows;
};

SecondaryShareTable secondary_plus_share_by_flow(const SettlementCounter &counter, FieldSet fields);
SecondaryShareTable secondary_plus_share_by_flow(std::span<const PersonRecord> records, Scale scale,
                                                 FieldSet fields, Parallelism par = {});

inline constexpr int kReasonMinAge = 15;
inline constexpr int kReasonMaxAge = 24;

struct ReasonShares {
    /// Percent per known reason (Employment, Education, Family, Marriage, Other).
    std::array<double, 5> percent{};
    double known_weight = 0.0;
    double unknown_weight = 0.0;
};

struct ReasonShareTable {
    Scale scale = Scale::Major;
    ReasonShares all;
    /// Present when split by sex and that sex has known-reason migrants.
    std::optional<ReasonShares> men;
    std::optional<ReasonShares> women;
};

class ReasonCounter {
  public:
    explicit ReasonCounter(Scale scale, RecordFilter filter = RecordFilter::aged(kReasonMinAge, kReasonMaxAge));
    void add(const PersonRecord &r);
    void merge(const ReasonCounter &other);
    /// Throws InsufficientDataError when no migrant has a known reason.
    [[nodiscard]] ReasonShareTable result(bool by_sex) const;

  private:
    Scale scale_;
    RecordFilter filter_;
    std::array<std::array<CompensatedSum, 6>, 3> weight_{};
};

/// Shares of migrants aged 15-24 by main reason. Throws InsufficientDataError
/// when the reason field is not bound.
ReasonShareTable reason_shares(std::span<const PersonRecord> records, Scale scale, FieldSet fields,
                               bool by_sex, Parallelism par = {});

struct SexRatio {
    /// Absent when both shares are zero.
    std::optional<double> value;
    /// Men's share positive, women's share zero.
    bool infinite = false;
};

struct ReasonSexRatios {
    std::array<SexRatio, 5> ratio{};
    [[nodiscard]] const SexRatio &of(Reason reason) const { return ratio[index_of(reason)]; }
};

/// Men's share over women's share per reason. Throws InsufficientDataError
/// unless both sex tables are present.
ReasonSexRatios reason_sex_ratio(const ReasonShareTable &table);

/// ASMI restricted to migrants citing `reason`, smoothed then normalized.
/// Throws InsufficientDataError when the reason is unbound or nobody cites it.
AgeProfile reason_age_profile(std::span<const PersonRecord> records, Reason reason, Scale scale,
                              FieldSet fields, double bandwidth = kDefaultBandwidth, Parallelism par = {});
AgeProfile reason_age_profile(const AgeCounts &counts, double bandwidth = kDefaultBandwidth);

} // namespace migedu
