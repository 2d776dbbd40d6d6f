#pragma once

#include "migedu/accumulate.hpp"
#include "migedu/categories.hpp"
#include "migedu/record.hpp"

#include <array>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace migedu {

/// How records whose previous residence is unknown enter the population at risk.
enum class ParMode {
    /// Excluded: they can be neither migrant nor stayer.
    ExcludeUnknownPrev,
    /// Counted in the PAR as non-migrants.
    IncludeUnknownPrev,
};

struct IntensityOptions {
    Scale scale = Scale::Major;
    ParMode par_mode = ParMode::ExcludeUnknownPrev;
};

/// Predicate over age, sex, and education. Ages are inclusive.
struct RecordFilter {
    int min_age = 0;
    int max_age = std::numeric_limits<int>::max();
    std::optional<Sex> sex;
    std::optional<Education> education;

    /// Population 15 years and over, the base of every education-stratified output.
    static RecordFilter aged_15_plus() { return aged(15, std::numeric_limits<int>::max()); }
    static RecordFilter aged(int lo, int hi) {
        RecordFilter f;
        f.min_age = lo;
        f.max_age = hi;
        return f;
    }

    [[nodiscard]] bool matches(const PersonRecord &r) const {
        return r.age >= min_age && r.age <= max_age && (!sex || r.sex == *sex) &&
               (!education || r.education == *education);
    }
    [[nodiscard]] std::string describe() const;
};

/// Crude migration intensity: 100 · migrants / PAR.
struct Intensity {
    double migrants = 0.0;
    double par = 0.0;
    double value = 0.0;
    Scale scale = Scale::Major;
    std::string filter;
};

enum class Dimension { None, Education, Sex, AgeGroup };

std::string_view dimension_name(Dimension d);
std::optional<Dimension> parse_dimension(std::string_view text);

struct IndicatorRow {
    std::string key;
    double migrants = 0.0;
    double par = 0.0;
    /// Absent when the stratum has no population at risk.
    std::optional<double> value;
};

/// Rows keyed by one categorical dimension. The first row is always "Total";
/// strata follow in category order. Unknown categories are excluded from the
/// strata but included in the total.
struct IndicatorTable {
    Dimension dimension = Dimension::None;
    Scale scale = Scale::Major;
    std::string filter;
    std::vector<IndicatorRow> rows;

    [[nodiscard]] const IndicatorRow *find(std::string_view key) const;
};

/// Five-year age groups 0-4 … 60-64 and 65+.
inline constexpr int kAgeGroupCount = 14;
int age_group_index(int age);
std::string age_group_label(int index);

/// Number of known strata for a dimension (0 for None).
std::size_t stratum_count(Dimension d);
std::string stratum_label(Dimension d, std::size_t index);
/// Stratum of a record, or -1 for None and unknown categories.
int stratum_index(Dimension d, const PersonRecord &r);

/// Counting pass behind every CMI output; partition-parallel via merge().
class CmiCounter {
  public:
    CmiCounter(IntensityOptions options, RecordFilter filter, Dimension dimension = Dimension::None);

    void add(const PersonRecord &r);
    void merge(const CmiCounter &other);

    /// Throws InsufficientDataError when the total PAR is empty or the
    /// requested scale is not present in the data.
    [[nodiscard]] IndicatorTable table() const;
    [[nodiscard]] Intensity total() const;

  private:
    void check_available() const;

    IntensityOptions options_;
    RecordFilter filter_;
    Dimension dimension_;
    CompensatedSum migrants_;
    CompensatedSum par_;
    std::vector<CompensatedSum> stratum_migrants_;
    std::vector<CompensatedSum> stratum_par_;
    bool minor_seen_ = false;
};

Intensity cmi(std::span<const PersonRecord> records, IntensityOptions options, RecordFilter filter = {},
              Parallelism par = {});

IndicatorTable cmi_table(std::span<const PersonRecord> records, IntensityOptions options, RecordFilter filter,
                         Dimension dimension, Parallelism par = {});

/// CMI per education level for the population aged 15 and over.
IndicatorTable cmi_by_education(std::span<const PersonRecord> records, IntensityOptions options,
                                Parallelism par = {});

/// Each level's CMI over the less-than-primary CMI.
struct EducationRatios {
    Scale scale = Scale::Major;
    /// Indexed by Education (LtPrimary..Tertiary); absent when that stratum is absent.
    std::array<std::optional<double>, 4> ratio{};
};

/// Throws InsufficientDataError when the reference row is absent or zero.
EducationRatios education_ratios(const IndicatorTable &table);

struct ScaleObservation {
    double n_regions = 0.0;
    double cmi = 0.0;
};

/// Aggregate CMI extrapolated with CMI = k · ln(n²) (Courgeau's log-linear scale relation).
struct AcmiEstimate {
    double courgeau_k = 0.0;
    std::vector<ScaleObservation> observed;
    double n_addresses = 0.0;
    double acmi_value = 0.0;
    bool capped = false;
};

/// Least-squares k through the origin over the observed scales, then
/// min(100, k · ln(n_addresses²)). Throws std::invalid_argument on n ≤ 1,
/// non-positive CMI, or n_addresses below the finest observed scale.
AcmiEstimate acmi_estimate(std::span<const ScaleObservation> observed, double n_addresses);

/// Intensity values over single-year ages (raw) or a half-year grid (smoothed).
struct AgeProfile {
    std::vector<double> ages;
    std::vector<double> values;
    /// Ages dropped because their population at risk was zero.
    std::vector<double> missing_ages;
    bool normalized = false;
    bool smoothed = false;
};

inline constexpr int kProfileMinAge = 5;
inline constexpr int kProfileMaxAge = 65;

/// Per-age weighted migrants and PAR over kProfileMinAge..kProfileMaxAge.
struct AgeCounts {
    std::vector<double> migrants;
    std::vector<double> par;

    [[nodiscard]] int age_at(std::size_t i) const { return kProfileMinAge + static_cast<int>(i); }
};

class AsmiCounter {
  public:
    /// When `reason` is set, only migrants citing it enter the numerator; the
    /// PAR still covers everyone of that age.
    explicit AsmiCounter(IntensityOptions options, std::optional<Reason> reason = std::nullopt,
                         RecordFilter filter = {});

    void add(const PersonRecord &r);
    void merge(const AsmiCounter &other);
    [[nodiscard]] AgeCounts counts() const;

  private:
    IntensityOptions options_;
    std::optional<Reason> reason_;
    RecordFilter filter_;
    std::vector<CompensatedSum> migrants_;
    std::vector<CompensatedSum> par_;
};

AgeCounts asmi_counts(std::span<const PersonRecord> records, IntensityOptions options,
                      std::optional<Reason> reason = std::nullopt, Parallelism par = {});

/// Raw per-age intensities as proportions. Throws InsufficientDataError when
/// no age has a population at risk.
AgeProfile to_profile(const AgeCounts &counts);

AgeProfile asmi(std::span<const PersonRecord> records, IntensityOptions options, Parallelism par = {});

} // namespace migedu
