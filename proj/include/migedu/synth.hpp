#pragma once

#include "migedu/accumulate.hpp"
#include "migedu/hierarchy.hpp"
#include "migedu/record.hpp"
#include "migedu/schema.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace migedu {

struct SynthRegion {
    std::string minor_id;
    std::string major_id;
    double area_km2 = 1.0;
    double population_share = 0.0;
    double urban_probability = 0.5;
    /// Relative pull as a destination.
    double attractiveness = 1.0;
};

/// Probabilities over the four known education levels for ages [min_age, max_age].
struct EducationBand {
    int min_age = 0;
    int max_age = 200;
    std::array<double, 4> probs{0.25, 0.25, 0.25, 0.25};
};

/// Probabilities over the five known reasons for movers aged [min_age, max_age].
struct ReasonBand {
    int min_age = 0;
    int max_age = 200;
    std::array<double, 5> probs{0.2, 0.2, 0.2, 0.2, 0.2};
};

/// Age shape of the move probability: a floor plus childhood, labour-force
/// and retirement components. Explicit per-age values override the mixture.
struct AgeSchedule {
    double floor = 1.0;
    double child_level = 0.0;
    double child_decay = 0.1;
    double labour_level = 0.0;
    double labour_peak = 24.0;
    double labour_sd = 5.0;
    double retirement_level = 0.0;
    double retirement_peak = 62.0;
    double retirement_sd = 3.0;
    /// Value per age from SynthConfig::min_age upward.
    std::vector<double> explicit_values;

    [[nodiscard]] double at(int age, int min_age) const;
};

struct SynthConfig {
    std::vector<SynthRegion> regions;
    int min_age = 5;
    int max_age = 65;
    /// Relative weight per single age from min_age; empty means uniform.
    std::vector<double> age_pyramid;
    double male_share = 0.5;
    std::vector<EducationBand> education{EducationBand{}};
    double unknown_education_probability = 0.0;
    AgeSchedule schedule;
    /// Indexed by Education including Unknown, relative to the base rates.
    std::array<double, 5> education_multiplier{1.0, 1.0, 1.0, 1.0, 1.0};
    double inter_major_rate = 0.05;
    double intra_major_rate = 0.05;
    /// Optional RR, RU, UR, UU mix for inter-major movers.
    std::optional<std::array<double, 4>> settlement_mix;
    std::vector<ReasonBand> reasons{ReasonBand{}};
    double unknown_reason_probability = 0.0;
    std::array<double, 4> schooling_mean{2.0, 6.0, 10.0, 15.0};
    std::array<double, 4> schooling_sd{1.0, 1.0, 1.5, 1.5};
    /// Probabilities over durations 0..interval_years; empty means uniform.
    std::vector<double> duration_probs;
    std::optional<int> duration_top_code;
    int interval_years = 5;
    double unknown_prev_probability = 0.0;
    /// Share of rows written with an invalid age.
    double corrupt_fraction = 0.0;
    double weight_min = 1.0;
    double weight_max = 1.0;
    std::uint64_t records = 10000;
    std::uint64_t seed = 1;
    /// Omit minor-region columns.
    bool major_only = false;
    /// Population used for region densities; defaults to the record count.
    std::optional<double> total_population;

    /// Throws ValidationError on malformed probability rows or ranges.
    void validate() const;
};

SynthConfig parse_synth_config(std::string_view json_text);
SynthConfig load_synth_config(const std::filesystem::path &path);

inline constexpr std::string_view kSynthAlgorithm = "mt19937_64/splitmix64-block4096/u53/box-muller";
inline constexpr std::uint64_t kSynthBlockSize = 4096;

/// Exact realized weighted counts, tallied while generating.
struct SynthLedger {
    struct Cell {
        double par = 0.0;
        double major_migrants = 0.0;
        double minor_migrants = 0.0;
    };
    struct RegionFlow {
        double inflow = 0.0;
        double outflow = 0.0;
        double par = 0.0;
    };

    std::string algorithm{kSynthAlgorithm};
    std::uint64_t seed = 0;
    std::uint64_t records = 0;
    std::uint64_t corrupt = 0;
    std::uint64_t unknown_prev = 0;
    /// Records with a known previous residence.
    Cell total;
    /// Aged 15 and over, by Education including Unknown.
    std::array<Cell, 5> by_education_15plus{};
    /// Per single age from min_age.
    std::vector<Cell> by_age;
    /// Major-scale migrants by reason including Unknown.
    std::array<double, 6> major_by_reason{};
    /// Major-scale migrants by settlement flow including Unknown.
    std::array<double, 5> major_by_flow{};
    std::vector<RegionFlow> major_regions;
    std::vector<RegionFlow> minor_regions;

    void merge(const SynthLedger &other);
    [[nodiscard]] std::string to_json() const;
};

RegionHierarchy synth_hierarchy(const SynthConfig &config);
Schema synth_schema(const SynthConfig &config);

struct SynthOutput {
    std::vector<PersonRecord> records;
    SynthLedger ledger;
    RegionHierarchy hierarchy;
};

/// In-memory generation; corrupt rows are counted in the ledger but not returned.
SynthOutput generate_records(const SynthConfig &config, Parallelism par = {});

/// Writes microdata.csv, hierarchy.csv, schema.json and ledger.json into `dir`.
/// Output bytes depend only on the config, never on the worker count.
SynthLedger generate_files(const SynthConfig &config, const std::filesystem::path &dir, Parallelism par = {});

} // namespace migedu
