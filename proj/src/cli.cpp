#include "migedu/cli.hpp"

#include "migedu/age_profile.hpp"
#include "migedu/error.hpp"
#include "migedu/fixtures.hpp"
#include "migedu/flows.hpp"
#include "migedu/ingest.hpp"
#include "migedu/intensity.hpp"
#include "migedu/redistribution.hpp"
#include "migedu/selectivity.hpp"
#include "migedu/synth.hpp"
#include "migedu/table_io.hpp"
#include "text.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <ostream>

#ifndef MIGEDU_FIXTURE_DIR
#define MIGEDU_FIXTURE_DIR "data/fixtures"
#endif

namespace migedu {

namespace {

struct RunConfig {
    std::string subcommand;
    std::string schema_path;
    std::string data_path;
    std::string hierarchy_path;
    std::string scale = "major";
    std::string age_filter;
    std::string format = "csv";
    std::string output;
    unsigned threads = 0;
    bool include_unknown_in_par = false;
    bool unweighted = false;
    double bandwidth = kDefaultBandwidth;
    std::optional<double> log_base;
    std::string weighting = "stratum-par";
    std::optional<std::uint64_t> seed;

    // Subcommand-specific.
    std::string by = "none";
    bool ratios = false;
    std::vector<std::string> observed;
    double addresses = 0.0;
    std::string reason;
    bool raw = false;
    bool peak = false;
    bool composition = false;
    bool settlement = false;
    bool secondary_by_flow = false;
    bool by_sex = false;
    bool sex_ratio = false;
    bool mys = false;
    std::string flow = "RU";
    std::string education;
    bool slope = false;
    bool by_education = false;
    std::string config_path;
    std::optional<std::uint64_t> records;
    std::string fixtures = MIGEDU_FIXTURE_DIR;
    bool fits = false;
    bool strict = false;
};

class UsageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

Scale scale_of(const RunConfig &c) {
    const auto s = parse_category<Scale>(c.scale);
    if (!s) {
        throw UsageError("--scale must be 'major' or 'minor'");
    }
    return *s;
}

Format format_of(const RunConfig &c) {
    if (c.format == "csv") {
        return Format::Csv;
    }
    if (c.format == "json") {
        return Format::Json;
    }
    throw UsageError("--format must be 'csv' or 'json'");
}

Parallelism parallelism_of(const RunConfig &c) {
    return c.threads > 0 ? Parallelism{c.threads} : Parallelism::from_environment();
}

IntensityOptions intensity_of(const RunConfig &c) {
    IntensityOptions o;
    o.scale = scale_of(c);
    o.par_mode = c.include_unknown_in_par ? ParMode::IncludeUnknownPrev : ParMode::ExcludeUnknownPrev;
    return o;
}

/// "all", "15+", "20-24" or any "lo-hi" / "lo+".
RecordFilter age_filter_of(std::string_view text, RecordFilter fallback) {
    if (text.empty()) {
        return fallback;
    }
    if (text == "all") {
        return RecordFilter{};
    }
    if (text.ends_with('+')) {
        const auto lo = text::parse_int(text.substr(0, text.size() - 1));
        if (lo && *lo >= 0) {
            return RecordFilter::aged(static_cast<int>(*lo), std::numeric_limits<int>::max());
        }
    } else if (const auto dash = text.find('-'); dash != std::string_view::npos) {
        const auto lo = text::parse_int(text.substr(0, dash));
        const auto hi = text::parse_int(text.substr(dash + 1));
        if (lo && hi && *lo >= 0 && *hi >= *lo) {
            return RecordFilter::aged(static_cast<int>(*lo), static_cast<int>(*hi));
        }
    }
    throw UsageError("--age-filter must be 'all', 'N+' or 'N-M'");
}

template <typename E>
E category_of(std::string_view text, std::string_view option) {
    const auto v = parse_category<E>(text);
    if (!v) {
        throw UsageError(std::string(option) + ": unknown value '" + std::string(text) + "'");
    }
    return *v;
}

struct Inputs {
    Schema schema;
    RegionHierarchy hierarchy;
};

Inputs load_inputs(const RunConfig &c) {
    if (c.schema_path.empty() || c.data_path.empty() || c.hierarchy_path.empty()) {
        throw UsageError("--schema, --data and --hierarchy are required");
    }
    return Inputs{load_schema(c.schema_path), RegionHierarchy::load_csv(c.hierarchy_path)};
}

template <typename MakeAcc>
auto scan(const RunConfig &c, const Inputs &in, std::ostream &err, MakeAcc make) {
    IngestOptions options;
    options.unweighted = c.unweighted;
    auto result = scan_file(c.data_path, in.schema, in.hierarchy, options, parallelism_of(c), std::move(make));
    if (result.report.rejected > 0) {
        err << "migedu: rejected " << result.report.rejected << " of " << result.report.rows_read
            << " rows (see ingest-check)\n";
    }
    return result;
}

/// Several accumulators of one type fed from a single pass.
template <typename Acc>
struct CounterSet {
    std::vector<Acc> items;
    void add(const PersonRecord &r) {
        for (auto &a : items) {
            a.add(r);
        }
    }
    void merge(const CounterSet &other) {
        for (std::size_t i = 0; i < items.size(); ++i) {
            items[i].merge(other.items[i]);
        }
    }
};

Cell opt(const std::optional<double> &v) { return v ? Cell{*v} : Cell{}; }

double round1(double v) { return std::round(v * 10.0) / 10.0; }

// ---------------------------------------------------------------------------

Table run_ingest_check(const RunConfig &c, std::ostream &err) {
    const Inputs in = load_inputs(c);
    struct Nothing {
        void add(const PersonRecord &) {}
        void merge(const Nothing &) {}
    };
    const auto result = scan(c, in, err, [] { return Nothing{}; });
    Table t{"ingest_report", {"item", "count"}, {}, {}};
    t.add_row({std::string("rows_read"), static_cast<long long>(result.report.rows_read)});
    t.add_row({std::string("accepted"), static_cast<long long>(result.report.accepted)});
    t.add_row({std::string("rejected"), static_cast<long long>(result.report.rejected)});
    for (const auto &[reason, n] : result.report.rejects_by_reason) {
        t.add_row({"rejected: " + reason, static_cast<long long>(n)});
    }
    if (c.strict && result.report.rejected > 0) {
        throw ValidationError(std::to_string(result.report.rejected) + " rows failed validation");
    }
    return t;
}

Table indicator_table(const IndicatorTable &it) {
    Table t{"cmi", {"key", "migrants", "par", "cmi"}, {}, {}};
    t.meta = {{"scale", std::string(name_of(it.scale))},
              {"dimension", std::string(dimension_name(it.dimension))},
              {"filter", it.filter}};
    for (const auto &row : it.rows) {
        t.add_row({row.key, row.migrants, row.par, opt(row.value)});
    }
    return t;
}

Table run_cmi(const RunConfig &c, std::ostream &err) {
    const auto dimension = parse_dimension(c.by);
    if (!dimension) {
        throw UsageError("--by must be none, education, sex or age_group");
    }
    if (c.ratios && *dimension != Dimension::Education) {
        throw UsageError("--ratios requires --by education");
    }
    const Inputs in = load_inputs(c);
    const auto filter =
        age_filter_of(c.age_filter, *dimension == Dimension::Education ? RecordFilter::aged_15_plus() : RecordFilter{});
    const auto options = intensity_of(c);
    const auto result = scan(c, in, err, [&] { return CmiCounter(options, filter, *dimension); });
    const auto table = result.accumulator.table();
    if (!c.ratios) {
        return indicator_table(table);
    }
    const auto ratios = education_ratios(table);
    Table t{"education_ratios", {"education", "ratio_to_lt_primary"}, {}, {}};
    t.meta = {{"scale", std::string(name_of(ratios.scale))}, {"filter", table.filter}};
    for (std::size_t i = 0; i < kKnownEducation.size(); ++i) {
        t.add_row({std::string(name_of(kKnownEducation[i])), opt(ratios.ratio[i])});
    }
    return t;
}

Table run_acmi(const RunConfig &c, std::ostream &err) {
    if (!(c.addresses > 0.0)) {
        throw UsageError("--addresses is required and must be positive");
    }
    std::vector<ScaleObservation> observed;
    if (!c.observed.empty()) {
        for (const auto &spec : c.observed) {
            const auto colon = spec.find(':');
            const auto n = colon == std::string::npos ? std::nullopt : text::parse_double(spec.substr(0, colon));
            const auto v = colon == std::string::npos ? std::nullopt : text::parse_double(spec.substr(colon + 1));
            if (!n || !v) {
                throw UsageError("--observed expects N:CMI, got '" + spec + "'");
            }
            observed.push_back(ScaleObservation{*n, *v});
        }
    } else {
        const Inputs in = load_inputs(c);
        std::vector<Scale> scales;
        for (const auto s : {Scale::Major, Scale::Minor}) {
            if (in.hierarchy.count(s) > 1) {
                scales.push_back(s);
            }
        }
        if (scales.empty()) {
            throw InsufficientDataError("no scale with more than one region");
        }
        const auto par_mode = intensity_of(c).par_mode;
        const auto result = scan(c, in, err, [&] {
            CounterSet<CmiCounter> set;
            for (const auto s : scales) {
                set.items.emplace_back(IntensityOptions{s, par_mode}, RecordFilter{});
            }
            return set;
        });
        for (std::size_t i = 0; i < scales.size(); ++i) {
            observed.push_back(ScaleObservation{static_cast<double>(in.hierarchy.count(scales[i])),
                                                result.accumulator.items[i].total().value});
        }
    }
    const auto est = acmi_estimate(observed, c.addresses);
    Table t{"acmi", {"courgeau_k", "n_addresses", "acmi", "capped", "observed_scales"}, {}, {}};
    std::string scales;
    for (const auto &o : est.observed) {
        scales += (scales.empty() ? "" : ";") + text::format_double(o.n_regions) + ":" + text::format_double(o.cmi);
    }
    t.add_row({est.courgeau_k, est.n_addresses, est.acmi_value, est.capped, scales});
    return t;
}

Table profile_table(const AgeProfile &p, std::string name) {
    Table t{std::move(name), {"age", "value"}, {}, {}};
    t.meta = {{"normalized", p.normalized}, {"smoothed", p.smoothed},
              {"missing_ages", static_cast<long long>(p.missing_ages.size())}};
    for (std::size_t i = 0; i < p.ages.size(); ++i) {
        t.add_row({p.ages[i], p.values[i]});
    }
    return t;
}

Table peak_table(const AgeProfile &p) {
    const auto s = peak(p);
    Table t{"peak", {"age_at_peak", "intensity_at_peak", "degenerate"}, {}, {}};
    t.add_row({s.age_at_peak, s.intensity_at_peak, s.degenerate});
    return t;
}

Table run_age_profile(const RunConfig &c, std::ostream &err) {
    const Inputs in = load_inputs(c);
    std::optional<Reason> reason;
    if (!c.reason.empty()) {
        reason = category_of<Reason>(c.reason, "--reason");
        if (!in.schema.bound(Field::Reason)) {
            throw InsufficientDataError("reason for moving unavailable");
        }
    }
    const auto options = intensity_of(c);
    const auto filter = age_filter_of(c.age_filter, RecordFilter{});
    const auto result = scan(c, in, err, [&] { return AsmiCounter(options, reason, filter); });
    const auto counts = result.accumulator.counts();
    AgeProfile profile;
    if (c.raw) {
        profile = to_profile(counts);
        if (c.peak) {
            profile = normalize(profile);
        }
    } else {
        profile = reason ? reason_age_profile(counts, c.bandwidth) : smooth_and_normalize(to_profile(counts), c.bandwidth);
    }
    return c.peak ? peak_table(profile) : profile_table(profile, "age_profile");
}

Table matrix_table(const FlowMatrices &m, const RegionHierarchy &h) {
    Table t{"flow_matrix", {"origin", "destination", "stratum", "weighted_count"}, {}, {}};
    t.meta = {{"scale", std::string(name_of(m.total.scale))},
              {"total", m.total.total},
              {"unplaced", m.total.unplaced}};
    auto emit = [&](const FlowMatrix &fm, const std::string &stratum) {
        for (const auto &[key, w] : fm.cells) {
            t.add_row({h.region(fm.scale, key.first).id, h.region(fm.scale, key.second).id, stratum, w});
        }
    };
    emit(m.total, "all");
    for (const auto &s : m.strata) {
        emit(s, s.stratum);
    }
    return t;
}

Table run_flows(const RunConfig &c, std::ostream &err) {
    const int modes = int(c.composition) + int(c.settlement) + int(c.secondary_by_flow);
    if (modes > 1) {
        throw UsageError("choose at most one of --composition, --settlement, --secondary-by-flow");
    }
    const Inputs in = load_inputs(c);
    const Scale scale = scale_of(c);
    if (c.composition) {
        const auto r = scan(c, in, err, [&] { return CompositionCounter(scale); }).accumulator.result();
        Table t{"composition", {"age_group", "LtPrimary", "Primary", "Secondary", "Tertiary", "known_weight",
                                "unknown_weight", "empty"}, {}, {}};
        for (const auto &row : r.rows) {
            t.add_row({row.age_group, opt(row.percent[0]), opt(row.percent[1]), opt(row.percent[2]),
                       opt(row.percent[3]), row.known_weight, row.unknown_weight, row.empty});
        }
        return t;
    }
    if (c.settlement || c.secondary_by_flow) {
        const FieldSet fields = in.schema.bound_fields();
        if (!fields.has(Field::UrbanPrev)) {
            throw InsufficientDataError("urban status of previous residence unavailable");
        }
        const auto counter = scan(c, in, err, [&] { return SettlementCounter(scale); }).accumulator;
        if (c.settlement) {
            const auto s = settlement_shares(counter, fields);
            Table t{"settlement_shares", {"flow", "percent", "weight"}, {}, {}};
            t.meta = {{"unknown_weight", s.unknown_weight}};
            for (std::size_t i = 0; i < kKnownFlows.size(); ++i) {
                t.add_row({std::string(name_of(kKnownFlows[i])), s.percent[i], s.weight[i]});
            }
            return t;
        }
        const auto s = secondary_plus_share_by_flow(counter, fields);
        Table t{"secondary_plus_by_flow", {"flow", "percent_secondary_plus", "known_weight", "unknown_weight"}, {}, {}};
        for (const auto &row : s.rows) {
            t.add_row({std::string(name_of(row.flow)), row.percent, row.known_weight, row.unknown_weight});
        }
        return t;
    }
    const auto dimension = parse_dimension(c.by);
    if (!dimension) {
        throw UsageError("--by must be none, education, sex or age_group");
    }
    const auto filter = age_filter_of(c.age_filter, RecordFilter{});
    const auto m = scan(c, in, err, [&] { return FlowCounter(scale, *dimension, filter); }).accumulator.result();
    return matrix_table(m, in.hierarchy);
}

Table run_reasons(const RunConfig &c, std::ostream &err) {
    const Inputs in = load_inputs(c);
    if (!in.schema.bound(Field::Reason)) {
        throw InsufficientDataError("reason for moving unavailable");
    }
    const Scale scale = scale_of(c);
    if (!c.reason.empty()) {
        const Reason reason = category_of<Reason>(c.reason, "--profile");
        IntensityOptions options;
        options.scale = scale;
        const auto counts = scan(c, in, err, [&] { return AsmiCounter(options, reason); }).accumulator.counts();
        const auto profile = reason_age_profile(counts, c.bandwidth);
        return c.peak ? peak_table(profile) : profile_table(profile, "reason_age_profile");
    }
    const auto filter = age_filter_of(c.age_filter, RecordFilter::aged(kReasonMinAge, kReasonMaxAge));
    const auto table =
        scan(c, in, err, [&] { return ReasonCounter(scale, filter); }).accumulator.result(c.by_sex || c.sex_ratio);
    if (c.sex_ratio) {
        const auto ratios = reason_sex_ratio(table);
        Table t{"reason_sex_ratio", {"reason", "ratio", "ratio_rounded", "infinite"}, {}, {}};
        for (std::size_t k = 0; k < kKnownReasons.size(); ++k) {
            const auto &r = ratios.ratio[k];
            t.add_row({std::string(name_of(kKnownReasons[k])), opt(r.value),
                       r.value && !r.infinite ? Cell{round1(*r.value)} : opt(r.value), r.infinite});
        }
        return t;
    }
    Table t{"reason_shares", {"group", "reason", "percent", "known_weight", "unknown_weight"}, {}, {}};
    t.meta = {{"scale", std::string(name_of(scale))}, {"filter", filter.describe()}};
    auto emit = [&t](const std::string &group, const ReasonShares &s) {
        for (std::size_t k = 0; k < kKnownReasons.size(); ++k) {
            t.add_row({group, std::string(name_of(kKnownReasons[k])), s.percent[k], s.known_weight, s.unknown_weight});
        }
    };
    emit("all", table.all);
    if (table.men) {
        emit("men", *table.men);
    }
    if (table.women) {
        emit("women", *table.women);
    }
    return t;
}

Table run_selectivity(const RunConfig &c, std::ostream &err) {
    const Inputs in = load_inputs(c);
    if (!in.schema.bound(Field::YearsSchooling)) {
        throw InsufficientDataError("years of schooling unavailable");
    }
    const auto filter = age_filter_of(c.age_filter, RecordFilter::aged_15_plus());
    const auto table = scan(c, in, err, [&] { return MysCounter(filter); }).accumulator.result();
    if (c.ratios) {
        const auto r = selectivity_ratios(table);
        Table t{"selectivity_ratios", {"filter", "ratio_to_urban_stayers", "ratio_to_rural_stayers"}, {}, {}};
        t.add_row({table.filter, r.ratio_to_urban_stayers, r.ratio_to_rural_stayers});
        return t;
    }
    Table t{"mys_by_status", {"status", "mean_years", "weight"}, {}, {}};
    t.meta = {{"filter", table.filter}};
    for (std::size_t i = 0; i < kKnownStatuses.size(); ++i) {
        t.add_row({std::string(name_of(kKnownStatuses[i])), opt(table.mean[i]), table.weight[i]});
    }
    t.add_row({std::string("Total"), opt(table.total_mean), table.total_weight});
    return t;
}

Table run_duration(const RunConfig &c, std::ostream &err) {
    const Inputs in = load_inputs(c);
    const FieldSet fields = in.schema.bound_fields();
    const SettlementFlow flow = category_of<SettlementFlow>(c.flow, "--flow");
    const int range = duration_range(in.schema.interval_years, in.schema.duration_top_code);
    const Scale scale = scale_of(c);
    if (!fields.has(Field::DurationYears)) {
        throw InsufficientDataError("duration of residence unavailable");
    }
    if (!fields.has(Field::UrbanPrev)) {
        throw InsufficientDataError("urban status of previous residence unavailable");
    }
    const auto counter = scan(c, in, err, [&] { return DurationCounter(range, scale); }).accumulator;
    if (c.mys) {
        Table t{"mys_by_duration", {"duration", "flow", "mean_years", "weight"}, {}, {}};
        for (const auto &row : mys_by_duration(counter, fields)) {
            t.add_row({static_cast<long long>(row.duration), std::string(name_of(row.flow)), row.mean, row.weight});
        }
        return t;
    }
    const auto series = attainment_by_duration(counter, fields, flow);
    Table t{"attainment_by_duration", {"duration", "percent_secondary_plus", "known_weight"}, {}, {}};
    t.meta = {{"flow", std::string(name_of(series.flow))}, {"out_of_range_weight", counter.out_of_range()}};
    for (const auto &p : series.points) {
        t.add_row({static_cast<long long>(p.duration), opt(p.percent), p.known_weight});
    }
    return t;
}

Table run_redistribution(const RunConfig &c, std::ostream &err) {
    const Inputs in = load_inputs(c);
    const Scale scale = scale_of(c);
    if (!in.hierarchy.has_scale(scale)) {
        throw InsufficientDataError(std::string(name_of(scale)) + " regions are not defined in the hierarchy");
    }
    const auto weighting = parse_weighting(c.weighting);
    if (!weighting) {
        throw UsageError("--weighting must be stratum-par, total-par or unweighted");
    }
    if (c.by_education && !c.education.empty()) {
        throw UsageError("--by-education and --education are exclusive");
    }
    std::vector<std::optional<Education>> strata;
    if (c.by_education) {
        strata.emplace_back(std::nullopt);
        for (const auto e : kKnownEducation) {
            strata.emplace_back(e);
        }
    } else if (!c.education.empty()) {
        strata.emplace_back(category_of<Education>(c.education, "--education"));
    } else {
        strata.emplace_back(std::nullopt);
    }
    const std::size_t n = in.hierarchy.count(scale);
    const ParMode par_mode = intensity_of(c).par_mode;
    const auto set = scan(c, in, err, [&] {
                         CounterSet<NmrCounter> s;
                         for (const auto &e : strata) {
                             s.items.emplace_back(scale, n, e, par_mode);
                         }
                         return s;
                     }).accumulator;
    std::vector<NmrTable> tables;
    for (const auto &counter : set.items) {
        tables.push_back(counter.result(in.hierarchy));
    }
    if (c.slope || c.by_education) {
        Table t{"density_slope",
                {"stratum", "slope", "intercept", "r_squared", "slope_std_error", "n_regions", "weighting"},
                {},
                {}};
        t.meta = {{"scale", std::string(name_of(scale))}, {"log_base", c.log_base ? Cell{*c.log_base} : Cell{}}};
        for (const auto &table : tables) {
            const auto s = density_slope(table, in.hierarchy, DensityOptions{c.log_base, *weighting});
            t.add_row({s.stratum, s.fit.slope, s.fit.intercept, s.fit.r_squared, s.fit.slope_std_error,
                       static_cast<long long>(s.fit.n_points), std::string(weighting_name(s.weighting))});
        }
        return t;
    }
    Table t{"nmr_by_region", {"region", "density", "par", "total_par", "inflow", "outflow", "nmr", "stratum"}, {}, {}};
    t.meta = {{"scale", std::string(name_of(scale))}, {"unplaced", tables.front().unplaced}};
    for (const auto &row : tables.front().rows) {
        t.add_row({row.region_id, opt(in.hierarchy.region(scale, row.region).density), row.par, row.total_par,
                   row.inflow, row.outflow, opt(row.nmr), tables.front().stratum});
    }
    return t;
}

Table run_synth(const RunConfig &c, std::ostream &err) {
    if (c.output.empty()) {
        throw UsageError("synth needs --output DIR");
    }
    SynthConfig config = c.config_path.empty() ? SynthConfig{} : load_synth_config(c.config_path);
    if (c.config_path.empty()) {
        config = parse_synth_config("{}");
    }
    if (c.records) {
        config.records = *c.records;
    }
    if (c.seed) {
        config.seed = *c.seed;
    }
    const auto ledger = generate_files(config, c.output, parallelism_of(c));
    err << "migedu: wrote " << ledger.records << " records to " << c.output << '\n';
    Table t{"synth_ledger", {"records", "corrupt", "unknown_prev", "par", "major_migrants", "minor_migrants"}, {}, {}};
    t.meta = {{"algorithm", ledger.algorithm}, {"seed", static_cast<long long>(ledger.seed)}};
    t.add_row({static_cast<long long>(ledger.records), static_cast<long long>(ledger.corrupt),
               static_cast<long long>(ledger.unknown_prev), ledger.total.par, ledger.total.major_migrants,
               ledger.total.minor_migrants});
    return t;
}

Table run_verify_fixtures(const RunConfig &c, std::ostream &err, bool &failed) {
    const auto report = verify_fixtures(c.fixtures);
    failed = !report.all_pass();
    std::size_t total = 0, passed = 0;
    Table checks{"fixture_checks", {"group", "check", "expected", "actual", "tolerance", "pass"}, {}, {}};
    for (const auto &[group, list] : {std::pair{"selectivity_ratio", &report.ratio_checks},
                                      std::pair{"column_mean", &report.mean_checks},
                                      std::pair{"sex_ratio", &report.sex_ratio_checks}}) {
        for (const auto &ch : *list) {
            checks.add_row({std::string(group), ch.name, ch.expected, ch.actual, ch.tolerance, ch.pass()});
            ++total;
            passed += ch.pass() ? 1 : 0;
        }
    }
    err << "migedu: " << passed << "/" << total << " fixture checks passed\n";
    Table fits{"cross_country_fits",
               {"variant", "x_source", "n_points", "slope", "intercept", "r_squared", "power_coefficient",
                "power_exponent", "excluded", "missing_x"},
               {},
               {}};
    for (const auto &f : report.fits) {
        std::string excluded, missing;
        for (const auto &e : f.fit.excluded) {
            excluded += (excluded.empty() ? "" : ";") + e;
        }
        for (const auto &m : f.missing_x) {
            missing += (missing.empty() ? "" : ";") + m;
        }
        fits.add_row({f.label, f.x_source, static_cast<long long>(f.n_points), f.fit.linear.slope,
                      f.fit.linear.intercept, f.fit.linear.r_squared, f.fit.power.coefficient, f.fit.power.exponent,
                      excluded, missing});
        err << "migedu: fit [" << f.label << "] slope " << text::format_double(f.fit.linear.slope) << " intercept "
            << text::format_double(f.fit.linear.intercept) << " r2 " << text::format_double(f.fit.linear.r_squared)
            << '\n';
    }
    return c.fits ? fits : checks;
}

void add_data_options(CLI::App *sub, RunConfig &c) {
    sub->add_option("--schema", c.schema_path, "Schema JSON")->check(CLI::ExistingFile);
    sub->add_option("--data", c.data_path, "Delimited microdata file")->check(CLI::ExistingFile);
    sub->add_option("--hierarchy", c.hierarchy_path, "Region hierarchy CSV")->check(CLI::ExistingFile);
    sub->add_flag("--unweighted", c.unweighted, "Count every record once, ignoring weights");
}

void add_scale_option(CLI::App *sub, RunConfig &c) {
    sub->add_option("--scale", c.scale, "Spatial scale: major or minor")->capture_default_str();
}

void add_par_option(CLI::App *sub, RunConfig &c) {
    sub->add_flag("--include-unknown-in-par", c.include_unknown_in_par,
                  "Count records with unknown previous residence as non-migrants in the PAR");
}

void add_age_option(CLI::App *sub, RunConfig &c) {
    sub->add_option("--age-filter", c.age_filter, "Age filter: all, N+ or N-M");
}

} // namespace

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    RunConfig c;
    CLI::App app{"Migration and education indicators from census microdata"};
    app.name("migedu");
    app.require_subcommand(1, 1);
    app.add_option("--format", c.format, "Output format: csv or json")->capture_default_str();
    app.add_option("--output", c.output, "Output path (synth: output directory)");
    app.add_option("--threads", c.threads, "Worker threads (default: MIGEDU_THREADS or all cores)");
    app.fallthrough();

    auto *ingest = app.add_subcommand("ingest-check", "Validate microdata and report rejected rows");
    add_data_options(ingest, c);
    ingest->add_flag("--strict", c.strict, "Exit 2 when any row is rejected");
    ingest->footer("Table: item,count");

    auto *cmi = app.add_subcommand("cmi", "Crude migration intensity");
    add_data_options(cmi, c);
    add_scale_option(cmi, c);
    add_par_option(cmi, c);
    add_age_option(cmi, c);
    cmi->add_option("--by", c.by, "Stratify by none, education, sex or age_group")->capture_default_str();
    cmi->add_flag("--ratios", c.ratios, "Emit each education level's CMI over the less-than-primary CMI");
    cmi->footer("Table: key,migrants,par,cmi (first row Total). With --ratios: education,ratio_to_lt_primary");

    auto *acmi = app.add_subcommand("acmi", "Aggregate crude migration intensity");
    add_data_options(acmi, c);
    add_par_option(acmi, c);
    acmi->add_option("--observed", c.observed, "Observed scale as N:CMI (repeatable); otherwise taken from data");
    acmi->add_option("--addresses", c.addresses, "Number of addresses to extrapolate to")->required();
    acmi->footer("Table: courgeau_k,n_addresses,acmi,capped,observed_scales");

    auto *age = app.add_subcommand("age-profile", "Age-specific migration intensities");
    add_data_options(age, c);
    add_scale_option(age, c);
    add_par_option(age, c);
    add_age_option(age, c);
    age->add_option("--reason", c.reason, "Restrict migrants to one reason for moving");
    age->add_option("--bandwidth", c.bandwidth, "Kernel bandwidth in years")->capture_default_str();
    age->add_flag("--raw", c.raw, "Single-year proportions without smoothing");
    age->add_flag("--peak", c.peak, "Emit the peak summary instead of the profile");
    age->footer("Table: age,value. With --peak: age_at_peak,intensity_at_peak,degenerate");

    auto *flows = app.add_subcommand("flows", "Flow matrices and flow composition");
    add_data_options(flows, c);
    add_scale_option(flows, c);
    add_age_option(flows, c);
    flows->add_option("--by", c.by, "Stratify the matrix by none, education, sex or age_group")
        ->capture_default_str();
    flows->add_flag("--composition", c.composition, "Education mix of migrants by age group 15-19 … 40-44");
    flows->add_flag("--settlement", c.settlement, "Shares of RR, RU, UR, UU migration");
    flows->add_flag("--secondary-by-flow", c.secondary_by_flow,
                    "Percent with at least secondary education per settlement flow");
    flows->footer("Tables: origin,destination,stratum,weighted_count | age_group,LtPrimary,Primary,Secondary,"
                  "Tertiary,known_weight,unknown_weight,empty | flow,percent,weight | "
                  "flow,percent_secondary_plus,known_weight,unknown_weight");

    auto *reasons = app.add_subcommand("reasons", "Reasons for moving among young adults");
    add_data_options(reasons, c);
    add_scale_option(reasons, c);
    add_age_option(reasons, c);
    reasons->add_flag("--by-sex", c.by_sex, "Add separate tables for men and women");
    reasons->add_flag("--sex-ratio", c.sex_ratio, "Men's over women's share per reason");
    reasons->add_option("--profile", c.reason, "Smoothed, normalized age profile of one reason");
    reasons->add_option("--bandwidth", c.bandwidth, "Kernel bandwidth in years")->capture_default_str();
    reasons->add_flag("--peak", c.peak, "With --profile: emit the peak summary");
    reasons->footer("Tables: group,reason,percent,known_weight,unknown_weight | reason,ratio,ratio_rounded,infinite "
                    "| age,value");

    auto *sel = app.add_subcommand("selectivity", "Mean years of schooling by migrant status");
    add_data_options(sel, c);
    add_age_option(sel, c);
    sel->add_flag("--ratios", c.ratios, "Urban in-migrant MYS over urban and rural stayer MYS");
    sel->footer("Tables: status,mean_years,weight | filter,ratio_to_urban_stayers,ratio_to_rural_stayers");

    auto *dur = app.add_subcommand("duration", "Attainment by duration of residence");
    add_data_options(dur, c);
    add_scale_option(dur, c);
    dur->add_option("--flow", c.flow, "Settlement flow: RR, RU, UR or UU")->capture_default_str();
    dur->add_flag("--mys", c.mys, "Mean years of schooling per duration and flow");
    dur->footer("Tables: duration,percent_secondary_plus,known_weight | duration,flow,mean_years,weight");

    auto *red = app.add_subcommand("redistribution", "Net migration rates and density slopes");
    add_data_options(red, c);
    add_scale_option(red, c);
    add_par_option(red, c);
    red->add_option("--education", c.education, "Restrict to one education level, ages 15+");
    red->add_flag("--slope", c.slope, "Emit the density regression instead of per-region rates");
    red->add_flag("--by-education", c.by_education, "Density slope for all and each education level");
    red->add_option("--log-base", c.log_base, "Logarithm base for density (default natural)");
    red->add_option("--weighting", c.weighting, "stratum-par, total-par or unweighted")->capture_default_str();
    red->footer("Tables: region,density,par,total_par,inflow,outflow,nmr,stratum | "
                "stratum,slope,intercept,r_squared,slope_std_error,n_regions,weighting");

    auto *syn = app.add_subcommand("synth", "Generate a synthetic census with a ground-truth ledger");
    syn->add_option("--config", c.config_path, "Synth config JSON")->check(CLI::ExistingFile);
    syn->add_option("--records", c.records, "Override the record count");
    syn->add_option("--seed", c.seed, "Override the seed");
    syn->footer("Writes microdata.csv, hierarchy.csv, schema.json, ledger.json. "
                "Table: records,corrupt,unknown_prev,par,major_migrants,minor_migrants");

    auto *fix = app.add_subcommand("verify-fixtures", "Recompute published ratios from the shipped tables");
    fix->add_option("--fixtures", c.fixtures, "Fixture directory")->check(CLI::ExistingDirectory)
        ->capture_default_str();
    fix->add_flag("--fits", c.fits, "Emit the cross-country fits instead of the checks");
    fix->footer("Tables: group,check,expected,actual,tolerance,pass | variant,x_source,n_points,slope,intercept,"
                "r_squared,power_coefficient,power_exponent,excluded,missing_x");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp &e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError &e) {
        err << "migedu: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        const auto *sub = app.get_subcommands().front();
        c.subcommand = sub->get_name();
        const Format format = format_of(c);
        bool fixture_failed = false;
        Table table;
        if (c.subcommand == "ingest-check") {
            table = run_ingest_check(c, err);
        } else if (c.subcommand == "cmi") {
            table = run_cmi(c, err);
        } else if (c.subcommand == "acmi") {
            table = run_acmi(c, err);
        } else if (c.subcommand == "age-profile") {
            table = run_age_profile(c, err);
        } else if (c.subcommand == "flows") {
            table = run_flows(c, err);
        } else if (c.subcommand == "reasons") {
            table = run_reasons(c, err);
        } else if (c.subcommand == "selectivity") {
            table = run_selectivity(c, err);
        } else if (c.subcommand == "duration") {
            table = run_duration(c, err);
        } else if (c.subcommand == "redistribution") {
            table = run_redistribution(c, err);
        } else if (c.subcommand == "synth") {
            table = run_synth(c, err);
        } else if (c.subcommand == "verify-fixtures") {
            table = run_verify_fixtures(c, err, fixture_failed);
        }
        if (!c.output.empty() && c.subcommand != "synth") {
            std::ofstream file(c.output, std::ios::binary);
            if (!file) {
                throw ValidationError("cannot write " + c.output);
            }
            write_table(table, format, file);
        } else {
            write_table(table, format, out);
        }
        if (fixture_failed) {
            err << "migedu: fixture check failed\n";
            return kExitFixtureFailure;
        }
        return kExitOk;
    } catch (const UsageError &e) {
        err << "migedu: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ValidationError &e) {
        err << "migedu: " << e.what() << '\n';
        return kExitValidation;
    } catch (const InsufficientDataError &e) {
        err << "migedu: " << e.what() << '\n';
        return kExitInsufficientData;
    } catch (const std::invalid_argument &e) {
        err << "migedu: " << e.what() << '\n';
        return kExitInsufficientData;
    } catch (const std::exception &e) {
        err << "migedu: " << e.what() << '\n';
        return kExitValidation;
    }
}

} // namespace migedu
