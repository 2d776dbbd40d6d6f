#include "migedu/synth.hpp"

#include "migedu/error.hpp"
#include "text.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>
#include <unordered_map>

namespace migedu {

double AgeSchedule::at(int age, int min_age) const {
    if (!explicit_values.empty()) {
        const auto i = static_cast<std::size_t>(std::max(0, age - min_age));
        return i < explicit_values.size() ? explicit_values[i] : explicit_values.back();
    }
    auto bump = [age](double level, double peak, double sd) {
        const double z = (age - peak) / sd;
        return level * std::exp(-0.5 * z * z);
    };
    return floor + child_level * std::exp(-child_decay * age) + bump(labour_level, labour_peak, labour_sd) +
           bump(retirement_level, retirement_peak, retirement_sd);
}

namespace {

void check_probability_row(std::span<const double> row, std::string_view what) {
    double sum = 0.0;
    for (const double p : row) {
        if (!(p >= 0.0) || !std::isfinite(p)) {
            throw ValidationError(std::string(what) + ": probabilities must be finite and non-negative");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ValidationError(std::string(what) + ": probabilities sum to " + text::format_double(sum) +
                              ", expected 1");
    }
}

void check_unit(double p, std::string_view what) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw ValidationError(std::string(what) + " must lie in [0, 1]");
    }
}

template <typename Band>
const Band *band_for(const std::vector<Band> &bands, int age) {
    for (const auto &b : bands) {
        if (age >= b.min_age && age <= b.max_age) {
            return &b;
        }
    }
    return nullptr;
}

} // namespace

void SynthConfig::validate() const {
    if (regions.empty()) {
        throw ValidationError("synth: at least one region required");
    }
    std::vector<double> shares;
    std::unordered_map<std::string, std::string> parent;
    std::unordered_map<std::string, int> major_minors;
    for (const auto &r : regions) {
        if (r.minor_id.empty() || r.major_id.empty()) {
            throw ValidationError("synth: region ids must be non-empty");
        }
        if (!parent.emplace(r.minor_id, r.major_id).second) {
            throw ValidationError("synth: duplicate minor region " + r.minor_id);
        }
        ++major_minors[r.major_id];
        if (!(r.area_km2 > 0.0)) {
            throw ValidationError("synth: area of " + r.minor_id + " must be positive");
        }
        if (!(r.attractiveness >= 0.0)) {
            throw ValidationError("synth: attractiveness of " + r.minor_id + " must be non-negative");
        }
        check_unit(r.urban_probability, "synth: urban_probability of " + r.minor_id);
        shares.push_back(r.population_share);
    }
    check_probability_row(shares, "synth: region population_share");
    if (inter_major_rate > 0.0 && major_minors.size() < 2) {
        throw ValidationError("synth: inter-major moves need at least two major regions");
    }
    if (min_age < 0 || max_age < min_age || max_age > 130) {
        throw ValidationError("synth: age range must satisfy 0 <= min_age <= max_age <= 130");
    }
    const auto ages = static_cast<std::size_t>(max_age - min_age + 1);
    if (!age_pyramid.empty()) {
        if (age_pyramid.size() != ages) {
            throw ValidationError("synth: age_pyramid needs one weight per age");
        }
        if (std::any_of(age_pyramid.begin(), age_pyramid.end(), [](double w) { return !(w >= 0.0); }) ||
            !(std::accumulate(age_pyramid.begin(), age_pyramid.end(), 0.0) > 0.0)) {
            throw ValidationError("synth: age_pyramid weights must be non-negative with a positive sum");
        }
    }
    check_unit(male_share, "synth: male_share");
    check_unit(unknown_education_probability, "synth: unknown_education_probability");
    check_unit(unknown_reason_probability, "synth: unknown_reason_probability");
    check_unit(unknown_prev_probability, "synth: unknown_prev_probability");
    check_unit(corrupt_fraction, "synth: corrupt_fraction");
    for (const auto &b : education) {
        check_probability_row(b.probs, "synth: education band");
    }
    for (const auto &b : reasons) {
        check_probability_row(b.probs, "synth: reason band");
    }
    for (int age = min_age; age <= max_age; ++age) {
        if (!band_for(education, age)) {
            throw ValidationError("synth: no education band covers age " + std::to_string(age));
        }
        if (!band_for(reasons, age)) {
            throw ValidationError("synth: no reason band covers age " + std::to_string(age));
        }
        const double shape = schedule.at(age, min_age);
        if (!(shape >= 0.0)) {
            throw ValidationError("synth: age schedule is negative at age " + std::to_string(age));
        }
        for (const double m : education_multiplier) {
            if (!(m >= 0.0)) {
                throw ValidationError("synth: education multipliers must be non-negative");
            }
            if ((inter_major_rate + intra_major_rate) * shape * m > 1.0 + 1e-12) {
                throw ValidationError("synth: move probability exceeds 1 at age " + std::to_string(age));
            }
        }
    }
    if (!(inter_major_rate >= 0.0) || !(intra_major_rate >= 0.0)) {
        throw ValidationError("synth: move rates must be non-negative");
    }
    if (settlement_mix) {
        check_probability_row(*settlement_mix, "synth: settlement_mix");
    }
    for (std::size_t i = 0; i < 4; ++i) {
        if (!(schooling_sd[i] >= 0.0) || !(schooling_mean[i] >= 0.0)) {
            throw ValidationError("synth: schooling mean and sd must be non-negative");
        }
    }
    if (interval_years <= 0) {
        throw ValidationError("synth: interval_years must be positive");
    }
    if (!duration_probs.empty()) {
        if (duration_probs.size() != static_cast<std::size_t>(interval_years) + 1) {
            throw ValidationError("synth: duration_probs needs interval_years + 1 entries");
        }
        check_probability_row(duration_probs, "synth: duration_probs");
    }
    if (duration_top_code && *duration_top_code < 0) {
        throw ValidationError("synth: duration_top_code must be non-negative");
    }
    if (!(weight_min > 0.0) || weight_max < weight_min) {
        throw ValidationError("synth: weight range must satisfy 0 < weight_min <= weight_max");
    }
    if (total_population && !(*total_population > 0.0)) {
        throw ValidationError("synth: total_population must be positive");
    }
}

namespace {

using nlohmann::json;

template <typename T>
void read(const json &node, const char *key, T &target) {
    if (node.contains(key)) {
        try {
            target = node.at(key).get<T>();
        } catch (const json::exception &e) {
            throw ValidationError(std::string("synth config: bad value for '") + key + "': " + e.what());
        }
    }
}

template <typename T>
void read_optional(const json &node, const char *key, std::optional<T> &target) {
    if (node.contains(key) && !node.at(key).is_null()) {
        T value{};
        read(node, key, value);
        target = value;
    }
}

/// Grid of `majors` × `minors` regions with spread-out areas and urban probabilities.
std::vector<SynthRegion> grid_regions(int majors, int minors) {
    if (majors < 1 || minors < 1) {
        throw ValidationError("synth config: grid needs at least one major and one minor per major");
    }
    std::vector<SynthRegion> out;
    const double share = 1.0 / (majors * minors);
    for (int m = 0; m < majors; ++m) {
        for (int k = 0; k < minors; ++k) {
            const int i = m * minors + k;
            SynthRegion r;
            r.major_id = "M" + std::to_string(m + 1);
            r.minor_id = r.major_id + "-" + std::to_string(k + 1);
            r.area_km2 = 50.0 * (1 + (i * 7) % 13);
            r.population_share = share;
            r.urban_probability = 0.15 + 0.7 * ((i * 5) % 11) / 10.0;
            r.attractiveness = 1.0;
            out.push_back(std::move(r));
        }
    }
    // Fix the last share so the row sums to 1 within rounding.
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < out.size(); ++i) {
        sum += out[i].population_share;
    }
    out.back().population_share = 1.0 - sum;
    return out;
}

} // namespace

SynthConfig parse_synth_config(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error &e) {
        throw ValidationError(std::string("synth config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw ValidationError("synth config must be a JSON object");
    }
    SynthConfig c;
    if (doc.contains("regions")) {
        const auto &regions = doc.at("regions");
        if (regions.is_object() && regions.contains("grid")) {
            int majors = 10, minors = 5;
            read(regions.at("grid"), "majors", majors);
            read(regions.at("grid"), "minors_per_major", minors);
            c.regions = grid_regions(majors, minors);
        } else if (regions.is_array()) {
            for (const auto &node : regions) {
                SynthRegion r;
                read(node, "minor", r.minor_id);
                read(node, "major", r.major_id);
                read(node, "area_km2", r.area_km2);
                read(node, "population_share", r.population_share);
                read(node, "urban_probability", r.urban_probability);
                read(node, "attractiveness", r.attractiveness);
                c.regions.push_back(std::move(r));
            }
        } else {
            throw ValidationError("synth config: regions must be an array or {\"grid\": {...}}");
        }
    } else {
        c.regions = grid_regions(10, 5);
    }
    read(doc, "min_age", c.min_age);
    read(doc, "max_age", c.max_age);
    read(doc, "age_pyramid", c.age_pyramid);
    read(doc, "male_share", c.male_share);
    if (doc.contains("education")) {
        c.education.clear();
        for (const auto &node : doc.at("education")) {
            EducationBand b;
            read(node, "min_age", b.min_age);
            read(node, "max_age", b.max_age);
            read(node, "probs", b.probs);
            c.education.push_back(b);
        }
    }
    read(doc, "unknown_education_probability", c.unknown_education_probability);
    if (doc.contains("schedule")) {
        const auto &s = doc.at("schedule");
        read(s, "floor", c.schedule.floor);
        read(s, "child_level", c.schedule.child_level);
        read(s, "child_decay", c.schedule.child_decay);
        read(s, "labour_level", c.schedule.labour_level);
        read(s, "labour_peak", c.schedule.labour_peak);
        read(s, "labour_sd", c.schedule.labour_sd);
        read(s, "retirement_level", c.schedule.retirement_level);
        read(s, "retirement_peak", c.schedule.retirement_peak);
        read(s, "retirement_sd", c.schedule.retirement_sd);
        read(s, "values", c.schedule.explicit_values);
    }
    read(doc, "education_multiplier", c.education_multiplier);
    read(doc, "inter_major_rate", c.inter_major_rate);
    read(doc, "intra_major_rate", c.intra_major_rate);
    read_optional(doc, "settlement_mix", c.settlement_mix);
    if (doc.contains("reasons")) {
        c.reasons.clear();
        for (const auto &node : doc.at("reasons")) {
            ReasonBand b;
            read(node, "min_age", b.min_age);
            read(node, "max_age", b.max_age);
            read(node, "probs", b.probs);
            c.reasons.push_back(b);
        }
    }
    read(doc, "unknown_reason_probability", c.unknown_reason_probability);
    read(doc, "schooling_mean", c.schooling_mean);
    read(doc, "schooling_sd", c.schooling_sd);
    read(doc, "duration_probs", c.duration_probs);
    read_optional(doc, "duration_top_code", c.duration_top_code);
    read(doc, "interval_years", c.interval_years);
    read(doc, "unknown_prev_probability", c.unknown_prev_probability);
    read(doc, "corrupt_fraction", c.corrupt_fraction);
    read(doc, "weight_min", c.weight_min);
    read(doc, "weight_max", c.weight_max);
    read(doc, "records", c.records);
    read(doc, "seed", c.seed);
    read(doc, "major_only", c.major_only);
    read_optional(doc, "total_population", c.total_population);
    c.validate();
    return c;
}

SynthConfig load_synth_config(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open synth config " + path.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_synth_config(buffer.str());
}

void SynthLedger::merge(const SynthLedger &other) {
    auto add_cell = [](Cell &a, const Cell &b) {
        a.par += b.par;
        a.major_migrants += b.major_migrants;
        a.minor_migrants += b.minor_migrants;
    };
    auto add_flows = [](std::vector<RegionFlow> &a, const std::vector<RegionFlow> &b) {
        a.resize(std::max(a.size(), b.size()));
        for (std::size_t i = 0; i < b.size(); ++i) {
            a[i].inflow += b[i].inflow;
            a[i].outflow += b[i].outflow;
            a[i].par += b[i].par;
        }
    };
    records += other.records;
    corrupt += other.corrupt;
    unknown_prev += other.unknown_prev;
    add_cell(total, other.total);
    for (std::size_t i = 0; i < by_education_15plus.size(); ++i) {
        add_cell(by_education_15plus[i], other.by_education_15plus[i]);
    }
    by_age.resize(std::max(by_age.size(), other.by_age.size()));
    for (std::size_t i = 0; i < other.by_age.size(); ++i) {
        add_cell(by_age[i], other.by_age[i]);
    }
    for (std::size_t i = 0; i < major_by_reason.size(); ++i) {
        major_by_reason[i] += other.major_by_reason[i];
    }
    for (std::size_t i = 0; i < major_by_flow.size(); ++i) {
        major_by_flow[i] += other.major_by_flow[i];
    }
    add_flows(major_regions, other.major_regions);
    add_flows(minor_regions, other.minor_regions);
}

std::string SynthLedger::to_json() const {
    auto cell = [](const Cell &c) {
        return json{{"par", c.par}, {"major_migrants", c.major_migrants}, {"minor_migrants", c.minor_migrants}};
    };
    auto flows = [](const std::vector<RegionFlow> &v) {
        auto arr = json::array();
        for (const auto &f : v) {
            arr.push_back(json{{"inflow", f.inflow}, {"outflow", f.outflow}, {"par", f.par}});
        }
        return arr;
    };
    json doc;
    doc["algorithm"] = algorithm;
    doc["seed"] = seed;
    doc["records"] = records;
    doc["corrupt"] = corrupt;
    doc["unknown_prev"] = unknown_prev;
    doc["total"] = cell(total);
    auto edu = json::object();
    for (std::size_t i = 0; i < by_education_15plus.size(); ++i) {
        edu[std::string(name_of(static_cast<Education>(i)))] = cell(by_education_15plus[i]);
    }
    doc["by_education_15plus"] = edu;
    auto ages = json::array();
    for (const auto &c : by_age) {
        ages.push_back(cell(c));
    }
    doc["by_age"] = ages;
    auto reasons = json::object();
    for (std::size_t i = 0; i < major_by_reason.size(); ++i) {
        reasons[std::string(name_of(static_cast<Reason>(i)))] = major_by_reason[i];
    }
    doc["major_by_reason"] = reasons;
    auto flow = json::object();
    for (std::size_t i = 0; i < major_by_flow.size(); ++i) {
        flow[std::string(name_of(static_cast<SettlementFlow>(i)))] = major_by_flow[i];
    }
    doc["major_by_flow"] = flow;
    doc["major_regions"] = flows(major_regions);
    doc["minor_regions"] = flows(minor_regions);
    return doc.dump(2);
}

namespace {

/// Lookup tables derived once from a validated config.
struct Model {
    const SynthConfig *config = nullptr;
    std::vector<double> region_cdf;
    std::vector<int> major_of;
    std::size_t major_count = 0;
    std::vector<double> major_cdf;
    std::vector<std::vector<int>> minors_of;
    std::vector<std::vector<double>> minor_cdf;
    std::vector<double> age_cdf;
    std::vector<std::array<double, 4>> education_cdf;
    std::vector<std::array<double, 5>> reason_cdf;
    std::vector<std::array<double, 5>> p_inter;
    std::vector<std::array<double, 5>> p_intra;
    std::vector<double> duration_cdf;
    std::optional<std::array<double, 4>> mix_cdf;

    explicit Model(const SynthConfig &c) : config(&c) {
        std::vector<std::string> majors;
        for (const auto &r : c.regions) {
            auto it = std::find(majors.begin(), majors.end(), r.major_id);
            if (it == majors.end()) {
                majors.push_back(r.major_id);
                it = majors.end() - 1;
            }
            major_of.push_back(static_cast<int>(it - majors.begin()));
        }
        major_count = majors.size();
        minors_of.resize(major_count);
        std::vector<double> major_pull(major_count, 0.0);
        for (std::size_t i = 0; i < c.regions.size(); ++i) {
            minors_of[static_cast<std::size_t>(major_of[i])].push_back(static_cast<int>(i));
            major_pull[static_cast<std::size_t>(major_of[i])] += c.regions[i].attractiveness;
        }
        region_cdf = cdf_of(c.regions, [](const SynthRegion &r) { return r.population_share; });
        major_cdf = cdf_of(major_pull, [](double v) { return v; });
        for (const auto &members : minors_of) {
            minor_cdf.push_back(
                cdf_of(members, [&c](int i) { return c.regions[static_cast<std::size_t>(i)].attractiveness; }));
        }
        for (int age = c.min_age; age <= c.max_age; ++age) {
            const auto i = static_cast<std::size_t>(age - c.min_age);
            age_cdf.push_back((age_cdf.empty() ? 0.0 : age_cdf.back()) +
                              (c.age_pyramid.empty() ? 1.0 : c.age_pyramid[i]));
            education_cdf.push_back(array_cdf(band_for(c.education, age)->probs));
            reason_cdf.push_back(array_cdf(band_for(c.reasons, age)->probs));
            const double shape = c.schedule.at(age, c.min_age);
            std::array<double, 5> inter{}, intra{};
            for (std::size_t e = 0; e < 5; ++e) {
                inter[e] = c.inter_major_rate * shape * c.education_multiplier[e];
                intra[e] = c.intra_major_rate * shape * c.education_multiplier[e];
            }
            p_inter.push_back(inter);
            p_intra.push_back(intra);
        }
        std::vector<double> durations = c.duration_probs;
        if (durations.empty()) {
            durations.assign(static_cast<std::size_t>(c.interval_years) + 1, 1.0);
        }
        duration_cdf = cdf_of(durations, [](double v) { return v; });
        if (c.settlement_mix) {
            mix_cdf = array_cdf(*c.settlement_mix);
        }
    }

    template <typename Range, typename Get>
    static std::vector<double> cdf_of(const Range &items, Get get) {
        std::vector<double> out;
        double sum = 0.0;
        for (const auto &item : items) {
            sum += get(item);
            out.push_back(sum);
        }
        return out;
    }

    template <std::size_t N>
    static std::array<double, N> array_cdf(const std::array<double, N> &p) {
        std::array<double, N> out{};
        double sum = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            sum += p[i];
            out[i] = sum;
        }
        return out;
    }
};

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double normal() {
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Index into a cumulative weight table.
    template <typename Cdf>
    std::size_t pick(const Cdf &cdf) {
        const double target = uniform() * cdf.back();
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
        return std::min(static_cast<std::size_t>(it - cdf.begin()), static_cast<std::size_t>(cdf.size() - 1));
    }

  private:
    std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t block_seed(std::uint64_t seed, std::uint64_t block) {
    return splitmix64(splitmix64(seed) ^ (block * 0xD1B54A32D192ED03ull));
}

struct Draw {
    bool corrupt = false;
    double weight = 1.0;
    int age = 0;
    Sex sex = Sex::M;
    Education education = Education::Unknown;
    double years = std::numeric_limits<double>::quiet_NaN();
    int minor_prev = 0;
    int minor_now = 0;
    bool prev_known = true;
    Urban urban_prev = Urban::Rural;
    Urban urban_now = Urban::Rural;
    Reason reason = Reason::Unknown;
    int duration = -1;
    bool moved = false;
};

Urban draw_urban(Rng &rng, double p) { return rng.uniform() < p ? Urban::Urban : Urban::Rural; }

Draw draw_record(const Model &m, Rng &rng) {
    const SynthConfig &c = *m.config;
    Draw d;
    if (c.corrupt_fraction > 0.0 && rng.uniform() < c.corrupt_fraction) {
        d.corrupt = true;
        return d;
    }
    if (c.weight_max > c.weight_min) {
        d.weight = std::round((c.weight_min + rng.uniform() * (c.weight_max - c.weight_min)) * 1000.0) / 1000.0;
        d.weight = std::max(d.weight, c.weight_min);
    } else {
        d.weight = c.weight_min;
    }
    const auto age_i = rng.pick(m.age_cdf);
    d.age = c.min_age + static_cast<int>(age_i);
    d.sex = rng.uniform() < c.male_share ? Sex::M : Sex::F;
    if (rng.uniform() < c.unknown_education_probability) {
        d.education = Education::Unknown;
    } else {
        d.education = kKnownEducation[rng.pick(m.education_cdf[age_i])];
        const auto e = index_of(d.education);
        const double years = c.schooling_mean[e] + c.schooling_sd[e] * rng.normal();
        d.years = std::max(0.0, std::round(years * 100.0) / 100.0);
    }

    d.minor_prev = static_cast<int>(rng.pick(m.region_cdf));
    d.minor_now = d.minor_prev;
    const auto origin_major = static_cast<std::size_t>(m.major_of[static_cast<std::size_t>(d.minor_prev)]);
    const auto e = index_of(d.education);
    const double u = rng.uniform();
    bool inter = false;
    if (u < m.p_inter[age_i][e]) {
        inter = true;
        std::size_t dest_major = origin_major;
        while (dest_major == origin_major) {
            dest_major = rng.pick(m.major_cdf);
        }
        d.minor_now = m.minors_of[dest_major][rng.pick(m.minor_cdf[dest_major])];
    } else if (u < m.p_inter[age_i][e] + m.p_intra[age_i][e] && m.minors_of[origin_major].size() > 1) {
        int dest = d.minor_prev;
        while (dest == d.minor_prev) {
            dest = m.minors_of[origin_major][rng.pick(m.minor_cdf[origin_major])];
        }
        d.minor_now = dest;
    }
    d.moved = d.minor_now != d.minor_prev;

    const auto &prev_region = c.regions[static_cast<std::size_t>(d.minor_prev)];
    const auto &now_region = c.regions[static_cast<std::size_t>(d.minor_now)];
    if (inter && m.mix_cdf) {
        const auto flow = kKnownFlows[rng.pick(*m.mix_cdf)];
        d.urban_prev = (flow == SettlementFlow::UR || flow == SettlementFlow::UU) ? Urban::Urban : Urban::Rural;
        d.urban_now = (flow == SettlementFlow::RU || flow == SettlementFlow::UU) ? Urban::Urban : Urban::Rural;
    } else {
        d.urban_prev = draw_urban(rng, prev_region.urban_probability);
        d.urban_now = d.moved ? draw_urban(rng, now_region.urban_probability) : d.urban_prev;
    }
    if (d.moved) {
        d.reason = rng.uniform() < c.unknown_reason_probability ? Reason::Unknown
                                                                 : kKnownReasons[rng.pick(m.reason_cdf[age_i])];
        d.duration = static_cast<int>(rng.pick(m.duration_cdf));
        if (c.duration_top_code) {
            d.duration = std::min(d.duration, *c.duration_top_code);
        }
    }
    if (c.unknown_prev_probability > 0.0 && rng.uniform() < c.unknown_prev_probability) {
        d.prev_known = false;
    }
    return d;
}

void tally(const Model &m, const Draw &d, SynthLedger &ledger) {
    ++ledger.records;
    if (d.corrupt) {
        ++ledger.corrupt;
        return;
    }
    if (!d.prev_known) {
        ++ledger.unknown_prev;
        return;
    }
    const auto prev = static_cast<std::size_t>(d.minor_prev);
    const auto now = static_cast<std::size_t>(d.minor_now);
    const auto major_prev = static_cast<std::size_t>(m.major_of[prev]);
    const auto major_now = static_cast<std::size_t>(m.major_of[now]);
    const bool major_move = major_prev != major_now;
    const bool minor_move = prev != now;
    auto add = [&](SynthLedger::Cell &cell) {
        cell.par += d.weight;
        cell.major_migrants += major_move ? d.weight : 0.0;
        cell.minor_migrants += minor_move ? d.weight : 0.0;
    };
    add(ledger.total);
    if (d.age >= 15) {
        add(ledger.by_education_15plus[index_of(d.education)]);
    }
    add(ledger.by_age[static_cast<std::size_t>(d.age - m.config->min_age)]);
    ledger.major_regions[major_now].par += d.weight;
    if (major_move) {
        ledger.major_by_reason[index_of(d.reason)] += d.weight;
        const auto flow = d.urban_prev == Urban::Rural ? (d.urban_now == Urban::Rural ? SettlementFlow::RR
                                                                                      : SettlementFlow::RU)
                                                       : (d.urban_now == Urban::Rural ? SettlementFlow::UR
                                                                                      : SettlementFlow::UU);
        ledger.major_by_flow[index_of(flow)] += d.weight;
        ledger.major_regions[major_now].inflow += d.weight;
        ledger.major_regions[major_prev].outflow += d.weight;
    }
    if (!m.config->major_only) {
        ledger.minor_regions[now].par += d.weight;
        if (minor_move) {
            ledger.minor_regions[now].inflow += d.weight;
            ledger.minor_regions[prev].outflow += d.weight;
        }
    }
}

SynthLedger empty_ledger(const Model &m) {
    SynthLedger ledger;
    ledger.records = 0;
    ledger.seed = m.config->seed;
    ledger.by_age.resize(static_cast<std::size_t>(m.config->max_age - m.config->min_age + 1));
    ledger.major_regions.resize(m.major_count);
    if (!m.config->major_only) {
        ledger.minor_regions.resize(m.config->regions.size());
    }
    return ledger;
}

char urban_code(Urban u) { return u == Urban::Urban ? 'U' : 'R'; }

void append_row(const Model &m, const Draw &d, std::string &out) {
    const SynthConfig &c = *m.config;
    if (d.corrupt) {
        // Invalid age; every other column keeps the expected shape.
        const auto &r = c.regions.front();
        out += "1,x,M,0,,";
        if (!c.major_only) {
            out += r.minor_id + ',';
        }
        out += r.major_id + ',';
        if (!c.major_only) {
            out += r.minor_id + ',';
        }
        out += r.major_id + ",,,,\n";
        return;
    }
    const auto &now = c.regions[static_cast<std::size_t>(d.minor_now)];
    const auto &prev = c.regions[static_cast<std::size_t>(d.minor_prev)];
    text::append_double(out, d.weight);
    out += ',';
    text::append_int(out, d.age);
    out += ',';
    out += d.sex == Sex::M ? 'M' : 'F';
    out += ',';
    if (d.education == Education::Unknown) {
        out += "9,";
    } else {
        text::append_int(out, static_cast<long long>(index_of(d.education)));
        out += ',';
        text::append_double(out, d.years);
    }
    out += ',';
    if (!c.major_only) {
        out += now.minor_id;
        out += ',';
    }
    out += now.major_id;
    out += ',';
    if (!c.major_only) {
        if (d.prev_known) {
            out += prev.minor_id;
        }
        out += ',';
    }
    if (d.prev_known) {
        out += prev.major_id;
    }
    out += ',';
    out += urban_code(d.urban_now);
    out += ',';
    if (d.prev_known) {
        out += urban_code(d.urban_prev);
    }
    out += ',';
    if (d.duration >= 0) {
        text::append_int(out, d.duration);
    }
    out += ',';
    if (d.reason != Reason::Unknown) {
        text::append_int(out, static_cast<long long>(index_of(d.reason)) + 1);
    }
    out += '\n';
}

/// Resolves a draw into hierarchy indices: majors in order of first
/// appearance, minors in config order.
PersonRecord to_record(const Model &m, const Draw &d) {
    PersonRecord r;
    r.weight = d.weight;
    r.age = d.age;
    r.sex = d.sex;
    r.education = d.education;
    r.years_schooling = d.years;
    r.major_now = m.major_of[static_cast<std::size_t>(d.minor_now)];
    if (!m.config->major_only) {
        r.minor_now = d.minor_now;
    }
    if (d.prev_known) {
        r.major_prev = m.major_of[static_cast<std::size_t>(d.minor_prev)];
        if (!m.config->major_only) {
            r.minor_prev = d.minor_prev;
        }
        r.urban_prev = d.urban_prev;
    }
    r.urban_now = d.urban_now;
    r.duration_years = d.duration;
    r.duration_top_coded = d.duration >= 0 && m.config->duration_top_code && d.duration == *m.config->duration_top_code;
    r.reason = d.reason;
    return r;
}

/// Runs `per_record(rng, ledger, output)` for every record, block by block, with `par.workers`
/// threads and hands finished blocks to `emit` strictly in block order.
template <typename Output, typename PerRecord, typename Emit>
SynthLedger run_blocks(const Model &m, Parallelism par, PerRecord per_record, Emit emit) {
    const SynthConfig &c = *m.config;
    const std::uint64_t blocks = (c.records + kSynthBlockSize - 1) / kSynthBlockSize;
    const std::size_t workers = std::max(1u, par.workers);
    const std::uint64_t batch = workers * 8;
    SynthLedger total = empty_ledger(m);
    total.seed = c.seed;
    for (std::uint64_t first = 0; first < blocks; first += batch) {
        const std::uint64_t count = std::min(batch, blocks - first);
        std::vector<Output> outputs(count);
        std::vector<SynthLedger> ledgers(count, empty_ledger(m));
        auto work = [&](std::size_t w) {
            for (std::uint64_t i = w; i < count; i += workers) {
                const std::uint64_t block = first + i;
                Rng rng(block_seed(c.seed, block));
                const std::uint64_t begin = block * kSynthBlockSize;
                const std::uint64_t end = std::min(c.records, begin + kSynthBlockSize);
                for (std::uint64_t r = begin; r < end; ++r) {
                    per_record(rng, ledgers[i], outputs[i]);
                }
            }
        };
        if (workers == 1) {
            work(0);
        } else {
            std::vector<std::jthread> threads;
            for (std::size_t w = 0; w < workers; ++w) {
                threads.emplace_back(work, w);
            }
        }
        for (std::uint64_t i = 0; i < count; ++i) {
            total.merge(ledgers[i]);
            emit(std::move(outputs[i]));
        }
    }
    return total;
}

} // namespace

RegionHierarchy synth_hierarchy(const SynthConfig &config) {
    const double population = config.total_population.value_or(static_cast<double>(config.records));
    RegionHierarchy h;
    for (const auto &r : config.regions) {
        if (!h.find(Scale::Major, r.major_id)) {
            h.add_major(r.major_id);
        }
    }
    if (config.major_only) {
        std::vector<double> area(h.count(Scale::Major), 0.0), people(h.count(Scale::Major), 0.0);
        for (const auto &r : config.regions) {
            const auto i = static_cast<std::size_t>(*h.find(Scale::Major, r.major_id));
            area[i] += r.area_km2;
            people[i] += r.population_share * population;
        }
        RegionHierarchy flat;
        for (std::size_t i = 0; i < area.size(); ++i) {
            flat.add_major(h.region(Scale::Major, static_cast<RegionIndex>(i)).id, area[i], people[i]);
        }
        flat.finalize();
        return flat;
    }
    for (const auto &r : config.regions) {
        h.add_minor(r.minor_id, r.major_id, r.area_km2, r.population_share * population,
                    r.urban_probability >= 0.5 ? Urban::Urban : Urban::Rural);
    }
    h.finalize();
    return h;
}

Schema synth_schema(const SynthConfig &config) {
    Schema s;
    s.interval_years = config.interval_years;
    s.duration_top_code = config.duration_top_code;
    s.bind(Field::Weight, "weight");
    s.bind(Field::Age, "age");
    s.bind(Field::Sex, "sex");
    s.bind(Field::EducationLevel, "educ");
    s.bind(Field::YearsSchooling, "yrs_school");
    if (!config.major_only) {
        s.bind(Field::RegionMinorNow, "minor_now");
        s.bind(Field::RegionMinorPrev, "minor_prev");
    }
    s.bind(Field::RegionMajorNow, "major_now");
    s.bind(Field::RegionMajorPrev, "major_prev");
    s.bind(Field::UrbanNow, "urban_now");
    s.bind(Field::UrbanPrev, "urban_prev");
    s.bind(Field::DurationYears, "duration");
    s.bind(Field::Reason, "reason");
    s.sex_codes = CodeMap<Sex>({{"M", Sex::M}, {"F", Sex::F}});
    s.education_codes = CodeMap<Education>({{"0", Education::LtPrimary},
                                            {"1", Education::Primary},
                                            {"2", Education::Secondary},
                                            {"3", Education::Tertiary},
                                            {"9", Education::Unknown}});
    s.urban_codes = CodeMap<Urban>({{"U", Urban::Urban}, {"R", Urban::Rural}});
    s.reason_codes = CodeMap<Reason>({{"1", Reason::Employment},
                                      {"2", Reason::Education},
                                      {"3", Reason::Family},
                                      {"4", Reason::Marriage},
                                      {"5", Reason::Other}});
    return s;
}

namespace {

std::string header_line(const SynthConfig &config) {
    return config.major_only
               ? "weight,age,sex,educ,yrs_school,major_now,major_prev,urban_now,urban_prev,duration,reason\n"
               : "weight,age,sex,educ,yrs_school,minor_now,major_now,minor_prev,major_prev,urban_now,urban_prev,"
                 "duration,reason\n";
}

} // namespace

SynthOutput generate_records(const SynthConfig &config, Parallelism par) {
    config.validate();
    const Model model(config);
    SynthOutput out;
    out.hierarchy = synth_hierarchy(config);
    out.records.reserve(static_cast<std::size_t>(config.records));
    out.ledger = run_blocks<std::vector<PersonRecord>>(
        model, par,
        [&model](Rng &rng, SynthLedger &ledger, std::vector<PersonRecord> &records) {
            const Draw d = draw_record(model, rng);
            tally(model, d, ledger);
            if (!d.corrupt) {
                records.push_back(to_record(model, d));
            }
        },
        [&out](std::vector<PersonRecord> &&block) {
            out.records.insert(out.records.end(), block.begin(), block.end());
        });
    return out;
}

SynthLedger generate_files(const SynthConfig &config, const std::filesystem::path &dir, Parallelism par) {
    config.validate();
    const Model model(config);
    std::filesystem::create_directories(dir);
    auto open = [&dir](const char *name) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) {
            throw ValidationError("cannot write " + (dir / name).string());
        }
        return f;
    };
    {
        auto f = open("hierarchy.csv");
        synth_hierarchy(config).write_csv(f);
    }
    {
        auto f = open("schema.json");
        f << schema_to_json(synth_schema(config)) << '\n';
    }
    auto data = open("microdata.csv");
    data << header_line(config);
    const SynthLedger ledger = run_blocks<std::string>(
        model, par,
        [&model](Rng &rng, SynthLedger &l, std::string &text) {
            const Draw d = draw_record(model, rng);
            tally(model, d, l);
            append_row(model, d, text);
        },
        [&data](std::string &&text) { data.write(text.data(), static_cast<std::streamsize>(text.size())); });
    if (!data) {
        throw ValidationError("failed writing microdata.csv");
    }
    auto f = open("ledger.json");
    f << ledger.to_json() << '\n';
    return ledger;
}

} // namespace migedu
