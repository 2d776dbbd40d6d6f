#include "migedu/classify.hpp"
#include "migedu/error.hpp"
#include "migedu/flows.hpp"
#include "migedu/ingest.hpp"
#include "migedu/intensity.hpp"
#include "migedu/redistribution.hpp"
#include "migedu/synth.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace migedu;

namespace {

std::string slurp(const std::filesystem::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::filesystem::path scratch(const std::string &name) {
    auto dir = std::filesystem::temp_directory_path() / ("migedu_test_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

SynthConfig base_config() {
    SynthConfig c = parse_synth_config(R"({"records": 20000, "seed": 99,
        "inter_major_rate": 0.06, "intra_major_rate": 0.04,
        "unknown_education_probability": 0.05, "unknown_reason_probability": 0.1,
        "unknown_prev_probability": 0.02, "weight_min": 0.5, "weight_max": 3.0,
        "schedule": {"floor": 0.4, "labour_level": 1.0, "labour_peak": 24, "labour_sd": 4}})");
    return c;
}

} // namespace

TEST_CASE("synth: zero move probability") {
    SynthConfig c = parse_synth_config(R"({"records": 5000, "inter_major_rate": 0, "intra_major_rate": 0})");
    const auto out = generate_records(c);
    CHECK(out.records.size() == 5000);
    CHECK(out.ledger.total.major_migrants == 0.0);
    CHECK(out.ledger.total.minor_migrants == 0.0);
    CHECK(cmi(out.records, {}).value == 0.0);
    CHECK(cmi(out.records, {Scale::Minor, ParMode::ExcludeUnknownPrev}).value == 0.0);
}

TEST_CASE("synth: ledger equals enumeration") {
    const SynthConfig c = base_config();
    const auto out = generate_records(c, Parallelism{3});
    const auto &L = out.ledger;
    CHECK(L.algorithm == kSynthAlgorithm);
    CHECK(L.records == 20000);
    CHECK(out.records.size() == L.records - L.corrupt);

    const auto major = cmi(out.records, {Scale::Major, ParMode::ExcludeUnknownPrev});
    CHECK(major.par == doctest::Approx(L.total.par).epsilon(1e-12));
    CHECK(major.migrants == doctest::Approx(L.total.major_migrants).epsilon(1e-12));
    const auto minor = cmi(out.records, {Scale::Minor, ParMode::ExcludeUnknownPrev});
    CHECK(minor.migrants == doctest::Approx(L.total.minor_migrants).epsilon(1e-12));
    CHECK(minor.value >= major.value);

    const auto by_edu = cmi_by_education(out.records, {});
    for (std::size_t e = 0; e < 4; ++e) {
        const auto *row = by_edu.find(name_of(kKnownEducation[e]));
        CHECK(row->par == doctest::Approx(L.by_education_15plus[e].par).epsilon(1e-12));
        CHECK(row->migrants == doctest::Approx(L.by_education_15plus[e].major_migrants).epsilon(1e-12));
    }

    const auto counts = asmi_counts(out.records, {});
    for (std::size_t i = 0; i < counts.par.size(); ++i) {
        CHECK(counts.par[i] == doctest::Approx(L.by_age[i].par).epsilon(1e-12));
        CHECK(counts.migrants[i] == doctest::Approx(L.by_age[i].major_migrants).epsilon(1e-12));
    }

    std::array<double, 6> by_reason{};
    std::array<double, 5> by_flow{};
    for (const auto &r : out.records) {
        if (r.major_prev != kUnknownRegion && r.major_prev != r.major_now) {
            by_reason[index_of(r.reason)] += r.weight;
            by_flow[index_of(classify_settlement_flow(r))] += r.weight;
        }
    }
    for (std::size_t k = 0; k < 6; ++k) {
        CHECK(by_reason[k] == doctest::Approx(L.major_by_reason[k]).epsilon(1e-12));
    }
    for (std::size_t k = 0; k < 5; ++k) {
        CHECK(by_flow[k] == doctest::Approx(L.major_by_flow[k]).epsilon(1e-12));
    }

    const auto nmr = nmr_by_region(out.records, Scale::Major, out.hierarchy);
    double in = 0.0, outflow = 0.0;
    for (std::size_t i = 0; i < nmr.rows.size(); ++i) {
        CHECK(nmr.rows[i].inflow == doctest::Approx(L.major_regions[i].inflow).epsilon(1e-12));
        CHECK(nmr.rows[i].outflow == doctest::Approx(L.major_regions[i].outflow).epsilon(1e-12));
        CHECK(nmr.rows[i].par == doctest::Approx(L.major_regions[i].par).epsilon(1e-12));
        in += L.major_regions[i].inflow;
        outflow += L.major_regions[i].outflow;
    }
    CHECK(in == doctest::Approx(outflow).epsilon(1e-12));
    double min_in = 0.0, min_out = 0.0;
    for (const auto &m : L.minor_regions) {
        min_in += m.inflow;
        min_out += m.outflow;
    }
    CHECK(min_in == doctest::Approx(min_out).epsilon(1e-12));
}

TEST_CASE("synth: settlement mix recovered exactly by enumeration") {
    SynthConfig c = parse_synth_config(R"({"records": 20000, "inter_major_rate": 0.3, "intra_major_rate": 0,
                                           "settlement_mix": [0.40, 0.25, 0.10, 0.25]})");
    const auto out = generate_records(c);
    const auto s = settlement_shares(out.records, Scale::Major, FieldSet::all());
    double known = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
        known += out.ledger.major_by_flow[k];
    }
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(s.percent[k] == doctest::Approx(100.0 * out.ledger.major_by_flow[k] / known).epsilon(1e-12));
    }
    CHECK(std::abs(s.percent[0] - 40.0) < 2.0);
    CHECK(std::abs(s.percent[2] - 10.0) < 2.0);
}

TEST_CASE("synth: planted CMI level") {
    SynthConfig c = parse_synth_config(R"({"records": 1000000, "seed": 2232,
                                           "inter_major_rate": 0.2232, "intra_major_rate": 0})");
    const auto out = generate_records(c, Parallelism{2});
    const auto v = cmi(out.records, {}).value;
    CHECK(std::abs(v - 22.32) <= 0.1);
}

TEST_CASE("synth: files are byte-identical across runs and worker counts") {
    SynthConfig c = base_config();
    c.corrupt_fraction = 0.01;
    const auto a = scratch("a");
    const auto b = scratch("b");
    const auto la = generate_files(c, a, Parallelism{1});
    const auto lb = generate_files(c, b, Parallelism{4});
    for (const char *f : {"microdata.csv", "hierarchy.csv", "schema.json", "ledger.json"}) {
        CHECK(slurp(a / f) == slurp(b / f));
    }
    CHECK(la.corrupt > 0);
    CHECK(la.corrupt == lb.corrupt);

    const auto schema = load_schema(a / "schema.json");
    const auto h = RegionHierarchy::load_csv(a / "hierarchy.csv");
    const auto back = read_records(a / "microdata.csv", schema, h);
    CHECK(back.report.rows_read == c.records);
    CHECK(back.report.rejected == la.corrupt);
    CHECK(back.report.accepted == c.records - la.corrupt);

    const auto mem = generate_records(c);
    REQUIRE(mem.records.size() == back.records.size());
    std::size_t same = 0;
    for (std::size_t i = 0; i < mem.records.size(); ++i) {
        same += mem.records[i] == back.records[i] ? 1 : 0;
    }
    CHECK(same == mem.records.size());

    c.seed += 1;
    const auto other = generate_records(c);
    CHECK_FALSE(other.records[0] == mem.records[0]);
    std::filesystem::remove_all(a);
    std::filesystem::remove_all(b);
}

TEST_CASE("synth: config validation") {
    CHECK_THROWS_AS(parse_synth_config(R"({"education": [{"probs": [0.5, 0.5, 0.5, 0.5]}]})"), ValidationError);
    CHECK_THROWS_AS(parse_synth_config(R"({"inter_major_rate": -0.1})"), ValidationError);
    CHECK_THROWS_AS(parse_synth_config(R"({"inter_major_rate": 0.9, "intra_major_rate": 0.9})"), ValidationError);
    CHECK_THROWS_AS(parse_synth_config(R"({"duration_probs": [1, 1]})"), ValidationError);
    CHECK_THROWS_AS(parse_synth_config(R"({"records": "many"})"), ValidationError);
    CHECK_THROWS_AS(parse_synth_config("not json"), ValidationError);
    const auto grid = parse_synth_config(R"({"regions": {"grid": {"majors": 3, "minors_per_major": 2}}})");
    CHECK(grid.regions.size() == 6);
    CHECK(synth_hierarchy(grid).count(Scale::Major) == 3);
}

TEST_CASE("synth: top-coded durations") {
    SynthConfig c = parse_synth_config(R"({"records": 5000, "inter_major_rate": 0.5, "intra_major_rate": 0,
                                           "duration_top_code": 4})");
    const auto out = generate_records(c);
    bool saw_top = false;
    for (const auto &r : out.records) {
        if (r.has_duration()) {
            CHECK(r.duration_years <= 4);
            saw_top = saw_top || r.duration_top_coded;
        }
    }
    CHECK(saw_top);
    CHECK(synth_schema(c).duration_top_code == 4);
}
