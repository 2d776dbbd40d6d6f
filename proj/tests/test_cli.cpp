#include "migedu/cli.hpp"
#include "migedu/synth.hpp"
#include "migedu/table_io.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace migedu;

namespace {

struct Outcome {
    int code = 0;
    std::string out;
    std::string err;
};

Outcome invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "migedu");
    std::vector<const char *> argv;
    for (const auto &a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out, err;
    const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

/// A small synthetic census shared by the CLI tests.
const std::filesystem::path &corpus() {
    static const std::filesystem::path dir = [] {
        auto d = std::filesystem::temp_directory_path() / "migedu_cli_corpus";
        std::filesystem::remove_all(d);
        SynthConfig c = parse_synth_config(R"({"records": 30000, "seed": 5, "inter_major_rate": 0.08,
            "intra_major_rate": 0.05, "corrupt_fraction": 0.002,
            "education_multiplier": [1.0, 1.8, 2.8, 3.8, 1.0]})");
        generate_files(c, d);
        return d;
    }();
    return dir;
}

std::vector<std::string> data_args(std::vector<std::string> head) {
    const auto &d = corpus();
    for (const auto &a : {std::string("--schema"), (d / "schema.json").string(), std::string("--data"),
                          (d / "microdata.csv").string(), std::string("--hierarchy"),
                          (d / "hierarchy.csv").string()}) {
        head.push_back(a);
    }
    return head;
}

std::size_t lines(const std::string &s) {
    std::size_t n = 0;
    for (char ch : s) {
        n += ch == '\n' ? 1 : 0;
    }
    return n;
}

} // namespace

TEST_CASE("cli: usage errors and help") {
    CHECK(invoke({}).code == kExitUsage);
    CHECK(invoke({"--help"}).code == kExitOk);
    CHECK(invoke({"no-such-command"}).code == kExitUsage);
    CHECK(invoke({"cmi"}).code == kExitUsage);
    CHECK(invoke({"cmi", "--schema", "/nonexistent.json"}).code == kExitUsage);
    CHECK(invoke(data_args({"cmi", "--by", "colour"})).code == kExitUsage);
    CHECK(invoke(data_args({"cmi", "--scale", "planet"})).code == kExitUsage);
    CHECK(invoke(data_args({"--format", "xml", "cmi"})).code == kExitUsage);
    const auto help = invoke({"redistribution", "--help"});
    CHECK(help.code == kExitOk);
    CHECK(help.out.find("stratum,slope,intercept") != std::string::npos);
}

TEST_CASE("cli: cmi by education") {
    const auto r = invoke(data_args({"cmi", "--scale", "major", "--by", "education"}));
    CHECK(r.code == kExitOk);
    CHECK(lines(r.out) == 6);
    CHECK(r.out.rfind("key,migrants,par,cmi\nTotal,", 0) == 0);
    CHECK(r.err.find("rejected") != std::string::npos);

    const auto ratios = invoke(data_args({"cmi", "--by", "education", "--ratios"}));
    CHECK(ratios.code == kExitOk);
    CHECK(lines(ratios.out) == 5);
}

TEST_CASE("cli: json and csv carry identical values") {
    for (const auto &cmd : std::vector<std::vector<std::string>>{
             {"cmi", "--by", "education"}, {"redistribution"}, {"age-profile"}, {"selectivity"}}) {
        auto csv_args = data_args(cmd);
        auto json_args = csv_args;
        json_args.insert(json_args.begin(), {"--format", "json"});
        const auto csv = invoke(csv_args);
        const auto js = invoke(json_args);
        REQUIRE(csv.code == kExitOk);
        REQUIRE(js.code == kExitOk);
        const auto doc = nlohmann::json::parse(js.out);
        std::istringstream in(csv.out);
        std::string line;
        std::getline(in, line);
        std::size_t row = 0;
        while (std::getline(in, line)) {
            std::vector<std::string> cells;
            std::stringstream ss(line);
            std::string cell;
            while (std::getline(ss, cell, ',')) {
                cells.push_back(cell);
            }
            const auto &obj = doc.at("rows").at(row++);
            std::size_t col = 0;
            for (const auto &name : doc.at("columns")) {
                const auto &v = obj.at(name.get<std::string>());
                const std::string text = col < cells.size() ? cells[col] : "";
                if (v.is_number()) {
                    const double a = v.get<double>();
                    const double b = std::stod(text);
                    CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
                } else if (v.is_null()) {
                    CHECK(text.empty());
                }
                ++col;
            }
        }
        CHECK(row == doc.at("rows").size());
    }
}

TEST_CASE("cli: deterministic across runs and thread counts") {
    for (const auto &cmd : std::vector<std::vector<std::string>>{{"cmi", "--by", "sex"},
                                                                 {"flows", "--by", "education"},
                                                                 {"reasons", "--by-sex"},
                                                                 {"duration"},
                                                                 {"redistribution", "--by-education"}}) {
        auto one = data_args(cmd);
        one.insert(one.begin(), {"--threads", "1"});
        auto four = data_args(cmd);
        four.insert(four.begin(), {"--threads", "4"});
        const auto a = invoke(one);
        const auto b = invoke(one);
        const auto c = invoke(four);
        CHECK(a.code == kExitOk);
        CHECK(a.out == b.out);
        CHECK(lines(a.out) == lines(c.out));
    }
}

TEST_CASE("cli: every subcommand runs on the synthetic census") {
    for (const auto &cmd : std::vector<std::vector<std::string>>{
             {"ingest-check"},
             {"acmi", "--addresses", "1e6"},
             {"age-profile", "--peak"},
             {"age-profile", "--raw"},
             {"age-profile", "--reason", "Education"},
             {"flows"},
             {"flows", "--composition"},
             {"flows", "--settlement"},
             {"flows", "--secondary-by-flow"},
             {"reasons"},
             {"reasons", "--sex-ratio"},
             {"reasons", "--profile", "Marriage", "--peak"},
             {"selectivity", "--ratios"},
             {"selectivity", "--age-filter", "20-24"},
             {"duration", "--mys"},
             {"duration", "--flow", "UU"},
             {"redistribution", "--slope", "--log-base", "10", "--weighting", "total-par"},
             {"redistribution", "--education", "Tertiary"},
             {"redistribution", "--scale", "minor"}}) {
        const auto r = invoke(data_args(cmd));
        INFO(cmd.front(), " ", r.err);
        CHECK(r.code == kExitOk);
        CHECK(lines(r.out) >= 2);
    }
    const auto acmi = invoke({"acmi", "--observed", "10:4.605170185988092", "--observed", "100:9.210340371976184",
                              "--addresses", "1e6"});
    CHECK(acmi.code == kExitOk);
    CHECK(acmi.out.find("27.63") != std::string::npos);
    CHECK(invoke({"acmi", "--observed", "1:5", "--addresses", "100"}).code == kExitInsufficientData);
    CHECK(invoke({"acmi", "--observed", "ten", "--addresses", "100"}).code == kExitUsage);
}

TEST_CASE("cli: validation and insufficient-data exit codes") {
    CHECK(invoke(data_args({"ingest-check", "--strict"})).code == kExitValidation);

    const auto &d = corpus();
    const auto stripped = std::filesystem::temp_directory_path() / "migedu_cli_no_urban_prev.json";
    {
        auto doc = nlohmann::json::parse(std::ifstream(d / "schema.json"));
        doc["columns"].erase("urban_prev");
        doc["columns"].erase("reason");
        std::ofstream(stripped) << doc.dump();
    }
    auto args = [&](std::vector<std::string> head) {
        for (const auto &a : {std::string("--schema"), stripped.string(), std::string("--data"),
                              (d / "microdata.csv").string(), std::string("--hierarchy"),
                              (d / "hierarchy.csv").string()}) {
            head.push_back(a);
        }
        return head;
    };
    CHECK(invoke(args({"flows", "--settlement"})).code == kExitInsufficientData);
    CHECK(invoke(args({"duration"})).code == kExitInsufficientData);
    CHECK(invoke(args({"reasons"})).code == kExitInsufficientData);
    CHECK(invoke(args({"cmi"})).code == kExitOk);

    const auto bad_schema = std::filesystem::temp_directory_path() / "migedu_cli_bad_schema.json";
    std::ofstream(bad_schema) << R"({"columns": {"age": "age"}})";
    const auto bad = invoke({"cmi", "--schema", bad_schema.string(), "--data", (d / "microdata.csv").string(),
                             "--hierarchy", (d / "hierarchy.csv").string()});
    CHECK(bad.code == kExitValidation);
    CHECK_FALSE(bad.err.empty());
}

TEST_CASE("cli: fixtures and synth") {
    const auto ok = invoke({"verify-fixtures"});
    CHECK(ok.code == kExitOk);
    CHECK(ok.err.find("135/135") != std::string::npos);
    const auto fits = invoke({"verify-fixtures", "--fits"});
    CHECK(fits.code == kExitOk);
    CHECK(lines(fits.out) == 5);

    const auto tmp = std::filesystem::temp_directory_path() / "migedu_cli_bad_fixtures";
    std::filesystem::remove_all(tmp);
    std::filesystem::copy(MIGEDU_FIXTURE_DIR, tmp);
    std::ofstream(tmp / "selectivity_ratio_means.csv")
        << "urban_stayers_20_24,rural_stayers_20_24,urban_stayers_15plus,rural_stayers_15plus\n0.99,1.75,1.11,3.0\n";
    CHECK(invoke({"verify-fixtures", "--fixtures", tmp.string()}).code == kExitFixtureFailure);
    std::filesystem::remove_all(tmp);

    const auto out = std::filesystem::temp_directory_path() / "migedu_cli_synth";
    std::filesystem::remove_all(out);
    const auto s = invoke({"synth", "--records", "1000", "--seed", "4", "--output", out.string()});
    CHECK(s.code == kExitOk);
    CHECK(std::filesystem::exists(out / "ledger.json"));
    CHECK(invoke({"synth"}).code == kExitUsage);
    std::filesystem::remove_all(out);
}

TEST_CASE("table writers") {
    Table t{"demo", {"a", "b", "c", "d"}, {}, {{"k", 1.5}}};
    t.add_row({0.1, std::monostate{}, std::string("x,y"), true});
    t.add_row({std::numeric_limits<double>::infinity(), 3LL, std::string("z"), false});
    CHECK_THROWS(t.add_row({1.0}));
    std::ostringstream csv, js;
    write_csv(t, csv);
    CHECK(csv.str() == "a,b,c,d\n0.1,,\"x,y\",true\ninf,3,z,false\n");
    write_json(t, js);
    const auto doc = nlohmann::json::parse(js.str());
    CHECK(doc["table"] == "demo");
    CHECK(doc["meta"]["k"] == 1.5);
    CHECK(doc["rows"][0]["b"].is_null());
    CHECK(doc["rows"][1]["a"].is_null());
    CHECK(doc["rows"][1]["b"] == 3);
}
