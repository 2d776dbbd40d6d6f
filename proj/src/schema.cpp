#include "migedu/schema.hpp"

#include "migedu/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace migedu {

namespace {

constexpr std::array<std::string_view, kFieldCount> kFieldKeys{
    "weight",           "age",
    "sex",              "education_level",
    "years_schooling",  "region_minor_now",
    "region_major_now", "region_minor_prev",
    "region_major_prev", "urban_now",
    "urban_prev",       "duration_years",
    "reason",
};

template <typename E>
CodeMap<E> canonical_codes() {
    std::vector<std::pair<std::string, E>> entries;
    for (std::size_t i = 0; i < category_count<E>(); ++i) {
        const auto value = static_cast<E>(i);
        entries.emplace_back(std::string(name_of(value)), value);
    }
    return CodeMap<E>(std::move(entries));
}

template <typename E>
CodeMap<E> parse_code_map(const nlohmann::json &node, std::string_view what) {
    if (!node.is_object()) {
        throw ValidationError("codes." + std::string(what) + " must be an object of code -> category");
    }
    std::vector<std::pair<std::string, E>> entries;
    for (auto it = node.begin(); it != node.end(); ++it) {
        const std::string &code = it.key();
        const nlohmann::json &target = it.value();
        if (!target.is_string()) {
            throw ValidationError("codes." + std::string(what) + "." + code + " must name a category");
        }
        const auto category = parse_category<E>(target.get<std::string>());
        if (!category) {
            throw ValidationError("codes." + std::string(what) + "." + code + ": '" + target.get<std::string>() +
                                  "' is not a valid category");
        }
        entries.emplace_back(code, *category);
    }
    return CodeMap<E>(std::move(entries));
}

template <typename E>
nlohmann::json code_map_json(const CodeMap<E> &map) {
    auto node = nlohmann::json::object();
    for (const auto &[code, value] : map.entries()) {
        node[code] = std::string(name_of(value));
    }
    return node;
}

} // namespace

std::string_view field_key(Field field) { return kFieldKeys[static_cast<std::size_t>(field)]; }

std::optional<Field> parse_field_key(std::string_view key) {
    for (std::size_t i = 0; i < kFieldKeys.size(); ++i) {
        if (kFieldKeys[i] == key) {
            return static_cast<Field>(i);
        }
    }
    return std::nullopt;
}

FieldSet Schema::bound_fields() const {
    FieldSet set;
    for (std::size_t i = 0; i < kFieldCount; ++i) {
        if (columns[i]) {
            set.set(static_cast<Field>(i));
        }
    }
    return set;
}

bool Schema::is_missing(std::string_view raw) const {
    return std::any_of(missing_values.begin(), missing_values.end(),
                       [raw](const std::string &m) { return m == raw; });
}

void Schema::validate() const {
    for (auto required : {Field::Age, Field::EducationLevel}) {
        if (!bound(required)) {
            throw ValidationError("missing required binding: " + std::string(field_key(required)));
        }
    }
    if (!bound(Field::RegionMinorNow) && !bound(Field::RegionMajorNow)) {
        throw ValidationError("missing required binding: region_minor_now or region_major_now");
    }
    if (!bound(Field::RegionMinorPrev) && !bound(Field::RegionMajorPrev)) {
        throw ValidationError("missing required binding: region_minor_prev or region_major_prev");
    }
    std::vector<std::string> seen;
    for (const auto &column : columns) {
        if (!column) {
            continue;
        }
        if (std::find(seen.begin(), seen.end(), *column) != seen.end()) {
            throw ValidationError("duplicate column binding: " + *column);
        }
        seen.push_back(*column);
    }
    if (interval_years <= 0) {
        throw ValidationError("interval_years must be positive");
    }
    if (duration_top_code && *duration_top_code < 0) {
        throw ValidationError("duration_top_code must be non-negative");
    }
}

Schema parse_schema(std::string_view json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error &e) {
        throw ValidationError(std::string("malformed schema document: ") + e.what());
    }
    if (!doc.is_object()) {
        throw ValidationError("malformed schema document: top level must be an object");
    }

    Schema schema;
    schema.sex_codes = canonical_codes<Sex>();
    schema.education_codes = canonical_codes<Education>();
    schema.urban_codes = canonical_codes<Urban>();
    schema.reason_codes = canonical_codes<Reason>();

    try {
        if (doc.contains("delimiter")) {
            const auto delim = doc.at("delimiter").get<std::string>();
            if (delim == "\\t" || delim == "tab") {
                schema.delimiter = '\t';
            } else if (delim.size() == 1) {
                schema.delimiter = delim.front();
            } else {
                throw ValidationError("delimiter must be a single character");
            }
        }
        if (doc.contains("interval_years")) {
            schema.interval_years = doc.at("interval_years").get<int>();
        }
        if (doc.contains("missing_values")) {
            schema.missing_values = doc.at("missing_values").get<std::vector<std::string>>();
        }
        if (doc.contains("duration_top_code") && !doc.at("duration_top_code").is_null()) {
            schema.duration_top_code = doc.at("duration_top_code").get<int>();
        }

        if (!doc.contains("columns") || !doc.at("columns").is_object()) {
            throw ValidationError("malformed schema document: 'columns' object required");
        }
        for (const auto &[key, column] : doc.at("columns").items()) {
            const auto field = parse_field_key(key);
            if (!field) {
                throw ValidationError("unknown field in columns: " + key);
            }
            if (!column.is_string() || column.get<std::string>().empty()) {
                throw ValidationError("column binding for " + key + " must be a non-empty string");
            }
            schema.bind(*field, column.get<std::string>());
        }

        if (doc.contains("codes")) {
            const auto &codes = doc.at("codes");
            if (!codes.is_object()) {
                throw ValidationError("malformed schema document: 'codes' must be an object");
            }
            for (const auto &[key, node] : codes.items()) {
                if (key == "sex") {
                    schema.sex_codes = parse_code_map<Sex>(node, key);
                } else if (key == "education_level") {
                    schema.education_codes = parse_code_map<Education>(node, key);
                } else if (key == "urban") {
                    schema.urban_codes = parse_code_map<Urban>(node, key);
                } else if (key == "reason") {
                    schema.reason_codes = parse_code_map<Reason>(node, key);
                } else {
                    throw ValidationError("unknown code map: " + key);
                }
            }
        }
    } catch (const nlohmann::json::exception &e) {
        throw ValidationError(std::string("malformed schema document: ") + e.what());
    }

    schema.validate();
    return schema;
}

Schema load_schema(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot read schema file " + path.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_schema(buffer.str());
}

std::string schema_to_json(const Schema &schema) {
    nlohmann::json doc;
    doc["delimiter"] = schema.delimiter == '\t' ? std::string("\\t") : std::string(1, schema.delimiter);
    doc["interval_years"] = schema.interval_years;
    doc["missing_values"] = schema.missing_values;
    if (schema.duration_top_code) {
        doc["duration_top_code"] = *schema.duration_top_code;
    }
    auto columns = nlohmann::json::object();
    for (std::size_t i = 0; i < kFieldCount; ++i) {
        if (schema.columns[i]) {
            columns[std::string(kFieldKeys[i])] = *schema.columns[i];
        }
    }
    doc["columns"] = columns;
    doc["codes"] = {
        {"sex", code_map_json(schema.sex_codes)},
        {"education_level", code_map_json(schema.education_codes)},
        {"urban", code_map_json(schema.urban_codes)},
        {"reason", code_map_json(schema.reason_codes)},
    };
    return doc.dump(2);
}

} // namespace migedu
