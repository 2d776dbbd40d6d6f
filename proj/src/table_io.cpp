#include "migedu/table_io.hpp"

#include "text.hpp"

#include <json.hpp>

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace migedu {

void Table::add_row(std::vector<Cell> row) {
    if (row.size() != columns.size()) {
        throw std::logic_error("table " + name + ": row width does not match the header");
    }
    rows.push_back(std::move(row));
}

namespace {

std::string csv_escape(const std::string &s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    return out + '"';
}

std::string csv_cell(const Cell &cell) {
    struct Visitor {
        std::string operator()(std::monostate) const { return {}; }
        std::string operator()(double v) const {
            if (std::isinf(v)) {
                return v > 0 ? "inf" : "-inf";
            }
            return std::isnan(v) ? std::string() : text::format_double(v);
        }
        std::string operator()(long long v) const { return std::to_string(v); }
        std::string operator()(const std::string &v) const { return csv_escape(v); }
        std::string operator()(bool v) const { return v ? "true" : "false"; }
    };
    return std::visit(Visitor{}, cell);
}

nlohmann::json json_cell(const Cell &cell) {
    struct Visitor {
        nlohmann::json operator()(std::monostate) const { return nullptr; }
        nlohmann::json operator()(double v) const {
            return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
        }
        nlohmann::json operator()(long long v) const { return v; }
        nlohmann::json operator()(const std::string &v) const { return v; }
        nlohmann::json operator()(bool v) const { return v; }
    };
    return std::visit(Visitor{}, cell);
}

} // namespace

void write_csv(const Table &table, std::ostream &out) {
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        out << (i ? "," : "") << csv_escape(table.columns[i]);
    }
    out << '\n';
    for (const auto &row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << (i ? "," : "") << csv_cell(row[i]);
        }
        out << '\n';
    }
}

void write_json(const Table &table, std::ostream &out) {
    nlohmann::ordered_json doc;
    doc["table"] = table.name;
    auto meta = nlohmann::ordered_json::object();
    for (const auto &[key, value] : table.meta) {
        meta[key] = json_cell(value);
    }
    doc["meta"] = meta;
    doc["columns"] = table.columns;
    auto rows = nlohmann::ordered_json::array();
    for (const auto &row : table.rows) {
        auto obj = nlohmann::ordered_json::object();
        for (std::size_t i = 0; i < row.size(); ++i) {
            obj[table.columns[i]] = json_cell(row[i]);
        }
        rows.push_back(std::move(obj));
    }
    doc["rows"] = std::move(rows);
    out << doc.dump(2) << '\n';
}

void write_table(const Table &table, Format format, std::ostream &out) {
    if (format == Format::Json) {
        write_json(table, out);
    } else {
        write_csv(table, out);
    }
}

} // namespace migedu
