#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace migedu {

/// Empty, number, integer, text, or flag.
using Cell = std::variant<std::monostate, double, long long, std::string, bool>;

/// Flat result table shared by the CSV and JSON writers.
struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    /// Run parameters echoed in JSON output only.
    std::vector<std::pair<std::string, Cell>> meta;

    void add_row(std::vector<Cell> row);
};

enum class Format { Csv, Json };

/// Numbers use the shortest text that parses back to the same double;
/// empty cells stay empty; infinities print as inf / -inf.
void write_csv(const Table &table, std::ostream &out);

/// {"table": name, "meta": {...}, "columns": [...], "rows": [{column: value}]}.
/// Empty cells and non-finite numbers become null.
void write_json(const Table &table, std::ostream &out);

void write_table(const Table &table, Format format, std::ostream &out);

} // namespace migedu
