#pragma once

#include "migedu/accumulate.hpp"
#include "migedu/error.hpp"
#include "migedu/hierarchy.hpp"
#include "migedu/record.hpp"
#include "migedu/schema.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace migedu {

struct IngestOptions {
    /// Ignore the weight column and count every record once (unweighted sample counts).
    bool unweighted = false;
};

/// Row accounting for one ingestion run. Merging is commutative and
/// associative, so the merged report does not depend on partitioning.
struct IngestReport {
    std::uint64_t rows_read = 0;
    std::uint64_t accepted = 0;
    std::uint64_t rejected = 0;
    std::map<std::string, std::uint64_t> rejects_by_reason;

    void reject(std::string_view reason);
    void merge(const IngestReport &other);
    [[nodiscard]] std::string to_json() const;

    friend bool operator==(const IngestReport &, const IngestReport &) = default;
};

/// Converts delimited rows into PersonRecords under a schema.
/// Keeps a scratch buffer, so use one parser per thread.
class RowParser {
  public:
    RowParser(const Schema &schema, const RegionHierarchy &hierarchy, std::string_view header_line,
              IngestOptions options = {});

    /// Returns true and fills `out` for a valid row; otherwise records the
    /// rejection reason in `report`. Blank lines are skipped without counting.
    bool parse(std::string_view line, PersonRecord &out, IngestReport &report);

    [[nodiscard]] FieldSet fields() const { return fields_; }

  private:
    bool split(std::string_view line);
    [[nodiscard]] std::string_view value(Field field) const;
    const char *parse_fields(PersonRecord &out);

    const Schema *schema_;
    const RegionHierarchy *hierarchy_;
    IngestOptions options_;
    FieldSet fields_;
    std::array<int, kFieldCount> index_{};
    std::size_t column_count_ = 0;
    std::vector<std::string_view> cells_;
    std::vector<std::string> unquoted_;
};

/// Pull-style streaming reader over a delimited text stream.
class RecordReader {
  public:
    RecordReader(std::istream &in, const Schema &schema, const RegionHierarchy &hierarchy,
                 IngestOptions options = {});

    bool next(PersonRecord &out);
    [[nodiscard]] const IngestReport &report() const { return report_; }
    [[nodiscard]] FieldSet fields() const { return parser_.fields(); }

  private:
    static std::string read_header(std::istream &in);

    std::istream *in_;
    std::string line_;
    RowParser parser_;
    IngestReport report_;
};

struct IngestResult {
    std::vector<PersonRecord> records;
    IngestReport report;
    FieldSet fields;
};

IngestResult read_records(std::istream &in, const Schema &schema, const RegionHierarchy &hierarchy,
                          IngestOptions options = {});
IngestResult read_records(const std::filesystem::path &path, const Schema &schema,
                          const RegionHierarchy &hierarchy, IngestOptions options = {});

template <typename Acc>
struct ScanResult {
    Acc accumulator;
    IngestReport report;
    FieldSet fields;
};

namespace detail {

/// Reads the file in fixed-size blocks cut at line boundaries and hands each
/// block to `on_block`; memory use is bounded by the block size.
void for_each_block(std::istream &in, std::size_t block_bytes,
                    const std::function<void(std::string_view block)> &on_block);

std::string read_header_line(std::istream &in);

/// Cuts `block` into `parts` ranges that end on line boundaries.
std::vector<std::string_view> split_lines_evenly(std::string_view block, std::size_t parts);

} // namespace detail

/// Streams a microdata file through per-worker accumulators without holding
/// the records in memory. `make()` must return an accumulator with
/// `add(const PersonRecord&)` and `merge(const Acc&)`. Partials are merged in
/// worker order, so results are deterministic for a given worker count.
template <typename MakeAcc>
auto scan_stream(std::istream &in, const Schema &schema, const RegionHierarchy &hierarchy,
                 IngestOptions options, Parallelism par, MakeAcc make,
                 std::size_t block_bytes = std::size_t{16} << 20) {
    using Acc = decltype(make());
    const std::string header = detail::read_header_line(in);
    const std::size_t workers = std::max(1u, par.workers);

    std::vector<RowParser> parsers;
    std::vector<Acc> partials;
    std::vector<IngestReport> reports(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        parsers.emplace_back(schema, hierarchy, header, options);
        partials.push_back(make());
    }

    auto consume = [&](std::size_t w, std::string_view range) {
        PersonRecord record;
        std::size_t pos = 0;
        while (pos < range.size()) {
            std::size_t end = range.find('\n', pos);
            if (end == std::string_view::npos) {
                end = range.size();
            }
            if (parsers[w].parse(range.substr(pos, end - pos), record, reports[w])) {
                partials[w].add(record);
            }
            pos = end + 1;
        }
    };

    detail::for_each_block(in, block_bytes, [&](std::string_view block) {
        if (workers == 1) {
            consume(0, block);
            return;
        }
        const auto ranges = detail::split_lines_evenly(block, workers);
        std::vector<std::jthread> threads;
        threads.reserve(workers);
        for (std::size_t w = 0; w < ranges.size(); ++w) {
            threads.emplace_back([&consume, w, range = ranges[w]] { consume(w, range); });
        }
    });

    ScanResult<Acc> result{std::move(partials.front()), std::move(reports.front()), parsers.front().fields()};
    for (std::size_t w = 1; w < workers; ++w) {
        result.accumulator.merge(partials[w]);
        result.report.merge(reports[w]);
    }
    return result;
}

template <typename MakeAcc>
auto scan_file(const std::filesystem::path &path, const Schema &schema, const RegionHierarchy &hierarchy,
               IngestOptions options, Parallelism par, MakeAcc make) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot open microdata file " + path.string());
    }
    return scan_stream(in, schema, hierarchy, options, par, std::move(make));
}

} // namespace migedu
