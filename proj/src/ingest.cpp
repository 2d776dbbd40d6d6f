#include "migedu/ingest.hpp"

#include "migedu/error.hpp"
#include "text.hpp"

#include <json.hpp>

#include <cmath>

namespace migedu {

namespace {

constexpr int kMaxAge = 130;

std::string_view strip_line(std::string_view line) {
    if (!line.empty() && line.back() == '\r') {
        line.remove_suffix(1);
    }
    return line;
}

} // namespace

void IngestReport::reject(std::string_view reason) {
    ++rejected;
    ++rejects_by_reason[std::string(reason)];
}

void IngestReport::merge(const IngestReport &other) {
    rows_read += other.rows_read;
    accepted += other.accepted;
    rejected += other.rejected;
    for (const auto &[reason, count] : other.rejects_by_reason) {
        rejects_by_reason[reason] += count;
    }
}

std::string IngestReport::to_json() const {
    nlohmann::json doc;
    doc["rows_read"] = rows_read;
    doc["accepted"] = accepted;
    doc["rejected"] = rejected;
    doc["rejects_by_reason"] = rejects_by_reason;
    return doc.dump(2);
}

RowParser::RowParser(const Schema &schema, const RegionHierarchy &hierarchy, std::string_view header_line,
                     IngestOptions options)
    : schema_(&schema), hierarchy_(&hierarchy), options_(options), fields_(schema.bound_fields()) {
    header_line = strip_line(header_line);
    if (header_line.starts_with("\xEF\xBB\xBF")) {
        header_line.remove_prefix(3);
    }
    const auto header = text::split(header_line, schema.delimiter);
    column_count_ = header.size();
    index_.fill(-1);
    for (std::size_t f = 0; f < kFieldCount; ++f) {
        const auto &column = schema.columns[f];
        if (!column) {
            continue;
        }
        bool found = false;
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == *column) {
                index_[f] = static_cast<int>(i);
                found = true;
                break;
            }
        }
        if (!found) {
            throw ValidationError("column '" + *column + "' bound to " +
                                  std::string(field_key(static_cast<Field>(f))) + " is not in the header");
        }
    }
    const bool minor_bound = schema.bound(Field::RegionMinorNow) || schema.bound(Field::RegionMinorPrev);
    if (minor_bound && !hierarchy.nested()) {
        throw ValidationError("schema binds minor regions but the hierarchy defines none");
    }
    if (options_.unweighted) {
        fields_.set(Field::Weight, false);
    }
    cells_.reserve(column_count_);
}

bool RowParser::split(std::string_view line) {
    cells_.clear();
    const char delim = schema_->delimiter;
    if (line.find('"') == std::string_view::npos) {
        std::size_t pos = 0;
        while (true) {
            const auto next = line.find(delim, pos);
            if (next == std::string_view::npos) {
                cells_.push_back(text::trim(line.substr(pos)));
                break;
            }
            cells_.push_back(text::trim(line.substr(pos, next - pos)));
            pos = next + 1;
        }
        return cells_.size() == column_count_;
    }

    // Quoted fields: "" escapes a quote; delimiters inside quotes are literal.
    unquoted_.clear();
    std::string current;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_quotes) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                current.push_back('"');
                ++i;
            } else if (c == '"') {
                in_quotes = false;
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == delim) {
            unquoted_.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    unquoted_.push_back(std::move(current));
    for (const auto &cell : unquoted_) {
        cells_.push_back(text::trim(cell));
    }
    return !in_quotes && cells_.size() == column_count_;
}

std::string_view RowParser::value(Field field) const {
    const int i = index_[static_cast<std::size_t>(field)];
    return i < 0 ? std::string_view{} : cells_[static_cast<std::size_t>(i)];
}

bool RowParser::parse(std::string_view line, PersonRecord &out, IngestReport &report) {
    line = strip_line(line);
    if (text::trim(line).empty()) {
        return false;
    }
    ++report.rows_read;
    if (!split(line)) {
        report.reject("wrong field count");
        return false;
    }
    out = PersonRecord{};
    if (const char *reason = parse_fields(out)) {
        report.reject(reason);
        return false;
    }
    ++report.accepted;
    return true;
}

const char *RowParser::parse_fields(PersonRecord &out) {
    const Schema &schema = *schema_;
    auto bound = [this](Field f) { return index_[static_cast<std::size_t>(f)] >= 0; };
    auto missing = [&schema](std::string_view raw) { return schema.is_missing(raw); };

    {
        const auto raw = value(Field::Age);
        if (missing(raw)) {
            return "missing age";
        }
        const auto age = text::parse_int(raw);
        if (!age) {
            return "non-numeric age";
        }
        if (*age < 0 || *age > kMaxAge) {
            return "age out of range";
        }
        out.age = static_cast<int>(*age);
    }

    if (bound(Field::Weight) && !options_.unweighted) {
        const auto raw = value(Field::Weight);
        if (missing(raw)) {
            return "missing weight";
        }
        const auto weight = text::parse_double(raw);
        if (!weight || !std::isfinite(*weight)) {
            return "non-numeric weight";
        }
        if (*weight < 0.0) {
            return "negative weight";
        }
        out.weight = *weight;
    }

    if (bound(Field::Sex)) {
        const auto raw = value(Field::Sex);
        if (!missing(raw)) {
            const auto sex = schema.sex_codes.lookup(raw);
            if (!sex) {
                return "unknown sex code";
            }
            out.sex = *sex;
        }
    }

    {
        const auto raw = value(Field::EducationLevel);
        if (!missing(raw)) {
            const auto education = schema.education_codes.lookup(raw);
            if (!education) {
                return "unknown education code";
            }
            out.education = *education;
        }
    }

    if (bound(Field::YearsSchooling)) {
        const auto raw = value(Field::YearsSchooling);
        if (!missing(raw)) {
            const auto years = text::parse_double(raw);
            if (!years || !std::isfinite(*years)) {
                return "non-numeric years_schooling";
            }
            if (*years < 0.0) {
                return "negative years_schooling";
            }
            out.years_schooling = *years;
        }
    }

    const RegionHierarchy &h = *hierarchy_;
    auto resolve = [&](Field minor_field, Field major_field, RegionIndex &minor, RegionIndex &major,
                       const char *unknown_minor, const char *unknown_major) -> const char * {
        if (bound(minor_field)) {
            const auto raw = value(minor_field);
            if (!missing(raw)) {
                const auto found = h.find(Scale::Minor, raw);
                if (!found) {
                    return unknown_minor;
                }
                minor = *found;
                major = h.parent_of(*found);
            }
        }
        if (bound(major_field)) {
            const auto raw = value(major_field);
            if (!missing(raw)) {
                const auto found = h.find(Scale::Major, raw);
                if (!found) {
                    return unknown_major;
                }
                if (minor != kUnknownRegion && major != *found) {
                    return "region nesting mismatch";
                }
                major = *found;
            }
        }
        return nullptr;
    };
    if (const char *err = resolve(Field::RegionMinorNow, Field::RegionMajorNow, out.minor_now, out.major_now,
                                  "unknown region_minor_now", "unknown region_major_now")) {
        return err;
    }
    if (out.major_now == kUnknownRegion) {
        return "missing current region";
    }
    if (const char *err = resolve(Field::RegionMinorPrev, Field::RegionMajorPrev, out.minor_prev, out.major_prev,
                                  "unknown region_minor_prev", "unknown region_major_prev")) {
        return err;
    }

    auto urban = [&](Field f, Urban &target, const char *err) -> const char * {
        if (!bound(f)) {
            return nullptr;
        }
        const auto raw = value(f);
        if (missing(raw)) {
            return nullptr;
        }
        const auto u = schema.urban_codes.lookup(raw);
        if (!u) {
            return err;
        }
        target = *u;
        return nullptr;
    };
    if (const char *err = urban(Field::UrbanNow, out.urban_now, "unknown urban_now code")) {
        return err;
    }
    if (const char *err = urban(Field::UrbanPrev, out.urban_prev, "unknown urban_prev code")) {
        return err;
    }

    if (bound(Field::DurationYears)) {
        const auto raw = value(Field::DurationYears);
        if (!missing(raw)) {
            const auto duration = text::parse_int(raw);
            if (!duration) {
                return "non-numeric duration";
            }
            if (*duration < 0) {
                return "negative duration";
            }
            out.duration_years = static_cast<int>(*duration);
            if (schema.duration_top_code && out.duration_years >= *schema.duration_top_code) {
                out.duration_years = *schema.duration_top_code;
                out.duration_top_coded = true;
            }
        }
    }

    if (bound(Field::Reason)) {
        const auto raw = value(Field::Reason);
        if (!missing(raw)) {
            const auto reason = schema.reason_codes.lookup(raw);
            if (!reason) {
                return "unknown reason code";
            }
            out.reason = *reason;
        }
    }
    return nullptr;
}

std::string RecordReader::read_header(std::istream &in) { return detail::read_header_line(in); }

RecordReader::RecordReader(std::istream &in, const Schema &schema, const RegionHierarchy &hierarchy,
                           IngestOptions options)
    : in_(&in), parser_(schema, hierarchy, read_header(in), options) {}

bool RecordReader::next(PersonRecord &out) {
    while (std::getline(*in_, line_)) {
        if (parser_.parse(line_, out, report_)) {
            return true;
        }
    }
    if (in_->bad()) {
        throw ValidationError("I/O failure while reading microdata");
    }
    return false;
}

IngestResult read_records(std::istream &in, const Schema &schema, const RegionHierarchy &hierarchy,
                          IngestOptions options) {
    RecordReader reader(in, schema, hierarchy, options);
    IngestResult result;
    PersonRecord record;
    while (reader.next(record)) {
        result.records.push_back(record);
    }
    result.report = reader.report();
    result.fields = reader.fields();
    return result;
}

IngestResult read_records(const std::filesystem::path &path, const Schema &schema,
                          const RegionHierarchy &hierarchy, IngestOptions options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot open microdata file " + path.string());
    }
    return read_records(in, schema, hierarchy, options);
}

namespace detail {

std::string read_header_line(std::istream &in) {
    std::string header;
    if (!std::getline(in, header)) {
        throw ValidationError("microdata has no header row");
    }
    if (!header.empty() && header.back() == '\r') {
        header.pop_back();
    }
    return header;
}

void for_each_block(std::istream &in, std::size_t block_bytes,
                    const std::function<void(std::string_view block)> &on_block) {
    std::vector<char> chunk(block_bytes);
    std::string buffer;
    std::string carry;
    while (in) {
        in.read(chunk.data(), static_cast<std::streamsize>(chunk.size()));
        const auto got = static_cast<std::size_t>(in.gcount());
        if (got == 0) {
            break;
        }
        buffer.assign(carry);
        buffer.append(chunk.data(), got);
        const auto last_newline = buffer.rfind('\n');
        if (last_newline == std::string::npos) {
            carry.swap(buffer);
            continue;
        }
        on_block(std::string_view(buffer).substr(0, last_newline + 1));
        carry.assign(buffer, last_newline + 1);
    }
    if (in.bad()) {
        throw ValidationError("I/O failure while reading microdata");
    }
    if (!carry.empty()) {
        on_block(carry);
    }
}

std::vector<std::string_view> split_lines_evenly(std::string_view block, std::size_t parts) {
    std::vector<std::string_view> ranges;
    const std::size_t target = block.size() / std::max<std::size_t>(1, parts);
    std::size_t start = 0;
    for (std::size_t p = 0; p < parts; ++p) {
        std::size_t end = block.size();
        if (p + 1 < parts) {
            const std::size_t probe = std::max(start, (p + 1) * target);
            const auto newline = probe < block.size() ? block.find('\n', probe) : std::string_view::npos;
            end = newline == std::string_view::npos ? block.size() : newline + 1;
        }
        ranges.push_back(block.substr(start, end - start));
        start = end;
    }
    return ranges;
}

} // namespace detail

} // namespace migedu
