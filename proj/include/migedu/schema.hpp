#pragma once

#include "migedu/categories.hpp"

#include <array>
#include <bitset>
#include <cstddef>
#include <filesystem>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace migedu {

/// Record attributes a schema can bind to input columns.
enum class Field {
    Weight,
    Age,
    Sex,
    EducationLevel,
    YearsSchooling,
    RegionMinorNow,
    RegionMajorNow,
    RegionMinorPrev,
    RegionMajorPrev,
    UrbanNow,
    UrbanPrev,
    DurationYears,
    Reason,
};

inline constexpr std::size_t kFieldCount = 13;

/// Key used for the field in schema documents ("weight", "age", "region_minor_prev", ...).
std::string_view field_key(Field field);
std::optional<Field> parse_field_key(std::string_view key);

/// The set of fields an input actually carries. Indicators that need an
/// optional field (urban_prev, reason, duration, years of schooling) check it
/// here so "unbound" can be told apart from "bound but all unknown".
class FieldSet {
  public:
    FieldSet() = default;
    FieldSet(std::initializer_list<Field> fields) {
        for (auto f : fields) {
            set(f);
        }
    }

    static FieldSet all() {
        FieldSet s;
        s.bits_.set();
        return s;
    }

    void set(Field f, bool on = true) { bits_.set(static_cast<std::size_t>(f), on); }
    [[nodiscard]] bool has(Field f) const { return bits_.test(static_cast<std::size_t>(f)); }
    [[nodiscard]] FieldSet without(Field f) const {
        FieldSet copy = *this;
        copy.set(f, false);
        return copy;
    }

  private:
    std::bitset<kFieldCount> bits_;
};

/// Closed mapping from raw input codes to a category.
template <typename E>
class CodeMap {
  public:
    CodeMap() = default;
    explicit CodeMap(std::vector<std::pair<std::string, E>> entries) : entries_(std::move(entries)) {}

    [[nodiscard]] std::optional<E> lookup(std::string_view code) const {
        for (const auto &[raw, value] : entries_) {
            if (raw == code) {
                return value;
            }
        }
        return std::nullopt;
    }

    [[nodiscard]] const std::vector<std::pair<std::string, E>> &entries() const { return entries_; }
    [[nodiscard]] bool empty() const { return entries_.empty(); }

    friend bool operator==(const CodeMap &, const CodeMap &) = default;

  private:
    std::vector<std::pair<std::string, E>> entries_;
};

/// Column bindings and code maps for one microdata layout.
struct Schema {
    char delimiter = ',';
    int interval_years = 5;
    /// Raw values treated as "not recorded" for every field.
    std::vector<std::string> missing_values{""};
    std::array<std::optional<std::string>, kFieldCount> columns{};

    CodeMap<Sex> sex_codes;
    CodeMap<Education> education_codes;
    CodeMap<Urban> urban_codes;
    CodeMap<Reason> reason_codes;

    /// Largest duration value the source records; larger values are clamped and flagged.
    std::optional<int> duration_top_code;

    void bind(Field field, std::string column) { columns[static_cast<std::size_t>(field)] = std::move(column); }
    [[nodiscard]] const std::optional<std::string> &column(Field field) const {
        return columns[static_cast<std::size_t>(field)];
    }
    [[nodiscard]] bool bound(Field field) const { return column(field).has_value(); }
    [[nodiscard]] FieldSet bound_fields() const;
    [[nodiscard]] bool is_missing(std::string_view raw) const;

    /// Throws ValidationError when a required binding is absent, a column is
    /// bound twice, or the interval is not positive.
    void validate() const;

    friend bool operator==(const Schema &, const Schema &) = default;
};

/// Parses and validates a JSON schema document. Categorical fields without a
/// "codes" entry accept the canonical category names.
Schema parse_schema(std::string_view json_text);
Schema load_schema(const std::filesystem::path &path);
std::string schema_to_json(const Schema &schema);

} // namespace migedu
