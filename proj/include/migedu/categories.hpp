#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace migedu {

enum class Sex { M, F, Unknown };

enum class Education { LtPrimary, Primary, Secondary, Tertiary, Unknown };

enum class Urban { Urban, Rural, Unknown };

enum class Reason { Employment, Education, Family, Marriage, Other, Unknown };

/// Spatial scale at which a move is measured.
enum class Scale { Minor, Major };

enum class MoveClass { Stayer, IntraMajorMove, InterMajorMove, Unclassifiable };

/// Stayer/migrant is always decided at the major scale.
enum class MigrantStatus { UrbanInMigrant, RuralInMigrant, UrbanStayer, RuralStayer, Unclassifiable };

/// Previous settlement type crossed with current settlement type (R = rural, U = urban).
enum class SettlementFlow { RR, RU, UR, UU, Unknown };

inline constexpr std::array<Education, 4> kKnownEducation{Education::LtPrimary, Education::Primary,
                                                          Education::Secondary, Education::Tertiary};
inline constexpr std::array<Reason, 5> kKnownReasons{Reason::Employment, Reason::Education, Reason::Family,
                                                     Reason::Marriage, Reason::Other};
inline constexpr std::array<SettlementFlow, 4> kKnownFlows{SettlementFlow::RR, SettlementFlow::RU,
                                                           SettlementFlow::UR, SettlementFlow::UU};
inline constexpr std::array<MigrantStatus, 4> kKnownStatuses{
    MigrantStatus::UrbanInMigrant, MigrantStatus::RuralInMigrant, MigrantStatus::UrbanStayer,
    MigrantStatus::RuralStayer};

namespace detail {

template <typename E>
struct CategoryNames;

template <>
struct CategoryNames<Sex> {
    static constexpr std::array<std::string_view, 3> names{"M", "F", "Unknown"};
};
template <>
struct CategoryNames<Education> {
    static constexpr std::array<std::string_view, 5> names{"LtPrimary", "Primary", "Secondary", "Tertiary",
                                                           "Unknown"};
};
template <>
struct CategoryNames<Urban> {
    static constexpr std::array<std::string_view, 3> names{"Urban", "Rural", "Unknown"};
};
template <>
struct CategoryNames<Reason> {
    static constexpr std::array<std::string_view, 6> names{"Employment", "Education", "Family",
                                                           "Marriage",   "Other",     "Unknown"};
};
template <>
struct CategoryNames<Scale> {
    static constexpr std::array<std::string_view, 2> names{"minor", "major"};
};
template <>
struct CategoryNames<MoveClass> {
    static constexpr std::array<std::string_view, 4> names{"Stayer", "IntraMajorMove", "InterMajorMove",
                                                           "Unclassifiable"};
};
template <>
struct CategoryNames<MigrantStatus> {
    static constexpr std::array<std::string_view, 5> names{"UrbanInMigrant", "RuralInMigrant", "UrbanStayer",
                                                           "RuralStayer", "Unclassifiable"};
};
template <>
struct CategoryNames<SettlementFlow> {
    static constexpr std::array<std::string_view, 5> names{"RR", "RU", "UR", "UU", "Unknown"};
};

} // namespace detail

template <typename E>
constexpr std::size_t category_count() {
    return detail::CategoryNames<E>::names.size();
}

template <typename E>
constexpr std::string_view name_of(E value) {
    return detail::CategoryNames<E>::names[static_cast<std::size_t>(value)];
}

/// Exact, case-sensitive match against the canonical category names.
template <typename E>
constexpr std::optional<E> parse_category(std::string_view text) {
    const auto &names = detail::CategoryNames<E>::names;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == text) {
            return static_cast<E>(i);
        }
    }
    return std::nullopt;
}

template <typename E>
constexpr std::size_t index_of(E value) {
    return static_cast<std::size_t>(value);
}

constexpr bool secondary_or_higher(Education e) {
    return e == Education::Secondary || e == Education::Tertiary;
}

} // namespace migedu
