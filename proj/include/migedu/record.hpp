#pragma once

#include "migedu/categories.hpp"

#include <cstdint>
#include <limits>

namespace migedu {

/// Dense index into RegionHierarchy's minor or major table.
using RegionIndex = std::int32_t;
inline constexpr RegionIndex kUnknownRegion = -1;

/// One weighted census respondent. Region fields hold hierarchy indices
/// resolved at ingestion; major indices are always filled when the
/// corresponding minor index is known.
struct PersonRecord {
    double weight = 1.0;
    int age = 0;
    Sex sex = Sex::Unknown;
    Education education = Education::Unknown;
    /// NaN when unknown.
    double years_schooling = std::numeric_limits<double>::quiet_NaN();

    RegionIndex minor_now = kUnknownRegion;
    RegionIndex major_now = kUnknownRegion;
    RegionIndex minor_prev = kUnknownRegion;
    RegionIndex major_prev = kUnknownRegion;

    Urban urban_now = Urban::Unknown;
    Urban urban_prev = Urban::Unknown;

    /// Negative when unknown.
    int duration_years = -1;
    bool duration_top_coded = false;

    Reason reason = Reason::Unknown;

    [[nodiscard]] bool has_years_schooling() const noexcept { return years_schooling == years_schooling; }
    [[nodiscard]] bool has_duration() const noexcept { return duration_years >= 0; }

    friend bool operator==(const PersonRecord &a, const PersonRecord &b) noexcept {
        const bool same_years = a.has_years_schooling() == b.has_years_schooling() &&
                                (!a.has_years_schooling() || a.years_schooling == b.years_schooling);
        return a.weight == b.weight && a.age == b.age && a.sex == b.sex && a.education == b.education &&
               same_years && a.minor_now == b.minor_now && a.major_now == b.major_now &&
               a.minor_prev == b.minor_prev && a.major_prev == b.major_prev && a.urban_now == b.urban_now &&
               a.urban_prev == b.urban_prev && a.duration_years == b.duration_years &&
               a.duration_top_coded == b.duration_top_coded && a.reason == b.reason;
    }
};

} // namespace migedu
