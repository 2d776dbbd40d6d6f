#pragma once

#include "migedu/hierarchy.hpp"
#include "migedu/record.hpp"

#include <string>

namespace testing {

using namespace migedu;

/// Two majors A, B with minors a1, a2 and b1, b2.
inline RegionHierarchy small_hierarchy() {
    RegionHierarchy h;
    h.add_major("A", 100.0);
    h.add_major("B", 400.0);
    h.add_minor("a1", "A", 50.0, 500.0);
    h.add_minor("a2", "A", 50.0, 500.0);
    h.add_minor("b1", "B", 200.0, 300.0);
    h.add_minor("b2", "B", 200.0, 300.0);
    h.finalize();
    return h;
}

/// Record in small_hierarchy() moving between minor indices (0..3).
inline PersonRecord person(int minor_prev, int minor_now, int age = 30, Education edu = Education::Primary,
                           double weight = 1.0) {
    PersonRecord r;
    r.weight = weight;
    r.age = age;
    r.sex = Sex::M;
    r.education = edu;
    r.minor_prev = minor_prev;
    r.minor_now = minor_now;
    r.major_prev = minor_prev < 0 ? kUnknownRegion : minor_prev / 2;
    r.major_now = minor_now / 2;
    r.urban_prev = Urban::Rural;
    r.urban_now = Urban::Rural;
    return r;
}

inline const char *kSchemaJson = R"({
  "columns": {"weight": "w", "age": "age", "sex": "sex", "education_level": "edu",
              "years_schooling": "yrs", "region_minor_now": "mn", "region_minor_prev": "mp",
              "urban_now": "un", "urban_prev": "up", "duration_years": "dur", "reason": "why"},
  "codes": {"education_level": {"0": "LtPrimary", "1": "Primary", "2": "Secondary", "3": "Tertiary",
                                "9": "Unknown"},
            "sex": {"1": "M", "2": "F"},
            "urban": {"U": "Urban", "R": "Rural"},
            "reason": {"1": "Employment", "2": "Education", "3": "Family", "4": "Marriage", "5": "Other"}},
  "missing_values": ["", "NA"]
})";

inline const char *kHeader = "w,age,sex,edu,yrs,mn,mp,un,up,dur,why";

} // namespace testing
