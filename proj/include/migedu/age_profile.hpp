#pragma once

#include "migedu/intensity.hpp"
#include "migedu/stats.hpp"

#include <vector>

namespace migedu {

struct PeakSummary {
    double age_at_peak = 0.0;
    /// Normalized mass at the peak.
    double intensity_at_peak = 0.0;
    /// Set when all values agree within kFlatTolerance; the youngest age is reported.
    bool degenerate = false;
};

/// Half-year evaluation grid 5.0, 5.5, …, 65.0 clipped to [lo, hi].
std::vector<double> half_year_grid(double lo = kProfileMinAge, double hi = kProfileMaxAge);

/// Divides by the sum. Throws InsufficientDataError for an all-zero profile.
AgeProfile normalize(const AgeProfile &profile);

/// Kernel regression of a raw single-year profile onto the half-year grid.
AgeProfile smooth_profile(const AgeProfile &profile, double bandwidth = kDefaultBandwidth);

/// Smooth first, then normalize.
AgeProfile smooth_and_normalize(const AgeProfile &profile, double bandwidth = kDefaultBandwidth);

/// Relative spread below which a profile counts as flat.
inline constexpr double kFlatTolerance = 1e-12;

/// Argmax of a normalized profile, ties resolved toward the youngest age.
PeakSummary peak(const AgeProfile &profile);

} // namespace migedu
