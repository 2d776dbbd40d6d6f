#include "migedu/age_profile.hpp"

#include "migedu/accumulate.hpp"
#include "migedu/error.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace migedu {

std::vector<double> half_year_grid(double lo, double hi) {
    std::vector<double> grid;
    for (int step = 2 * kProfileMinAge; step <= 2 * kProfileMaxAge; ++step) {
        const double age = step * 0.5;
        if (age >= lo && age <= hi) {
            grid.push_back(age);
        }
    }
    return grid;
}

AgeProfile normalize(const AgeProfile &profile) {
    CompensatedSum total;
    for (const double v : profile.values) {
        if (v < 0.0) {
            throw std::invalid_argument("normalize: negative profile value");
        }
        total += v;
    }
    if (!(total.value() > 0.0)) {
        throw InsufficientDataError("normalize: profile sums to zero");
    }
    AgeProfile out = profile;
    for (double &v : out.values) {
        v /= total.value();
    }
    out.normalized = true;
    return out;
}

AgeProfile smooth_profile(const AgeProfile &profile, double bandwidth) {
    if (profile.smoothed) {
        throw std::invalid_argument("smooth_profile: profile is already smoothed");
    }
    if (profile.ages.empty()) {
        throw InsufficientDataError("smooth_profile: empty profile");
    }
    AgeProfile out;
    out.ages = half_year_grid(profile.ages.front(), profile.ages.back());
    out.values = kernel_smooth(profile.ages, profile.values, bandwidth, out.ages);
    out.missing_ages = profile.missing_ages;
    out.smoothed = true;
    return out;
}

AgeProfile smooth_and_normalize(const AgeProfile &profile, double bandwidth) {
    return normalize(smooth_profile(profile, bandwidth));
}

PeakSummary peak(const AgeProfile &profile) {
    if (!profile.normalized) {
        throw std::invalid_argument("peak: profile must be normalized");
    }
    if (profile.values.empty()) {
        throw InsufficientDataError("peak: empty profile");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < profile.values.size(); ++i) {
        if (profile.values[i] > profile.values[best]) {
            best = i;
        }
    }
    // Smoothing a flat profile leaves rounding noise, so flatness is judged relatively.
    const auto [lo, hi] = std::minmax_element(profile.values.begin(), profile.values.end());
    const bool degenerate = *hi - *lo <= kFlatTolerance * std::abs(*hi);
    if (degenerate) {
        best = 0;
    }
    return PeakSummary{profile.ages[best], profile.values[best], degenerate};
}

} // namespace migedu
