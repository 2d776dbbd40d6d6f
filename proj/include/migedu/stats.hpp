#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace migedu {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    /// Weighted coefficient of determination; 1 when the fit is exact.
    double r_squared = 0.0;
    /// Classical WLS standard error of the slope (0 when n_points == 2).
    double slope_std_error = 0.0;
    std::size_t n_points = 0;
    double weight_total = 0.0;
};

/// y = coefficient * x^exponent, fitted by OLS in log-log space.
struct PowerFit {
    double coefficient = 0.0;
    double exponent = 0.0;
    double r_squared = 0.0;
    std::size_t n_points = 0;
};

struct CorrelationResult {
    double r = 0.0;
    std::size_t n = 0;
};

/// Minimises Σ wᵢ(yᵢ − a − b·xᵢ)². Throws std::invalid_argument on fewer than
/// two points, negative or all-zero weights, or no weighted variation in x.
LinearFit weighted_ols(std::span<const Point> points, std::span<const double> weights);

/// Unit-weight OLS.
LinearFit ols(std::span<const Point> points);

/// Pearson product-moment correlation. Throws on size mismatch, fewer than
/// two pairs, or a constant series.
CorrelationResult pearson(std::span<const double> xs, std::span<const double> ys);

/// Throws std::invalid_argument unless every coordinate is strictly positive.
PowerFit power_fit(std::span<const Point> points);

inline constexpr double kDefaultBandwidth = 2.0;

/// Gaussian Nadaraya–Watson regression of ys on xs evaluated at `grid`.
///
/// Weights are computed relative to the nearest data point, so very small
/// bandwidths degrade to nearest-neighbour interpolation instead of 0/0.
/// Requires strictly increasing xs and grid points inside [xs.front(), xs.back()].
std::vector<double> kernel_smooth(std::span<const double> xs, std::span<const double> ys, double bandwidth,
                                  std::span<const double> grid);

} // namespace migedu
