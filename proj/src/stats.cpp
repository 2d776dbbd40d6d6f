#include "migedu/stats.hpp"

#include "migedu/accumulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace migedu {

LinearFit weighted_ols(std::span<const Point> points, std::span<const double> weights) {
    if (points.size() != weights.size()) {
        throw std::invalid_argument("weighted_ols: points and weights differ in length");
    }
    if (points.size() < 2) {
        throw std::invalid_argument("weighted_ols: at least two points required");
    }
    CompensatedSum w_sum, wx_sum, wy_sum;
    std::size_t positive = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double w = weights[i];
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw std::invalid_argument("weighted_ols: weights must be finite and non-negative");
        }
        if (w > 0.0) {
            ++positive;
        }
        w_sum += w;
        wx_sum += w * points[i].x;
        wy_sum += w * points[i].y;
    }
    const double total = w_sum.value();
    if (!(total > 0.0)) {
        throw std::invalid_argument("weighted_ols: total weight is zero");
    }
    const double x_mean = wx_sum.value() / total;
    const double y_mean = wy_sum.value() / total;

    CompensatedSum sxx, sxy, syy;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double dx = points[i].x - x_mean;
        const double dy = points[i].y - y_mean;
        sxx += weights[i] * dx * dx;
        sxy += weights[i] * dx * dy;
        syy += weights[i] * dy * dy;
    }
    const double x_scale = std::max(std::abs(x_mean), 1.0);
    if (!(sxx.value() > total * x_scale * x_scale * 1e-24)) {
        throw std::invalid_argument("weighted_ols: no x variation");
    }

    LinearFit fit;
    fit.slope = sxy.value() / sxx.value();
    fit.intercept = y_mean - fit.slope * x_mean;
    fit.n_points = points.size();
    fit.weight_total = total;

    CompensatedSum ssr;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double residual = points[i].y - fit.intercept - fit.slope * points[i].x;
        ssr += weights[i] * residual * residual;
    }
    const double sst = syy.value();
    if (sst > 0.0) {
        fit.r_squared = std::clamp(1.0 - ssr.value() / sst, 0.0, 1.0);
    } else {
        fit.r_squared = 1.0;
    }
    if (positive > 2) {
        // Var(εᵢ) = σ²/wᵢ; invariant under rescaling all weights.
        const double sigma2 = ssr.value() / static_cast<double>(positive - 2);
        fit.slope_std_error = std::sqrt(sigma2 / sxx.value());
    }
    return fit;
}

LinearFit ols(std::span<const Point> points) {
    const std::vector<double> ones(points.size(), 1.0);
    return weighted_ols(points, ones);
}

CorrelationResult pearson(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) {
        throw std::invalid_argument("pearson: series differ in length");
    }
    if (xs.size() < 2) {
        throw std::invalid_argument("pearson: at least two pairs required");
    }
    CompensatedSum sx, sy;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    const double n = static_cast<double>(xs.size());
    const double mx = sx.value() / n;
    const double my = sy.value() / n;
    CompensatedSum sxx, syy, sxy;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (!(sxx.value() > 0.0) || !(syy.value() > 0.0)) {
        throw std::invalid_argument("pearson: constant series");
    }
    const double r = sxy.value() / std::sqrt(sxx.value() * syy.value());
    return CorrelationResult{std::clamp(r, -1.0, 1.0), xs.size()};
}

PowerFit power_fit(std::span<const Point> points) {
    std::vector<Point> logged;
    logged.reserve(points.size());
    for (const auto &p : points) {
        if (!(p.x > 0.0) || !(p.y > 0.0)) {
            throw std::invalid_argument("power_fit: coordinates must be strictly positive");
        }
        logged.push_back(Point{std::log(p.x), std::log(p.y)});
    }
    const LinearFit fit = ols(logged);
    return PowerFit{std::exp(fit.intercept), fit.slope, fit.r_squared, fit.n_points};
}

std::vector<double> kernel_smooth(std::span<const double> xs, std::span<const double> ys, double bandwidth,
                                  std::span<const double> grid) {
    if (xs.empty() || xs.size() != ys.size()) {
        throw std::invalid_argument("kernel_smooth: empty input or length mismatch");
    }
    if (!(bandwidth > 0.0)) {
        throw std::invalid_argument("kernel_smooth: bandwidth must be positive");
    }
    for (std::size_t i = 1; i < xs.size(); ++i) {
        if (!(xs[i] > xs[i - 1])) {
            throw std::invalid_argument("kernel_smooth: xs must be strictly increasing");
        }
    }
    const double lo = xs.front();
    const double hi = xs.back();

    std::vector<double> out;
    out.reserve(grid.size());
    const double inv_two_h2 = 1.0 / (2.0 * bandwidth * bandwidth);
    for (const double g : grid) {
        if (g < lo || g > hi) {
            throw std::invalid_argument("kernel_smooth: grid point outside data range");
        }
        double nearest = std::numeric_limits<double>::infinity();
        for (const double x : xs) {
            nearest = std::min(nearest, (x - g) * (x - g));
        }
        CompensatedSum num, den;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double d2 = (xs[i] - g) * (xs[i] - g);
            const double w = std::exp(-(d2 - nearest) * inv_two_h2);
            num += w * ys[i];
            den += w;
        }
        out.push_back(num.value() / den.value());
    }
    return out;
}

} // namespace migedu
