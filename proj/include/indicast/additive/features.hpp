#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "indicast/errors.hpp"
#include "indicast/series.hpp"

namespace indicast::additive {

/// [t, max(0, t - c_1), ..., max(0, t - c_m)]
inline std::vector<double> trend_features(double t, const std::vector<double>& changepoints) {
    std::vector<double> out;
    out.reserve(changepoints.size() + 1);
    out.push_back(t);
    for (double c : changepoints) out.push_back(std::max(0.0, t - c));
    return out;
}

/// [sin(2 pi k t / period), cos(2 pi k t / period)] for k = 1..order.
inline std::vector<double> fourier_features(long t_month, double period, int order) {
    require(order >= 1, "fourier order must be at least 1");
    require(period > 0.0, "seasonal period must be positive");
    std::vector<double> out;
    out.reserve(2 * static_cast<std::size_t>(order));
    // Reduce the phase first so that t and t + period give bit-identical features.
    const double phase = std::fmod(static_cast<double>(t_month), period) / period;
    for (int k = 1; k <= order; ++k) {
        const double a = 2.0 * std::numbers::pi * k * phase;
        out.push_back(std::sin(a));
        out.push_back(std::cos(a));
    }
    return out;
}

/// Evenly spaced changepoints over the first `range` fraction of [0, 1].
inline std::vector<double> place_changepoints(int count, double range) {
    require(count >= 0, "changepoint count must be nonnegative");
    require(range > 0.0 && range <= 1.0, "changepoint range must lie in (0, 1]");
    std::vector<double> out;
    for (int i = 1; i <= count; ++i) out.push_back(range * i / (count + 1));
    return out;
}

/// Affine map from calendar month to normalized time; the training window maps onto [0, 1].
struct TimeScale {
    YearMonth origin{};
    long span = 1;  // months between first and last training observation (at least 1)

    double at(YearMonth m) const { return static_cast<double>(months_between(origin, m)) / static_cast<double>(span); }

    static TimeScale for_window(YearMonth first, YearMonth last) {
        return {first, std::max<long>(1, months_between(first, last))};
    }

    friend bool operator==(const TimeScale&, const TimeScale&) = default;
};

}  // namespace indicast::additive
