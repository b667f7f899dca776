#pragma once

#include <string>
#include <vector>

#include "indicast/series.hpp"

namespace indicast {

/// Future path of one regressor, as consumed by both forecasting models.
struct RegressorForecast {
    std::string id;
    std::vector<double> future_values;
    double slope = 0.0;
    double intercept = 0.0;
};

/// Straight-line continuation of one regressor.
inline RegressorForecast extrapolate_regressor(const MonthlySeries& series, int horizon) {
    require(horizon > 0, "horizon must be positive");
    const auto y = series.dense();
    if (y.size() < 2) throw InsufficientData("regressor '" + series.id() + "' needs at least 2 points to extrapolate");
    const auto line = fit_line(y);
    RegressorForecast out{series.id(), {}, line.slope, line.intercept};
    for (int h = 0; h < horizon; ++h) out.future_values.push_back(line.at(static_cast<double>(y.size()) + h));
    return out;
}

inline std::vector<RegressorForecast> extrapolate_regressors(const AlignedFrame& frame, int horizon) {
    std::vector<RegressorForecast> out;
    for (const auto& ind : frame.indicators()) out.push_back(extrapolate_regressor(ind, horizon));
    return out;
}

}  // namespace indicast
