#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "indicast/extrapolate.hpp"
#include "indicast/sarimax/model.hpp"
#include "indicast/sarimax/optimizer.hpp"
#include "indicast/series.hpp"

namespace indicast::sarimax {

struct FitOptions {
    QuasiNewtonOptions optimizer{};
    ExogMode exog_mode = ExogMode::level;
    /// Box on the unconstrained partial autocorrelations (tanh(8) ~ 1 - 2e-7).
    double pacf_bound = 8.0;
    /// Stamped onto the fitted model; the engine itself never rescales.
    std::optional<NormalizationParams> normalization{};
};

struct FittedSarimax {
    SarimaxOrder order;
    SarimaxParams params;
    std::vector<std::string> regressor_ids;
    ExogMode exog_mode = ExogMode::level;
    std::string target_id;
    YearMonth last_period{};
    std::vector<double> tail_values;             // level scale, last max_lag + differencing_span observations
    std::vector<double> tail_residuals;          // aligned with difference(tail_values)
    std::vector<std::vector<double>> tail_exog;  // differenced mode only: last differencing_span values
    std::optional<NormalizationParams> normalization;
    double css = 0.0;
    std::size_t residual_count = 0;
    int iterations = 0;

    friend bool operator==(const FittedSarimax&, const FittedSarimax&) = default;
};

using indicast::RegressorForecast;
using indicast::extrapolate_regressor;
using indicast::extrapolate_regressors;

/// Minimum training length for fitting `order` with `k` regressors.
inline std::size_t min_fit_length(const SarimaxOrder& order, std::size_t k) {
    return order.differencing_span() + order.residual_start() + static_cast<std::size_t>(order.q) + 2 + k;
}

/// Conditional-sum-of-squares estimation from the all-zero starting point.
inline FittedSarimax fit(const AlignedFrame& train, const SarimaxOrder& order, const FitOptions& options = {}) {
    order.validate();
    const auto y = train.target().dense();
    std::vector<std::vector<double>> exog;
    for (const auto& ind : train.indicators()) exog.push_back(ind.dense());
    const std::size_t k = exog.size();
    if (y.size() < min_fit_length(order, k)) {
        throw InsufficientData("SARIMAX" + order.to_string() + " with " + std::to_string(k) + " regressors needs more than " +
                               std::to_string(min_fit_length(order, k) - 1) + " training observations, got " +
                               std::to_string(y.size()));
    }

    const int D_eff = order.seasonal() ? order.D : 0;
    const auto w = difference(y, order.d, D_eff, static_cast<int>(order.period()));
    const auto x = align_exog(exog, order, options.exog_mode);
    const ParamLayout layout(order, k);

    Bounds bounds = Bounds::unbounded(layout.size());
    for (std::size_t i = layout.alpha(); i < layout.beta(); ++i) {
        bounds.lower[i] = -options.pacf_bound;
        bounds.upper[i] = options.pacf_bound;
    }

    std::vector<double> eps;
    auto objective = [&](std::span<const double> u) {
        return css_recursion(order, layout.decode(u), w, x, eps);
    };
    const auto result = minimize_bounded(objective, std::vector<double>(layout.size(), 0.0), bounds, options.optimizer);

    FittedSarimax out;
    out.order = order;
    out.params = layout.decode(result.x);
    out.css = css_recursion(order, out.params, w, x, eps);
    out.residual_count = w.size() - order.residual_start();
    out.params.sigma2 = out.css / static_cast<double>(out.residual_count);
    out.regressor_ids = train.indicator_ids();
    out.exog_mode = options.exog_mode;
    out.target_id = train.target().id();
    out.last_period = train.last();
    out.normalization = options.normalization;
    out.iterations = result.iterations;

    const std::size_t span = order.differencing_span();
    const std::size_t tail_len = std::min(y.size(), order.max_lag() + span);
    out.tail_values.assign(y.end() - static_cast<long>(tail_len), y.end());
    out.tail_residuals.assign(eps.end() - static_cast<long>(tail_len - span), eps.end());
    if (options.exog_mode == ExogMode::differenced) {
        for (const auto& col : exog) out.tail_exog.emplace_back(col.end() - static_cast<long>(span), col.end());
    }
    return out;
}

/// Iterates the model forward with future innovations set to zero, then
/// undoes the differencing. Output stays on whatever scale the model was fit.
inline MonthlySeries forecast(const FittedSarimax& fitted, int horizon,
                              const std::vector<RegressorForecast>& future_exog = {}) {
    require(horizon > 0, "horizon must be positive");
    const auto& order = fitted.order;
    const auto& params = fitted.params;
    const std::size_t k = fitted.regressor_ids.size();
    const auto h = static_cast<std::size_t>(horizon);
    if (future_exog.size() != k) {
        throw ContractViolation("model has " + std::to_string(k) + " regressors but " +
                                std::to_string(future_exog.size()) + " regressor forecasts were supplied");
    }
    std::vector<std::vector<double>> x(k);
    for (std::size_t j = 0; j < k; ++j) {
        const auto& rf = future_exog[j];
        if (rf.id != fitted.regressor_ids[j]) {
            throw ContractViolation("regressor forecast " + std::to_string(j) + " is '" + rf.id + "', expected '" +
                                    fitted.regressor_ids[j] + "'");
        }
        if (rf.future_values.size() < h) throw ContractViolation("regressor forecast '" + rf.id + "' is shorter than the horizon");
        std::vector<double> future(rf.future_values.begin(), rf.future_values.begin() + static_cast<long>(h));
        if (fitted.exog_mode == ExogMode::level) {
            x[j] = std::move(future);
        } else {
            std::vector<double> joined = fitted.tail_exog[j];
            joined.insert(joined.end(), future.begin(), future.end());
            auto diffed = indicast::detail::difference_unchecked(joined, order.d, order.seasonal() ? order.D : 0,
                                                      static_cast<int>(order.period()))
                              .values;
            x[j].assign(diffed.end() - static_cast<long>(h), diffed.end());
        }
    }

    const int D_eff = order.seasonal() ? order.D : 0;
    const int s_eff = static_cast<int>(order.period());
    std::vector<double> W = indicast::detail::difference_unchecked(fitted.tail_values, order.d, D_eff, s_eff).values;
    std::vector<double> E = fitted.tail_residuals;
    const std::size_t base = W.size();
    const std::size_t s = order.period();
    auto at = [](const std::vector<double>& v, std::size_t t, std::size_t lag) {
        return lag <= t ? v[t - lag] : 0.0;
    };
    for (std::size_t step = 0; step < h; ++step) {
        const std::size_t t = base + step;
        double v = params.c;
        for (std::size_t j = 0; j < k; ++j) v += params.beta[j] * x[j][step];
        for (std::size_t i = 1; i <= params.alpha.size(); ++i) v += params.alpha[i - 1] * at(W, t, i);
        for (std::size_t j = 1; j <= params.phi.size(); ++j) v += params.phi[j - 1] * at(W, t, j * s);
        for (std::size_t i = 1; i <= params.theta.size(); ++i) v += params.theta[i - 1] * at(E, t, i);
        for (std::size_t j = 1; j <= params.Theta.size(); ++j) v += params.Theta[j - 1] * at(E, t, j * s);
        W.push_back(v);
        E.push_back(0.0);
    }
    std::vector<double> future_w(W.begin() + static_cast<long>(base), W.end());
    auto levels = integrate_forecast(future_w, fitted.tail_values, order.d, D_eff, s_eff);
    return MonthlySeries(fitted.target_id, fitted.last_period.plus(1), levels);
}

/// Fit on `train`, extrapolate its regressors, forecast `horizon` months.
inline MonthlySeries fit_and_forecast(const AlignedFrame& train, const SarimaxOrder& order, int horizon,
                                      const FitOptions& options = {}) {
    auto fitted = fit(train, order, options);
    return forecast(fitted, horizon, extrapolate_regressors(train, horizon));
}

struct GridEntry {
    SarimaxOrder order;
    std::optional<double> validation_mae;
    std::string failure;  // empty on success
};

struct GridSearchResult {
    SarimaxOrder best;
    std::vector<GridEntry> table;
};

/// Scores every order by MAE on the last `horizon` months of `train`
/// (fit on the rest); lowest MAE wins, ties go to the smallest order.
inline GridSearchResult grid_search_order(const AlignedFrame& train, const std::vector<SarimaxOrder>& grid, int horizon,
                                          const FitOptions& options = {}) {
    require(!grid.empty(), "order grid is empty");
    auto [inner, validation] = split_train_test(train, SplitSpec{horizon});
    const auto actual = validation.target().dense();

    GridSearchResult out;
    std::optional<std::size_t> best;
    for (const auto& order : grid) {
        GridEntry entry{order, std::nullopt, {}};
        try {
            const auto pred = fit_and_forecast(inner, order, horizon, options).dense();
            entry.validation_mae = mae(actual, pred);
            if (!std::isfinite(*entry.validation_mae)) {
                entry.validation_mae.reset();
                entry.failure = "non-finite forecast";
            }
        } catch (const Error& e) {
            entry.failure = e.code() + ": " + e.what();
        }
        out.table.push_back(entry);
        if (!entry.validation_mae) continue;
        const std::size_t idx = out.table.size() - 1;
        if (!best) {
            best = idx;
            continue;
        }
        const auto& cur = out.table[*best];
        if (*entry.validation_mae < *cur.validation_mae ||
            (*entry.validation_mae == *cur.validation_mae && entry.order < cur.order)) {
            best = idx;
        }
    }
    if (!best) {
        std::string reasons;
        for (const auto& e : out.table) reasons += "\n  " + e.order.to_string() + ": " + e.failure;
        throw InsufficientData("every order in the grid failed:" + reasons);
    }
    out.best = out.table[*best].order;
    return out;
}

}  // namespace indicast::sarimax
