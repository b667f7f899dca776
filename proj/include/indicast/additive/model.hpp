#pragma once

#include <array>
#include <cmath>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "indicast/additive/features.hpp"
#include "indicast/extrapolate.hpp"
#include "indicast/series.hpp"
#include "indicast/series_csv.hpp"

namespace indicast::additive {

enum class Component { intercept, T, S, E, F, A, L };
inline constexpr std::size_t component_count = 7;

inline std::string_view component_tag(Component c) {
    static constexpr std::array<std::string_view, component_count> tags{"intercept", "T", "S", "E", "F", "A", "L"};
    return tags[static_cast<std::size_t>(c)];
}

inline Component component_from_tag(std::string_view tag) {
    for (std::size_t i = 0; i < component_count; ++i)
        if (component_tag(static_cast<Component>(i)) == tag) return static_cast<Component>(i);
    throw ParseError("unknown component tag '" + std::string(tag) + "'");
}

struct Seasonality {
    double period = 12.0;
    int order = 3;
    friend bool operator==(const Seasonality&, const Seasonality&) = default;
};

/// A named set of months flagged 1 in its event column.
struct EventSpec {
    std::string id;
    std::vector<YearMonth> months;
    friend bool operator==(const EventSpec&, const EventSpec&) = default;
};

struct AdditiveConfig {
    int n_changepoints = 0;
    double changepoint_range = 0.8;
    std::vector<Seasonality> seasonalities;
    int ar_lags = 0;
    int regressor_lags = 0;
    std::vector<EventSpec> events;
    /// Indicators known in advance; they enter contemporaneously (F block) instead of through lags (L block).
    std::vector<std::string> future_known;
    double ridge_lambda = 0.1;

    std::size_t max_lag() const noexcept { return static_cast<std::size_t>(std::max(ar_lags, regressor_lags)); }

    void validate() const {
        require(n_changepoints >= 0, "n_changepoints must be nonnegative");
        require(changepoint_range > 0.0 && changepoint_range <= 1.0, "changepoint_range must lie in (0, 1]");
        for (const auto& s : seasonalities) {
            require(s.period > 0.0, "seasonal period must be positive");
            require(s.order >= 1, "fourier order must be at least 1");
        }
        require(ar_lags >= 0 && regressor_lags >= 0, "lag counts must be nonnegative");
        require(ridge_lambda >= 0.0 && std::isfinite(ridge_lambda), "ridge_lambda must be a nonnegative real");
        std::set<std::string> ids;
        for (const auto& e : events) require(ids.insert(e.id).second, "duplicate event id '" + e.id + "'");
    }

    friend bool operator==(const AdditiveConfig&, const AdditiveConfig&) = default;
};

struct Column {
    Component component = Component::intercept;
    std::string name;
    bool penalized = true;
    friend bool operator==(const Column&, const Column&) = default;
};

struct DesignMatrix {
    std::vector<Column> columns;
    std::vector<YearMonth> months;  // one per row
    Eigen::MatrixXd values;
    Eigen::VectorXd target;
};

namespace detail {

/// Everything needed to turn a month plus its lag history into one design row.
struct RowBuilder {
    AdditiveConfig config;
    std::vector<double> changepoints;
    TimeScale scale;
    std::vector<std::string> regressor_ids;
    std::vector<std::size_t> f_index;  // positions in regressor_ids
    std::vector<std::size_t> l_index;
    std::vector<std::set<int>> event_months;

    RowBuilder(AdditiveConfig cfg, TimeScale ts, std::vector<std::string> ids)
        : config(std::move(cfg)), scale(ts), regressor_ids(std::move(ids)) {
        changepoints = place_changepoints(config.n_changepoints, config.changepoint_range);
        for (const auto& id : config.future_known) {
            auto it = std::find(regressor_ids.begin(), regressor_ids.end(), id);
            if (it == regressor_ids.end()) throw UnknownId("future-known regressor '" + id + "' is not in the frame");
            f_index.push_back(static_cast<std::size_t>(it - regressor_ids.begin()));
        }
        for (std::size_t j = 0; j < regressor_ids.size(); ++j)
            if (std::find(f_index.begin(), f_index.end(), j) == f_index.end()) l_index.push_back(j);
        for (const auto& e : config.events) {
            std::set<int> months;
            for (auto m : e.months) months.insert(m.ordinal());
            event_months.push_back(std::move(months));
        }
    }

    std::vector<Column> columns() const {
        std::vector<Column> out{{Component::intercept, "intercept", false}, {Component::T, "t", false}};
        for (std::size_t i = 0; i < changepoints.size(); ++i)
            out.push_back({Component::T, "hinge_" + std::to_string(i + 1), true});
        for (const auto& s : config.seasonalities) {
            const std::string base = "p" + format_double(s.period) + "_";
            for (int k = 1; k <= s.order; ++k) {
                out.push_back({Component::S, base + "sin" + std::to_string(k), true});
                out.push_back({Component::S, base + "cos" + std::to_string(k), true});
            }
        }
        for (const auto& e : config.events) out.push_back({Component::E, e.id, true});
        for (auto j : f_index) out.push_back({Component::F, regressor_ids[j], true});
        for (int l = 1; l <= config.ar_lags; ++l) out.push_back({Component::A, "lag" + std::to_string(l), true});
        for (auto j : l_index)
            for (int l = 0; l <= config.regressor_lags; ++l)
                out.push_back({Component::L, regressor_ids[j] + "@lag" + std::to_string(l), true});
        return out;
    }

    /// `target_lag(l)` returns the target l months before `m`; `regressor_lag(j, l)` likewise for regressor j.
    template <class TargetLag, class RegressorLag>
    void fill(YearMonth m, TargetLag&& target_lag, RegressorLag&& regressor_lag, std::vector<double>& row) const {
        row.clear();
        row.push_back(1.0);
        for (double v : trend_features(scale.at(m), changepoints)) row.push_back(v);
        for (const auto& s : config.seasonalities)
            for (double v : fourier_features(m.ordinal(), s.period, s.order)) row.push_back(v);
        for (const auto& months : event_months) row.push_back(months.contains(m.ordinal()) ? 1.0 : 0.0);
        for (auto j : f_index) row.push_back(regressor_lag(j, 0));
        for (int l = 1; l <= config.ar_lags; ++l) row.push_back(target_lag(l));
        for (auto j : l_index)
            for (int l = 0; l <= config.regressor_lags; ++l) row.push_back(regressor_lag(j, l));
    }
};

inline RowBuilder builder_for(const AlignedFrame& train, const AdditiveConfig& config) {
    config.validate();
    return RowBuilder(config, TimeScale::for_window(train.start(), train.last()), train.indicator_ids());
}

inline DesignMatrix build_design(const AlignedFrame& train, const RowBuilder& rb) {
    const std::size_t n = train.size();
    const std::size_t lag = rb.config.max_lag();
    if (n < lag + 3) {
        throw InsufficientData("additive design needs at least 3 usable rows; " + std::to_string(n) +
                               " months with " + std::to_string(lag) + " lags leaves " +
                               std::to_string(n > lag ? n - lag : 0));
    }
    const auto y = train.target().dense();
    std::vector<std::vector<double>> x;
    for (const auto& ind : train.indicators()) x.push_back(ind.dense());

    DesignMatrix out;
    out.columns = rb.columns();
    const std::size_t rows = n - lag;
    out.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(out.columns.size()));
    out.target.resize(static_cast<Eigen::Index>(rows));
    std::vector<double> row;
    for (std::size_t i = lag; i < n; ++i) {
        rb.fill(
            train.target().month_at(i), [&](int l) { return y[i - static_cast<std::size_t>(l)]; },
            [&](std::size_t j, int l) { return x[j][i - static_cast<std::size_t>(l)]; }, row);
        const auto r = static_cast<Eigen::Index>(i - lag);
        for (std::size_t c = 0; c < row.size(); ++c) out.values(r, static_cast<Eigen::Index>(c)) = row[c];
        out.target(r) = y[i];
        out.months.push_back(train.target().month_at(i));
    }
    return out;
}

}  // namespace detail

inline DesignMatrix build_design(const AlignedFrame& train, const AdditiveConfig& config) {
    return detail::build_design(train, detail::builder_for(train, config));
}

struct FittedAdditive {
    AdditiveConfig config;
    std::vector<Column> columns;
    std::vector<double> coefficients;
    TimeScale time_scale;
    std::string target_id;
    std::vector<std::string> regressor_ids;
    YearMonth last_period{};
    std::vector<double> tail_target;                   // last max_lag target values
    std::vector<std::vector<double>> tail_regressors;  // last max_lag values of each regressor
    YearMonth fitted_start{};
    std::vector<double> fitted_values;

    friend bool operator==(const FittedAdditive&, const FittedAdditive&) = default;
};

/// Solves (D'D + lambda P) b = D'y, P = diag(penalized columns).
inline Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& D, const Eigen::VectorXd& y, const std::vector<Column>& columns,
                                   double lambda) {
    Eigen::MatrixXd A = D.transpose() * D;
    for (std::size_t c = 0; c < columns.size(); ++c)
        if (columns[c].penalized) A(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(c)) += lambda;
    const Eigen::VectorXd b = D.transpose() * y;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    if (ldlt.info() == Eigen::Success) {
        Eigen::VectorXd beta = ldlt.solve(b);
        if (beta.allFinite() && (A * beta - b).norm() <= 1e-10 * (A.norm() * beta.norm() + b.norm())) return beta;
    }
    // Rank-deficient without a ridge shift: minimum-norm solution.
    return A.completeOrthogonalDecomposition().solve(b);
}

inline FittedAdditive fit(const AlignedFrame& train, const AdditiveConfig& config) {
    const auto rb = detail::builder_for(train, config);
    const auto design = detail::build_design(train, rb);
    const Eigen::VectorXd beta = ridge_solve(design.values, design.target, design.columns, config.ridge_lambda);
    const Eigen::VectorXd fitted = design.values * beta;

    FittedAdditive out;
    out.config = config;
    out.columns = design.columns;
    out.coefficients.assign(beta.data(), beta.data() + beta.size());
    out.time_scale = rb.scale;
    out.target_id = train.target().id();
    out.regressor_ids = train.indicator_ids();
    out.last_period = train.last();
    const std::size_t lag = config.max_lag();
    const auto y = train.target().dense();
    out.tail_target.assign(y.end() - static_cast<long>(lag), y.end());
    for (const auto& ind : train.indicators()) {
        const auto x = ind.dense();
        out.tail_regressors.emplace_back(x.end() - static_cast<long>(lag), x.end());
    }
    out.fitted_start = design.months.front();
    out.fitted_values.assign(fitted.data(), fitted.data() + fitted.size());
    return out;
}

/// Per-component contributions (coefficients applied block-wise) for a run of months.
struct Decomposition {
    std::vector<YearMonth> months;
    std::vector<std::array<double, component_count>> parts;
    std::vector<double> total;
};

namespace detail {

inline void add_row(Decomposition& dec, YearMonth m, const std::vector<double>& row, const FittedAdditive& fitted) {
    std::array<double, component_count> parts{};
    double total = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) {
        const double v = fitted.coefficients[c] * row[c];
        parts[static_cast<std::size_t>(fitted.columns[c].component)] += v;
        total += v;
    }
    dec.months.push_back(m);
    dec.parts.push_back(parts);
    dec.total.push_back(total);
}

inline RowBuilder builder_for(const FittedAdditive& fitted) {
    return RowBuilder(fitted.config, fitted.time_scale, fitted.regressor_ids);
}

}  // namespace detail

/// Splits the in-sample fit on `train` (the frame the model was fit on) into its components.
inline Decomposition decompose(const FittedAdditive& fitted, const AlignedFrame& train) {
    require(train.indicator_ids() == fitted.regressor_ids, "frame regressors differ from the fitted model");
    const auto rb = detail::builder_for(fitted);
    const auto design = detail::build_design(train, rb);
    require(design.columns == fitted.columns, "frame does not reproduce the fitted column layout");
    Decomposition dec;
    std::vector<double> row(design.columns.size());
    for (Eigen::Index r = 0; r < design.values.rows(); ++r) {
        for (Eigen::Index c = 0; c < design.values.cols(); ++c) row[static_cast<std::size_t>(c)] = design.values(r, c);
        detail::add_row(dec, design.months[static_cast<std::size_t>(r)], row, fitted);
    }
    return dec;
}

/// Recursive forecast with the component split kept. Events in `future_events`
/// add months to the configured events of the same id.
inline Decomposition forecast_components(const FittedAdditive& fitted, int horizon,
                                         const std::vector<RegressorForecast>& future_regressors = {},
                                         const std::vector<EventSpec>& future_events = {}) {
    require(horizon > 0, "horizon must be positive");
    const auto h = static_cast<std::size_t>(horizon);

    AdditiveConfig config = fitted.config;
    for (const auto& fe : future_events) {
        auto it = std::find_if(config.events.begin(), config.events.end(), [&](const auto& e) { return e.id == fe.id; });
        if (it == config.events.end()) throw UnknownId("event '" + fe.id + "' is not part of the fitted model");
        it->months.insert(it->months.end(), fe.months.begin(), fe.months.end());
    }
    FittedAdditive view = fitted;
    view.config = std::move(config);
    const auto rb = detail::builder_for(view);

    const std::size_t lag = fitted.config.max_lag();
    std::vector<std::vector<double>> x;
    for (std::size_t j = 0; j < fitted.regressor_ids.size(); ++j) {
        const auto& id = fitted.regressor_ids[j];
        auto it = std::find_if(future_regressors.begin(), future_regressors.end(), [&](const auto& r) { return r.id == id; });
        if (it == future_regressors.end()) throw ContractViolation("no future values supplied for regressor '" + id + "'");
        if (it->future_values.size() < h) throw ContractViolation("future values of regressor '" + id + "' are shorter than the horizon");
        auto hist = fitted.tail_regressors[j];
        hist.insert(hist.end(), it->future_values.begin(), it->future_values.begin() + static_cast<long>(h));
        x.push_back(std::move(hist));
    }
    std::vector<double> y = fitted.tail_target;

    Decomposition dec;
    std::vector<double> row;
    for (std::size_t step = 0; step < h; ++step) {
        const std::size_t i = lag + step;
        const auto m = fitted.last_period.plus(static_cast<int>(step) + 1);
        rb.fill(
            m, [&](int l) { return y[i - static_cast<std::size_t>(l)]; },
            [&](std::size_t j, int l) { return x[j][i - static_cast<std::size_t>(l)]; }, row);
        detail::add_row(dec, m, row, fitted);
        y.push_back(dec.total.back());
    }
    return dec;
}

inline MonthlySeries forecast(const FittedAdditive& fitted, int horizon,
                              const std::vector<RegressorForecast>& future_regressors = {},
                              const std::vector<EventSpec>& future_events = {}) {
    auto dec = forecast_components(fitted, horizon, future_regressors, future_events);
    return MonthlySeries(fitted.target_id, fitted.last_period.plus(1), std::move(dec.total));
}

/// Fit on `train`, extrapolate its regressors, forecast `horizon` months.
inline MonthlySeries fit_and_forecast(const AlignedFrame& train, const AdditiveConfig& config, int horizon) {
    const auto fitted = fit(train, config);
    return forecast(fitted, horizon, extrapolate_regressors(train, horizon));
}

inline AdditiveConfig auto_config(const AlignedFrame& train) {
    const auto n = static_cast<int>(train.size());
    if (n < 12) throw InsufficientData("auto_config needs at least 12 training months, got " + std::to_string(n));
    AdditiveConfig c;
    if (n >= 24) c.seasonalities.push_back({12.0, 3});
    c.n_changepoints = std::min(10, n / 8);
    c.changepoint_range = 0.8;
    c.ar_lags = std::min(12, n / 4);
    c.regressor_lags = c.ar_lags;
    c.ridge_lambda = 0.1;
    return c;
}

inline std::string decomposition_to_csv(const Decomposition& dec) {
    std::string out = "period";
    for (std::size_t i = 0; i < component_count; ++i) (out += ',') += component_tag(static_cast<Component>(i));
    out += ",total\n";
    for (std::size_t r = 0; r < dec.months.size(); ++r) {
        out += dec.months[r].to_string();
        for (double v : dec.parts[r]) (out += ',') += format_double(v);
        (out += ',') += format_double(dec.total[r]);
        out += '\n';
    }
    return out;
}

}  // namespace indicast::additive
