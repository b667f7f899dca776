#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "indicast/additive/json.hpp"
#include "indicast/additive/model.hpp"
#include "indicast/harness/config.hpp"
#include "indicast/sarimax/estimate.hpp"
#include "indicast/sarimax/json.hpp"
#include "indicast/select.hpp"

namespace indicast::harness {

/// Where one training window sits inside a dataset frame. The test window is
/// the `horizon` months right after it.
struct Window {
    std::size_t offset = 0;
    std::size_t train_length = 0;
};

inline Window resolve_window(const AlignedFrame& frame, const TrainingRange& range, int horizon) {
    const auto h = static_cast<std::size_t>(horizon);
    const auto n = frame.size();
    Window w;
    if (range.start) {
        if (*range.start < frame.start() || *range.end > frame.last())
            throw ConfigError("training range " + range.start->to_string() + ".." + range.end->to_string() +
                              " is outside the data (" + frame.start().to_string() + ".." + frame.last().to_string() + ")");
        w.offset = static_cast<std::size_t>(months_between(frame.start(), *range.start));
        w.train_length = static_cast<std::size_t>(months_between(*range.start, *range.end) + 1);
    } else {
        if (n <= h) throw ConfigError("data of length " + std::to_string(n) + " leaves nothing to train on with horizon " + std::to_string(h));
        const std::size_t available = n - h;
        w.train_length = range.length ? static_cast<std::size_t>(*range.length) : available;
        if (w.train_length > available)
            throw ConfigError("training length " + std::to_string(w.train_length) + " exceeds the " + std::to_string(available) +
                              " months before the test window");
        w.offset = available - w.train_length;
    }
    if (w.offset + w.train_length + h > n)
        throw ConfigError("the test window after " + frame.target().month_at(w.offset + w.train_length - 1).to_string() + " runs past the data");
    return w;
}

/// Undoes the target preprocessing on forecasts: denormalize, then add the
/// training trend line continued past the window.
struct TargetTransform {
    std::optional<LineFit> trend;
    std::optional<NormalizationParams> normalization;

    std::vector<double> invert(std::vector<double> values, std::size_t first_index) const {
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (normalization) values[i] = normalization->invert(values[i]);
            if (trend) values[i] += trend->at(static_cast<double>(first_index + i));
        }
        return values;
    }
};

struct PreparedTrain {
    AlignedFrame frame;
    TargetTransform target;
    std::vector<std::string> dropped;  // indicators unusable in this window, with the reason
};

/// Interpolation, smoothing, detrending and min-max scaling, all fitted on the
/// training window alone. Indicators with no values or a constant range in the
/// window are dropped and reported; the same problems on the target are errors.
inline PreparedTrain prepare_training(const AlignedFrame& train, const Preprocessing& pre) {
    PreparedTrain out;
    auto transform = [&](const MonthlySeries& s, TargetTransform* record) {
        auto v = s.has_missing() ? interpolate_missing(s) : s;
        if (pre.smooth_window > 1) v = smooth(v, pre.smooth_window);
        if (pre.detrend) {
            auto d = linear_detrend(v);
            if (record) record->trend = LineFit{d.slope, d.intercept};
            v = d.residuals;
        }
        if (pre.normalize) {
            auto [scaled, params] = min_max_normalize(v);
            if (record) record->normalization = params;
            v = scaled;
        }
        return v;
    };
    auto target = transform(train.target(), &out.target);
    std::vector<MonthlySeries> kept;
    for (const auto& ind : train.indicators()) {
        try {
            kept.push_back(transform(ind, nullptr));
        } catch (const Error& e) {
            out.dropped.push_back(ind.id() + ": " + e.code());
        }
    }
    out.frame = AlignedFrame(std::move(target), std::move(kept));
    return out;
}

/// A model spec with everything that depends on the training window decided.
struct ResolvedModel {
    ModelSpec::Kind kind = ModelSpec::Kind::sarimax;
    sarimax::SarimaxOrder order;
    additive::AdditiveConfig config;
    std::optional<sarimax::GridSearchResult> grid;
    std::optional<NormalizationParams> normalization;  // recorded on fitted SARIMAX models
};

inline ResolvedModel resolve_model(const ModelSpec& spec, const AlignedFrame& train, int horizon) {
    ResolvedModel r;
    r.kind = spec.kind;
    if (spec.kind == ModelSpec::Kind::sarimax) {
        r.order = spec.order;
        if (!spec.grid.empty()) {
            const AlignedFrame target_only(train.target(), {});
            r.grid = sarimax::grid_search_order(target_only, spec.grid, horizon);
            r.order = r.grid->best;
        }
    } else {
        r.config = spec.additive ? *spec.additive : additive::auto_config(train);
    }
    return r;
}

struct ModelRun {
    std::vector<double> forecast;
    nlohmann::json fitted;
};

/// Fit on `train` (target plus exactly the regressors to use), extrapolate the
/// regressors linearly, forecast `horizon` months on the training scale.
inline ModelRun fit_and_forecast(const ResolvedModel& model, const AlignedFrame& train, int horizon) {
    const auto future = extrapolate_regressors(train, horizon);
    ModelRun run;
    if (model.kind == ModelSpec::Kind::sarimax) {
        sarimax::FitOptions opts;
        opts.normalization = model.normalization;
        const auto fitted = sarimax::fit(train, model.order, opts);
        run.forecast = sarimax::forecast(fitted, horizon, future).dense();
        run.fitted = sarimax::to_json(fitted);
    } else {
        auto config = model.config;
        const auto ids = train.indicator_ids();
        std::erase_if(config.future_known, [&](const std::string& id) { return std::find(ids.begin(), ids.end(), id) == ids.end(); });
        const auto fitted = additive::fit(train, config);
        run.forecast = additive::forecast(fitted, horizon, future).dense();
        run.fitted = additive::to_json(fitted);
    }
    for (double v : run.forecast)
        if (!std::isfinite(v)) throw ConvergenceFailure("forecast is not finite", {}, 0.0);
    return run;
}

/// Scores a regressor subset inside the training window: for each of `folds`
/// inner origins, spaced half a horizon apart and ending `horizon` months before
/// the window end, fit on the months before the origin and take the MAE over the
/// `horizon` months after it. The score is the mean over origins.
inline select::SubsetEvaluator validation_evaluator(const ResolvedModel& model, const AlignedFrame& train, int horizon,
                                                    int folds = 1) {
    const auto h = static_cast<std::size_t>(horizon);
    const std::size_t stride = std::max<std::size_t>(1, h / 2);
    return [model, train, horizon, h, stride, folds](const std::vector<std::string>& subset) {
        const auto frame = train.with_indicators(subset);
        double total = 0.0;
        for (int f = 0; f < folds; ++f) {
            const std::size_t back = h + static_cast<std::size_t>(f) * stride;
            if (back >= frame.size()) throw InsufficientData("validation fold " + std::to_string(f + 1) + " leaves no training months");
            const auto inner = frame.slice(0, frame.size() - back);
            const auto validation = frame.target().slice(frame.size() - back, h);
            const auto run = fit_and_forecast(model, inner, horizon);
            total += mae(validation.dense(), run.forecast);
        }
        return total / folds;
    };
}

struct CellSettings {
    int horizon = 12;
    Preprocessing preprocessing;
    SelectionSettings selection;
    int forward_jobs = 1;
};

struct CellOutcome {
    select::SelectionResult selection;
    std::vector<std::string> dropped;
    std::optional<sarimax::SarimaxOrder> order;  // SARIMAX cells
    nlohmann::json fitted;
    std::vector<YearMonth> test_months;
    std::vector<std::optional<double>> actual;
    std::vector<double> predicted;
    double oos_mae = 0.0;
    std::vector<std::pair<int, double>> path_oos;  // forward cells: test MAE of each greedy-path prefix
};

namespace detail {

inline double score_against(const std::vector<std::optional<double>>& actual, const std::vector<double>& predicted) {
    std::vector<double> a, p;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        if (!actual[i]) continue;
        a.push_back(*actual[i]);
        p.push_back(predicted[i]);
    }
    if (a.empty()) throw InsufficientData("the test window has no observed target values");
    return mae(a, p);
}

inline select::SelectionResult run_selection(const MethodSpec& method, const ResolvedModel& model, const AlignedFrame& train,
                                             const CellSettings& settings) {
    const select::CandidateSet candidates(train);
    switch (method.method) {
        case select::Method::none: {
            select::SelectionResult r;
            r.method = select::Method::none;
            return r;
        }
        case select::Method::correlation: return select::correlation_select(candidates, settings.selection.correlation);
        case select::Method::lasso: return select::lasso_select(candidates, settings.selection.lasso);
        case select::Method::forward:
            return select::forward_select(candidates, validation_evaluator(model, train, settings.horizon, settings.selection.forward_folds),
                                          {settings.selection.forward_cap, settings.forward_jobs});
        case select::Method::manual: return select::validate_manual(candidates, method.manual_ids);
    }
    throw ContractViolation("unhandled selection method");
}

}  // namespace detail

/// One grid cell: preprocess the training window, select regressors on it,
/// fit, forecast the test window and score it on the original scale. Only the
/// final scoring reads test-window values.
inline CellOutcome run_cell(const AlignedFrame& frame, const Window& window, const MethodSpec& method, const ModelSpec& model,
                            const CellSettings& settings) {
    const auto h = static_cast<std::size_t>(settings.horizon);
    const auto raw_train = frame.slice(window.offset, window.train_length);
    const auto prepared = prepare_training(raw_train, settings.preprocessing);

    auto resolved = resolve_model(model, prepared.frame, settings.horizon);
    resolved.normalization = prepared.target.normalization;

    CellOutcome out;
    out.dropped = prepared.dropped;
    if (model.kind == ModelSpec::Kind::sarimax) out.order = resolved.order;
    out.selection = detail::run_selection(method, resolved, prepared.frame, settings);

    const auto chosen = prepared.frame.with_indicators(out.selection.selected_ids);
    const auto run = fit_and_forecast(resolved, chosen, settings.horizon);
    out.fitted = run.fitted;
    out.predicted = prepared.target.invert(run.forecast, window.train_length);

    const auto test = frame.target().slice(window.offset + window.train_length, h);
    for (std::size_t i = 0; i < h; ++i) {
        out.test_months.push_back(test.month_at(i));
        out.actual.push_back(test[i]);
    }
    out.oos_mae = detail::score_against(out.actual, out.predicted);

    if (out.selection.trace) {
        std::vector<std::string> prefix;
        std::vector<const select::TraceEntry*> path;
        for (const auto& e : out.selection.trace->entries)
            if (e.on_path) path.push_back(&e);
        for (const auto* e : path) {
            try {
                const auto r = fit_and_forecast(resolved, prepared.frame.with_indicators(e->subset), settings.horizon);
                out.path_oos.emplace_back(static_cast<int>(e->subset.size()),
                                          detail::score_against(out.actual, prepared.target.invert(r.forecast, window.train_length)));
            } catch (const Error&) {
                // a prefix that cannot be refit on the full window leaves a hole in the curve
            }
        }
    }
    return out;
}

}  // namespace indicast::harness
