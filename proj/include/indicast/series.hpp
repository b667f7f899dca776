#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdio>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "indicast/errors.hpp"

namespace indicast {

/// A calendar month. Ordering and arithmetic go through a single ordinal
/// (year * 12 + month - 1); no other calendar logic exists.
struct YearMonth {
    int year = 1970;
    int month = 1;  // 1..12

    constexpr int ordinal() const noexcept { return year * 12 + (month - 1); }

    static constexpr YearMonth from_ordinal(int ord) noexcept {
        int y = ord >= 0 ? ord / 12 : -((-ord + 11) / 12);
        return YearMonth{y, ord - y * 12 + 1};
    }

    constexpr YearMonth plus(int months) const noexcept { return from_ordinal(ordinal() + months); }

    /// Parses "YYYY-MM" (also accepts Eurostat's "YYYYMmm" form).
    static YearMonth parse(std::string_view text) {
        auto bad = [&] { return ParseError("invalid month '" + std::string(text) + "', expected YYYY-MM"); };
        if (text.size() != 7 || (text[4] != '-' && text[4] != 'M')) throw bad();
        int y = 0, m = 0;
        for (int i = 0; i < 4; ++i) {
            if (text[i] < '0' || text[i] > '9') throw bad();
            y = y * 10 + (text[i] - '0');
        }
        for (int i = 5; i < 7; ++i) {
            if (text[i] < '0' || text[i] > '9') throw bad();
            m = m * 10 + (text[i] - '0');
        }
        if (m < 1 || m > 12) throw bad();
        return {y, m};
    }

    std::string to_string() const {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
        return buf;
    }

    friend constexpr bool operator==(const YearMonth& a, const YearMonth& b) noexcept {
        return a.ordinal() == b.ordinal();
    }
    friend constexpr auto operator<=>(const YearMonth& a, const YearMonth& b) noexcept {
        return a.ordinal() <=> b.ordinal();
    }
};

/// Months from `a` to `b` (b - a).
constexpr int months_between(YearMonth a, YearMonth b) noexcept { return b.ordinal() - a.ordinal(); }

/// Regularly sampled monthly series. Entries may be missing until the series
/// is passed through interpolate_missing(); model-facing code calls dense().
class MonthlySeries {
public:
    MonthlySeries() = default;

    MonthlySeries(std::string id, YearMonth start, std::vector<std::optional<double>> values)
        : id_(std::move(id)), start_(start), values_(std::move(values)) {
        require(!values_.empty(), "series '" + id_ + "' must contain at least one entry");
    }

    MonthlySeries(std::string id, YearMonth start, const std::vector<double>& values)
        : MonthlySeries(std::move(id), start, std::vector<std::optional<double>>(values.begin(), values.end())) {}

    const std::string& id() const noexcept { return id_; }
    YearMonth start() const noexcept { return start_; }
    YearMonth last() const noexcept { return start_.plus(static_cast<int>(values_.size()) - 1); }
    std::size_t size() const noexcept { return values_.size(); }
    YearMonth month_at(std::size_t i) const noexcept { return start_.plus(static_cast<int>(i)); }

    const std::vector<std::optional<double>>& values() const noexcept { return values_; }
    const std::optional<double>& operator[](std::size_t i) const { return values_[i]; }

    bool has_missing() const noexcept {
        return std::any_of(values_.begin(), values_.end(), [](const auto& v) { return !v.has_value(); });
    }
    std::size_t missing_count() const noexcept {
        return static_cast<std::size_t>(
            std::count_if(values_.begin(), values_.end(), [](const auto& v) { return !v.has_value(); }));
    }

    /// Values as plain doubles; throws MissingValue if any entry is absent.
    std::vector<double> dense() const {
        std::vector<double> out;
        out.reserve(values_.size());
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!values_[i]) {
                throw MissingValue("series '" + id_ + "' has a missing value at " + month_at(i).to_string() +
                                   "; interpolate first");
            }
            out.push_back(*values_[i]);
        }
        return out;
    }

    /// Sub-range [offset, offset + length).
    MonthlySeries slice(std::size_t offset, std::size_t length) const {
        require(offset + length <= values_.size() && length > 0, "slice out of range for series '" + id_ + "'");
        return MonthlySeries(id_, month_at(offset),
                             std::vector<std::optional<double>>(values_.begin() + static_cast<long>(offset),
                                                                values_.begin() + static_cast<long>(offset + length)));
    }

    /// Same values under another id.
    MonthlySeries renamed(std::string id) const {
        MonthlySeries out = *this;
        out.id_ = std::move(id);
        return out;
    }

    /// Same index, new values (length must match).
    MonthlySeries with_values(const std::vector<double>& values) const {
        require(values.size() == values_.size(), "with_values: length mismatch");
        return MonthlySeries(id_, start_, values);
    }

    friend bool operator==(const MonthlySeries&, const MonthlySeries&) = default;

private:
    std::string id_;
    YearMonth start_{};
    std::vector<std::optional<double>> values_;
};

// ---------------------------------------------------------------------------
// Metric

/// Mean absolute error.
inline double mae(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.size() != predicted.size()) {
        throw ContractViolation("mae: length mismatch (" + std::to_string(actual.size()) + " vs " +
                                std::to_string(predicted.size()) + ")");
    }
    if (actual.empty()) throw ContractViolation("mae: empty input");
    double total = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) total += std::abs(actual[i] - predicted[i]);
    return total / static_cast<double>(actual.size());
}

// ---------------------------------------------------------------------------
// Normalization

class NormalizationParams {
public:
    NormalizationParams(double min, double max) : min_(min), max_(max) {
        if (!(max > min)) {
            throw DegenerateRange("normalization range is degenerate (min=" + std::to_string(min) +
                                  ", max=" + std::to_string(max) + ")");
        }
    }

    double min() const noexcept { return min_; }
    double max() const noexcept { return max_; }

    double apply(double v) const noexcept { return (v - min_) / (max_ - min_); }
    double invert(double v) const noexcept { return v * (max_ - min_) + min_; }

    friend bool operator==(const NormalizationParams&, const NormalizationParams&) = default;

private:
    double min_;
    double max_;
};

/// Maps values through `params`; missing entries stay missing.
inline MonthlySeries apply_normalization(const MonthlySeries& series, const NormalizationParams& params) {
    std::vector<std::optional<double>> out(series.values());
    for (auto& v : out)
        if (v) v = params.apply(*v);
    return MonthlySeries(series.id(), series.start(), std::move(out));
}

inline MonthlySeries denormalize(const MonthlySeries& series, const NormalizationParams& params) {
    std::vector<std::optional<double>> out(series.values());
    for (auto& v : out)
        if (v) v = params.invert(*v);
    return MonthlySeries(series.id(), series.start(), std::move(out));
}

/// Min-max scaling onto [0, 1]; missing entries are ignored for the range.
inline std::pair<MonthlySeries, NormalizationParams> min_max_normalize(const MonthlySeries& series) {
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& v : series.values()) {
        if (!v) continue;
        lo = std::min(lo, *v);
        hi = std::max(hi, *v);
    }
    if (!(hi > lo)) throw DegenerateRange("series '" + series.id() + "' is constant; cannot min-max normalize");
    NormalizationParams params(lo, hi);
    return {apply_normalization(series, params), params};
}

// ---------------------------------------------------------------------------
// Interpolation

/// Linear interpolation between known neighbours; leading and trailing gaps
/// take the nearest known value.
inline MonthlySeries interpolate_missing(const MonthlySeries& series) {
    const auto& in = series.values();
    const std::size_t n = in.size();
    std::vector<std::size_t> known;
    for (std::size_t i = 0; i < n; ++i)
        if (in[i]) known.push_back(i);
    if (known.empty()) throw InsufficientData("series '" + series.id() + "' has no known values to interpolate");

    std::vector<double> out(n);
    for (std::size_t i = 0; i <= known.front(); ++i) out[i] = *in[known.front()];
    for (std::size_t i = known.back(); i < n; ++i) out[i] = *in[known.back()];
    for (std::size_t k = 0; k + 1 < known.size(); ++k) {
        const std::size_t a = known[k], b = known[k + 1];
        const double va = *in[a], vb = *in[b];
        out[a] = va;
        for (std::size_t i = a + 1; i < b; ++i) {
            const double frac = static_cast<double>(i - a) / static_cast<double>(b - a);
            out[i] = va + (vb - va) * frac;
        }
        out[b] = vb;
    }
    return MonthlySeries(series.id(), series.start(), out);
}

// ---------------------------------------------------------------------------
// Differencing

/// Lags applied by Δ^d followed by Δ_s^D, in application order.
inline std::vector<std::size_t> differencing_lags(int d, int D, int s) {
    require(d >= 0 && D >= 0, "differencing orders must be nonnegative");
    require(s >= 1 || D == 0, "seasonal period must be positive");
    std::vector<std::size_t> lags(static_cast<std::size_t>(d), 1);
    lags.insert(lags.end(), static_cast<std::size_t>(D), static_cast<std::size_t>(s));
    return lags;
}

/// Heads of every intermediate stage; enough to reconstruct the input.
struct DifferencingInitials {
    std::vector<std::size_t> lags;
    std::vector<std::vector<double>> heads;  // heads[i] = first lags[i] values of stage i
};

struct Differenced {
    std::vector<double> values;
    DifferencingInitials initials;
};

namespace detail {

/// Differencing without the length precondition; the result may be empty.
inline Differenced difference_unchecked(std::span<const double> values, int d, int D, int s) {
    auto lags = differencing_lags(d, D, s);
    std::size_t total = 0;
    for (auto l : lags) total += l;
    require(values.size() >= total, "series shorter than the differencing span");
    Differenced out;
    out.initials.lags = lags;
    std::vector<double> stage(values.begin(), values.end());
    for (auto lag : lags) {
        out.initials.heads.emplace_back(stage.begin(), stage.begin() + static_cast<long>(lag));
        std::vector<double> next(stage.size() - lag);
        for (std::size_t t = lag; t < stage.size(); ++t) next[t - lag] = stage[t] - stage[t - lag];
        stage = std::move(next);
    }
    out.values = std::move(stage);
    return out;
}

}  // namespace detail

inline Differenced difference_with_initials(std::span<const double> values, int d, int D, int s) {
    std::size_t total = 0;
    for (auto l : differencing_lags(d, D, s)) total += l;
    if (values.size() <= total) {
        throw InsufficientData("series of length " + std::to_string(values.size()) +
                               " too short for differencing by " + std::to_string(total));
    }
    return detail::difference_unchecked(values, d, D, s);
}

inline std::vector<double> difference(std::span<const double> values, int d, int D, int s) {
    return difference_with_initials(values, d, D, s).values;
}

inline MonthlySeries difference(const MonthlySeries& series, int d, int D, int s) {
    auto dense = series.dense();
    auto w = difference(dense, d, D, s);
    const std::size_t dropped = dense.size() - w.size();
    return MonthlySeries(series.id(), series.month_at(dropped), w);
}

/// Inverse of difference_with_initials.
inline std::vector<double> undifference(std::span<const double> differenced, const DifferencingInitials& initials) {
    std::vector<double> stage(differenced.begin(), differenced.end());
    for (std::size_t k = initials.lags.size(); k-- > 0;) {
        const std::size_t lag = initials.lags[k];
        std::vector<double> prev(initials.heads[k]);
        prev.reserve(lag + stage.size());
        for (std::size_t t = 0; t < stage.size(); ++t) prev.push_back(stage[t] + prev[t]);
        stage = std::move(prev);
    }
    return stage;
}

/// Integrates future values of the differenced series back to the level
/// scale, using `history` (the level series up to the forecast origin) for
/// the lagged terms of every stage.
inline std::vector<double> integrate_forecast(std::span<const double> future_differenced,
                                              std::span<const double> history, int d, int D, int s) {
    auto lags = differencing_lags(d, D, s);
    // stages[0] = history, stages[i + 1] = stage i differenced by lags[i]
    std::vector<std::vector<double>> stages{std::vector<double>(history.begin(), history.end())};
    for (auto lag : lags) {
        const auto& cur = stages.back();
        require(cur.size() >= lag, "integrate_forecast: history too short");
        std::vector<double> next;
        for (std::size_t t = lag; t < cur.size(); ++t) next.push_back(cur[t] - cur[t - lag]);
        stages.push_back(std::move(next));
    }
    std::vector<double> future(future_differenced.begin(), future_differenced.end());
    for (std::size_t k = lags.size(); k-- > 0;) {
        const std::size_t lag = lags[k];
        std::vector<double> extended = stages[k];
        const std::size_t base = extended.size();
        for (std::size_t h = 0; h < future.size(); ++h) extended.push_back(future[h] + extended[base + h - lag]);
        future.assign(extended.begin() + static_cast<long>(base), extended.end());
    }
    return future;
}

// ---------------------------------------------------------------------------
// Trend, smoothing, correlation

/// Least-squares line over index 0..n-1.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;

    double at(double index) const noexcept { return intercept + slope * index; }
};

inline LineFit fit_line(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n < 2) throw InsufficientData("line fit needs at least 2 points");
    const double mean_t = static_cast<double>(n - 1) / 2.0;
    const double mean_y = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dt = static_cast<double>(i) - mean_t;
        sxy += dt * (values[i] - mean_y);
        sxx += dt * dt;
    }
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = mean_y - fit.slope * mean_t;
    return fit;
}

struct Detrended {
    MonthlySeries residuals;
    double slope = 0.0;
    double intercept = 0.0;
};

inline Detrended linear_detrend(const MonthlySeries& series) {
    auto y = series.dense();
    auto line = fit_line(y);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] -= line.at(static_cast<double>(i));
    return {series.with_values(y), line.slope, line.intercept};
}

/// Centered moving average; near the edges the window is truncated to the
/// months that exist ([1,2,3] with window 3 gives [1.5, 2, 2.5]).
inline MonthlySeries smooth(const MonthlySeries& series, int window) {
    if (window <= 0 || window % 2 == 0) throw ContractViolation("smoothing window must be odd and positive");
    const auto y = series.dense();
    const auto n = static_cast<long>(y.size());
    if (window > n) throw ContractViolation("smoothing window exceeds series length");
    const long half = window / 2;
    std::vector<double> out(y.size());
    for (long i = 0; i < n; ++i) {
        const long lo = std::max(0L, i - half), hi = std::min(n - 1, i + half);
        double acc = 0.0;
        for (long j = lo; j <= hi; ++j) acc += y[static_cast<std::size_t>(j)];
        out[static_cast<std::size_t>(i)] = acc / static_cast<double>(hi - lo + 1);
    }
    return series.with_values(out);
}

inline double pearson_correlation(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ContractViolation("pearson_correlation: length mismatch");
    if (a.size() < 2) throw ContractViolation("pearson_correlation: need at least 2 points");
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) throw UndefinedCorrelation("correlation undefined for a constant series");
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

// ---------------------------------------------------------------------------
// Frames

/// Target plus indicators on one common month index.
class AlignedFrame {
public:
    AlignedFrame() = default;

    AlignedFrame(MonthlySeries target, std::vector<MonthlySeries> indicators)
        : target_(std::move(target)), indicators_(std::move(indicators)) {
        std::unordered_set<std::string> seen;
        for (const auto& ind : indicators_) {
            require(ind.start() == target_.start() && ind.size() == target_.size(),
                    "indicator '" + ind.id() + "' does not cover the frame index");
            require(seen.insert(ind.id()).second, "duplicate indicator id '" + ind.id() + "'");
        }
    }

    const MonthlySeries& target() const noexcept { return target_; }
    const std::vector<MonthlySeries>& indicators() const noexcept { return indicators_; }
    std::size_t size() const noexcept { return target_.size(); }
    YearMonth start() const noexcept { return target_.start(); }
    YearMonth last() const noexcept { return target_.last(); }

    std::vector<YearMonth> index() const {
        std::vector<YearMonth> out;
        for (std::size_t i = 0; i < size(); ++i) out.push_back(target_.month_at(i));
        return out;
    }

    std::vector<std::string> indicator_ids() const {
        std::vector<std::string> ids;
        for (const auto& ind : indicators_) ids.push_back(ind.id());
        return ids;
    }

    const MonthlySeries& indicator(std::string_view id) const {
        for (const auto& ind : indicators_)
            if (ind.id() == id) return ind;
        throw UnknownId("unknown indicator '" + std::string(id) + "'");
    }

    /// Frame restricted to the named indicators, in the given order.
    AlignedFrame with_indicators(std::span<const std::string> ids) const {
        std::vector<MonthlySeries> picked;
        for (const auto& id : ids) picked.push_back(indicator(id));
        return AlignedFrame(target_, std::move(picked));
    }

    AlignedFrame slice(std::size_t offset, std::size_t length) const {
        std::vector<MonthlySeries> inds;
        for (const auto& ind : indicators_) inds.push_back(ind.slice(offset, length));
        return AlignedFrame(target_.slice(offset, length), std::move(inds));
    }

    /// Applies `fn` to every contained series.
    template <class Fn>
    AlignedFrame map(Fn&& fn) const {
        std::vector<MonthlySeries> inds;
        for (const auto& ind : indicators_) inds.push_back(fn(ind));
        return AlignedFrame(fn(target_), std::move(inds));
    }

    friend bool operator==(const AlignedFrame&, const AlignedFrame&) = default;

private:
    MonthlySeries target_;
    std::vector<MonthlySeries> indicators_;
};

/// Trims target and indicators to the intersection of their month ranges.
inline AlignedFrame align_merge(const MonthlySeries& target, const std::vector<MonthlySeries>& indicators) {
    YearMonth lo = target.start(), hi = target.last();
    for (const auto& ind : indicators) {
        lo = std::max(lo, ind.start());
        hi = std::min(hi, ind.last());
    }
    if (hi < lo) throw InsufficientData("series month ranges do not intersect");
    const auto length = static_cast<std::size_t>(months_between(lo, hi) + 1);
    auto trim = [&](const MonthlySeries& s) {
        return s.slice(static_cast<std::size_t>(months_between(s.start(), lo)), length);
    };
    std::vector<MonthlySeries> inds;
    for (const auto& ind : indicators) inds.push_back(trim(ind));
    return AlignedFrame(trim(target), std::move(inds));
}

struct SplitSpec {
    int horizon = 12;
};

/// Holds out the final `horizon` months.
inline std::pair<AlignedFrame, AlignedFrame> split_train_test(const AlignedFrame& frame, SplitSpec spec) {
    if (spec.horizon <= 0) throw ContractViolation("horizon must be positive");
    const auto h = static_cast<std::size_t>(spec.horizon);
    if (h >= frame.size()) {
        throw InsufficientData("horizon " + std::to_string(h) + " leaves no training data in a frame of length " +
                               std::to_string(frame.size()));
    }
    const std::size_t n_train = frame.size() - h;
    return {frame.slice(0, n_train), frame.slice(n_train, h)};
}

}  // namespace indicast
