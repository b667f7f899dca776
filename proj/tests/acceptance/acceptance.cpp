// Acceptance run: one block per criterion, each made of individual checks.
// Prints a PASS/FAIL line per criterion with its wall time and limit, then
// the checks underneath. Exits non-zero when any criterion fails.

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "indicast/eurostat.hpp"
#include "indicast/harness.hpp"
#include "socket_guard.hpp"
#include "test_support.hpp"

using namespace indicast;
namespace fs = std::filesystem;

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

struct Check {
    bool ok;
    std::string text;
};

class Criterion {
public:
    void check(bool ok, std::string text) { checks_.push_back({ok, std::move(text)}); }

    /// `measured <= limit`, with both numbers in the printed line.
    void within(const std::string& what, double measured, double limit) {
        check(measured <= limit, what + ": " + num(measured) + " (limit " + num(limit) + ")");
    }

    void at_least(const std::string& what, int measured, int required, int out_of) {
        check(measured >= required,
              what + ": " + std::to_string(measured) + "/" + std::to_string(out_of) + " (need >= " + std::to_string(required) + ")");
    }

    const std::vector<Check>& checks() const { return checks_; }

private:
    std::vector<Check> checks_;
};

struct Entry {
    std::string id;
    std::string title;
    std::optional<double> seconds_limit;
    std::function<void(Criterion&)> body;
};

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("indicast_acceptance_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<double> gaussian(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> out(n);
    for (auto& v : out) v = z(rng);
    return out;
}

/// Centered, mutually orthogonal vectors with unit population variance.
std::vector<std::vector<double>> orthonormal_noise(std::mt19937_64& rng, std::size_t n, std::size_t k) {
    std::vector<std::vector<double>> out;
    for (std::size_t j = 0; j < k; ++j) {
        auto v = gaussian(rng, n);
        double mean = 0;
        for (double x : v) mean += x;
        for (auto& x : v) x -= mean / static_cast<double>(n);
        for (const auto& u : out) {
            double d = 0;
            for (std::size_t i = 0; i < n; ++i) d += v[i] * u[i];
            for (std::size_t i = 0; i < n; ++i) v[i] -= d / static_cast<double>(n) * u[i];
        }
        double ss = 0;
        for (double x : v) ss += x * x;
        const double scale = std::sqrt(ss / static_cast<double>(n));
        for (auto& x : v) x /= scale;
        out.push_back(v);
    }
    return out;
}

std::vector<double> combine(const std::vector<std::pair<double, const std::vector<double>*>>& terms) {
    std::vector<double> out(terms.front().second->size(), 0.0);
    for (const auto& [w, v] : terms)
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += w * (*v)[i];
    return out;
}

AlignedFrame frame_of(const std::vector<double>& y, const std::vector<std::vector<double>>& xs = {},
                      const std::vector<std::string>& names = {}) {
    std::vector<MonthlySeries> inds;
    for (std::size_t j = 0; j < xs.size(); ++j)
        inds.push_back(testing::series(names.empty() ? "x" + std::to_string(j + 1) : names[j], xs[j]));
    return AlignedFrame(testing::series("y", y), std::move(inds));
}

std::optional<double> diagnostic(const select::SelectionResult& r, const std::string& name) {
    for (const auto& [k, v] : r.diagnostics)
        if (k == name) return v;
    return std::nullopt;
}

std::map<std::string, std::string> read_tree(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = read_file(e.path());
    return files;
}

std::size_t line_count(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

harness::MethodSpec method(select::Method m, std::vector<std::string> ids = {}) { return {m, std::move(ids)}; }

harness::ModelSpec sarimax_model() {
    harness::ModelSpec m;
    m.order = {1, 0, 0};
    return m;
}

harness::ModelSpec additive_model() {
    harness::ModelSpec m;
    m.kind = harness::ModelSpec::Kind::additive;
    return m;
}

std::vector<harness::MethodSpec> all_methods() {
    return {method(select::Method::none), method(select::Method::correlation), method(select::Method::lasso),
            method(select::Method::forward), method(select::Method::manual, {"x01", "x02"})};
}

// ------------------------------------------------------------------ AC1

void metrics_and_transforms(Criterion& c) {
    c.check(mae(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}) == 0.0 &&
                mae(std::vector<double>{1, 2, 3}, std::vector<double>{2, 3, 4}) == 1.0 &&
                mae(std::vector<double>{0, 0, 4}, std::vector<double>{1, 1, 1}) == 5.0 / 3.0,
            "mae worked examples exact");

    std::mt19937_64 rng(101);
    double offset_err = 0.0;
    bool identity = true;
    for (int trial = 0; trial < 200; ++trial) {
        auto y = testing::random_values(rng, 1 + trial % 40);
        identity = identity && mae(y, y) == 0.0;
        const double k = std::uniform_real_distribution<double>(-5, 5)(rng);
        auto shifted = y;
        for (auto& v : shifted) v += k;
        offset_err = std::max(offset_err, std::abs(mae(y, shifted) - std::abs(k)));
    }
    c.check(identity, "mae(y, y) == 0 on 200 random series");
    c.within("max |mae(y, y + k) - |k||", offset_err, 1e-12);

    double norm_err = 0.0;
    bool in_unit = true;
    for (int trial = 0; trial < 200; ++trial) {
        auto y = testing::random_values(rng, 2 + trial % 40, -1e3, 1e3);
        auto [scaled, params] = min_max_normalize(testing::series("x", y));
        for (double v : scaled.dense()) in_unit = in_unit && v >= 0.0 && v <= 1.0;
        const auto back = denormalize(scaled, params).dense();
        for (std::size_t i = 0; i < y.size(); ++i) norm_err = std::max(norm_err, std::abs(back[i] - y[i]) / std::max(1.0, std::abs(y[i])));
    }
    c.check(in_unit, "normalized values lie in [0, 1]");
    c.within("normalize round trip, max relative error", norm_err, 1e-12);

    int exact = 0, total = 0;
    for (int d = 0; d <= 2; ++d)
        for (int D = 0; D <= 1; ++D)
            for (int s : {2, 4, 12})
                for (int trial = 0; trial < 5; ++trial) {
                    const auto y = testing::random_integers(rng, 50);
                    const auto diffed = difference_with_initials(y, d, D, s);
                    exact += diffed.values.size() == 50u - static_cast<std::size_t>(d + D * s) &&
                             undifference(diffed.values, diffed.initials) == y;
                    ++total;
                }
    c.check(exact == total, "difference then undifference is the identity, exactly: " + std::to_string(exact) + "/" +
                                std::to_string(total) + " (d<=2, D<=1, s in {2,4,12}, n=50)");

    double dot_scaled = 0.0, sum_scaled = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        auto y = testing::random_values(rng, 2 + trial % 60, -100, 100);
        const auto res = linear_detrend(testing::series("x", y)).residuals.dense();
        double sum = 0, dot = 0, scale = 0;
        for (std::size_t t = 0; t < res.size(); ++t) {
            sum += res[t];
            dot += static_cast<double>(t) * res[t];
            scale = std::max(scale, std::abs(y[t]));
        }
        const double n = static_cast<double>(res.size());
        dot_scaled = std::max(dot_scaled, std::abs(dot) / (std::max(1.0, scale) * n * n));
        sum_scaled = std::max(sum_scaled, std::abs(sum) / (std::max(1.0, scale) * n));
    }
    c.within("detrend residuals . time index, scaled", dot_scaled, 1e-6);
    c.within("detrend residual sum, scaled", sum_scaled, 1e-9);

    double affine_err = 0.0;
    bool symmetric = true;
    std::uniform_real_distribution<double> scale(0.01, 100), shift(-100, 100);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 3 + trial % 50;
        auto a = testing::random_values(rng, n);
        auto b = testing::random_values(rng, n);
        const double r = pearson_correlation(a, b);
        symmetric = symmetric && r == pearson_correlation(b, a);
        const double k = scale(rng), s = shift(rng);
        for (auto& v : a) v = k * v + s;
        affine_err = std::max(affine_err, std::abs(pearson_correlation(a, b) - r));
    }
    c.check(symmetric, "pearson symmetric, bitwise");
    c.within("pearson change under positive affine maps", affine_err, 1e-12);
}

// ------------------------------------------------------------------ AC2

void sarimax_recovery(Criterion& c) {
    const sarimax::SarimaxOrder ar1{1, 0, 0};
    double sum = 0.0, worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto y = testing::simulate_ar1(0.7, 300, seed);
        const auto fitted = sarimax::fit(frame_of(y), ar1);
        const double err = std::abs(fitted.params.alpha[0] - 0.7);
        sum += err;
        worst = std::max(worst, err);
    }
    c.within("AR(1) phi=0.7 n=300, mean |alpha - 0.7| over 10 seeds", sum / 10.0, 0.05);
    c.within("AR(1) phi=0.7 n=300, max |alpha - 0.7| over 10 seeds", worst, 0.1);

    double beta_worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> z(0.0, 1.0);
        std::vector<double> x(300), y(300);
        double u = 0.0;
        for (std::size_t t = 0; t < 300; ++t) {
            x[t] = z(rng);
            u = 0.5 * u + 0.1 * z(rng);
            y[t] = 2.0 * x[t] + u;
        }
        const auto fitted = sarimax::fit(frame_of(y, {x}), ar1);
        beta_worst = std::max(beta_worst, std::abs(fitted.params.beta[0] - 2.0));
    }
    c.within("y = 2x + AR(1) noise, max |beta - 2| over 10 seeds", beta_worst, 0.2);
}

// ------------------------------------------------------------------ AC3

void sarimax_hand_recursion(Criterion& c) {
    using sarimax::SarimaxOrder;
    using sarimax::SarimaxParams;
    auto max_diff = [](const std::vector<double>& a, const std::vector<double>& b) {
        if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
        double m = 0;
        for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
        return m;
    };

    const SarimaxOrder ar{1, 0, 0};
    auto p1 = SarimaxParams::zeros(ar, 0);
    p1.alpha = {0.5};
    const auto r1 = sarimax::css_residuals(ar, p1, std::vector<double>{1, 2, 3});
    c.within("(1,0,0) alpha=0.5, y=[1,2,3] vs [1.5, 2.0]", max_diff(r1.residuals, {1.5, 2.0}), 1e-12);

    const SarimaxOrder ma{0, 0, 1};
    auto p2 = SarimaxParams::zeros(ma, 0);
    p2.theta = {0.5};
    const auto r2 = sarimax::css_residuals(ma, p2, std::vector<double>{1, 1});
    c.within("(0,0,1) theta=0.5, y=[1,1] vs [1, 0.5]", max_diff(r2.residuals, {1.0, 0.5}), 1e-12);

    const SarimaxOrder white{0, 0, 0};
    auto p3 = SarimaxParams::zeros(white, 1);
    p3.beta = {1.0};
    const auto r3 = sarimax::css_residuals(white, p3, frame_of({1, 2, 3}, {{1, 2, 3}}));
    c.within("(0,0,0) + x, beta=1 vs [0,0,0]", max_diff(r3.residuals, {0, 0, 0}), 1e-12);
    c.within("(0,0,0) + x, css", std::abs(r3.css), 1e-12);

    std::mt19937_64 rng(303);
    const SarimaxOrder order{2, 1, 1, 1, 0, 1, 4};
    bool identical = true;
    for (int trial = 0; trial < 20; ++trial) {
        const auto y = testing::random_values(rng, 40);
        const auto x1 = testing::random_values(rng, 40);
        const auto x2 = testing::random_values(rng, 40);
        auto with = SarimaxParams::zeros(order, 2);
        with.c = 0.1;
        with.alpha = {0.3, -0.2};
        with.theta = {0.4};
        with.phi = {0.2};
        with.Theta = {-0.3};
        auto without = with;
        without.beta.clear();
        const auto a = sarimax::css_residuals(order, with, frame_of(y, {x1, x2}));
        const auto b = sarimax::css_residuals(order, without, frame_of(y));
        identical = identical && a.residuals == b.residuals && a.css == b.css;
    }
    c.check(identical, "beta = 0 equals the no-regressor model, element-wise exact (20 random cases)");
}

// ------------------------------------------------------------------ AC4

/// The same fitted model with the autoregressive columns removed.
additive::FittedAdditive without_ar(const additive::FittedAdditive& f) {
    auto out = f;
    out.columns.clear();
    out.coefficients.clear();
    for (std::size_t i = 0; i < f.columns.size(); ++i) {
        if (f.columns[i].component == additive::Component::A) continue;
        out.columns.push_back(f.columns[i]);
        out.coefficients.push_back(f.coefficients[i]);
    }
    out.config.ar_lags = 0;
    const std::size_t lag = out.config.max_lag();
    out.tail_target.erase(out.tail_target.begin(), out.tail_target.end() - static_cast<long>(lag));
    for (auto& t : out.tail_regressors) t.erase(t.begin(), t.end() - static_cast<long>(lag));
    return out;
}

void additive_model_properties(Criterion& c) {
    std::vector<double> line;
    for (int i = 0; i < 30; ++i) line.push_back(3.5 - 0.25 * i);
    additive::AdditiveConfig trend;
    trend.ridge_lambda = 0.0;
    const auto fl = additive::fit(frame_of(line), trend);
    c.within("exact line, trend only, lambda=0: in-sample MAE", mae(line, fl.fitted_values), 1e-6);

    std::vector<double> wave;
    for (int i = 0; i < 48; ++i) {
        const double m = static_cast<double>(YearMonth{2016, 1}.plus(i).ordinal());
        wave.push_back(2.0 + std::sin(2 * std::numbers::pi * m / 12.0) - 0.5 * std::cos(4 * std::numbers::pi * m / 12.0));
    }
    additive::AdditiveConfig seasonal;
    seasonal.seasonalities = {{12.0, 3}};
    seasonal.ridge_lambda = 1e-6;
    const auto fw = additive::fit(frame_of(wave), seasonal);
    c.within("period-12 sinusoid, Fourier order 3: in-sample MAE", mae(wave, fw.fitted_values), 1e-6);

    std::mt19937_64 rng(404);
    auto half = testing::random_values(rng, 20);
    std::vector<double> y = half;
    y.insert(y.end(), half.rbegin(), half.rend());
    additive::AdditiveConfig heavy;
    heavy.n_changepoints = 3;
    heavy.seasonalities = {{12.0, 2}};
    heavy.events = {{"e", {{2017, 3}}}};
    heavy.ridge_lambda = 1e12;
    const auto fr = additive::fit(frame_of(y), heavy);
    double penalized = 0.0;
    for (std::size_t i = 0; i < fr.columns.size(); ++i)
        if (fr.columns[i].penalized) penalized = std::max(penalized, std::abs(fr.coefficients[i]));
    double mean = 0.0;
    for (double v : y) mean += v / static_cast<double>(y.size());
    c.within("lambda=1e12: max |penalized coefficient|", penalized, 1e-6);
    c.within("lambda=1e12: |intercept - mean(y)|", std::abs(fr.coefficients[0] - mean), 1e-6);

    bool equal = true;
    for (int trial = 0; trial < 20; ++trial) {
        std::normal_distribution<double> z(0.0, 1.0);
        const std::size_t n = 36 + static_cast<std::size_t>(trial % 12);
        std::vector<double> target(n), reg(n);
        double a = 0, b = 0;
        for (std::size_t i = 0; i < n; ++i) {
            target[i] = (a += z(rng));
            reg[i] = (b += z(rng));
        }
        const auto fr2 = frame_of(target, {reg});
        additive::AdditiveConfig cfg;
        cfg.seasonalities = {{12.0, 2}};
        cfg.n_changepoints = trial % 3;
        cfg.ar_lags = 1 + trial % 4;
        cfg.regressor_lags = trial % 2;
        auto f = additive::fit(fr2, cfg);
        for (std::size_t i = 0; i < f.columns.size(); ++i)
            if (f.columns[i].component == additive::Component::A) f.coefficients[i] = 0.0;
        const auto future = extrapolate_regressors(fr2, 9);
        equal = equal && additive::forecast(f, 9, future).dense() == additive::forecast(without_ar(f), 9, future).dense();
    }
    c.check(equal, "zero AR coefficients forecast exactly like the model without AR terms (20 random cases)");
}

// ------------------------------------------------------------------ AC5

void lasso_oracles(Criterion& c) {
    std::mt19937_64 rng(505);
    const std::size_t n = 64;
    const auto e = orthonormal_noise(rng, n, 5);
    const std::vector<double> z{2.0, -1.0, 0.3, -0.45, 0.7};
    std::vector<double> y(n, 5.0);
    for (std::size_t j = 0; j < 5; ++j)
        for (std::size_t i = 0; i < n; ++i) y[i] += z[j] * e[j][i];
    const auto r = select::lasso_select(select::CandidateSet(frame_of(y, e)), select::LassoPolicy::fixed(0.5));
    double err = 0.0;
    std::vector<std::string> expected;
    for (std::size_t j = 0; j < 5; ++j) {
        const double want = (z[j] > 0 ? 1 : -1) * std::max(0.0, std::abs(z[j]) - 0.5);
        const auto got = diagnostic(r, "coef/x" + std::to_string(j + 1));
        err = std::max(err, got ? std::abs(*got - want) : std::numeric_limits<double>::infinity());
        if (want != 0.0) expected.push_back("x" + std::to_string(j + 1));
    }
    c.within("orthonormal design, lambda=0.5: max |coef - soft-threshold(OLS)|", err, 1e-6);
    c.check(r.selected_ids == expected, "orthonormal design selects exactly the surviving coefficients");

    const auto yk = gaussian(rng, 50);
    std::vector<std::vector<double>> xs;
    for (int j = 0; j < 5; ++j) {
        auto x = gaussian(rng, 50);
        for (std::size_t i = 0; i < 50; ++i) x[i] += 0.5 * (j + 1) * yk[i];
        xs.push_back(x);
    }
    double ymean = 0;
    for (double v : yk) ymean += v / 50;
    double lmax = 0;
    for (const auto& x : xs) {
        double m = 0, ss = 0, dot = 0;
        for (double v : x) m += v / 50;
        for (double v : x) ss += (v - m) * (v - m) / 50;
        for (std::size_t i = 0; i < 50; ++i) dot += (x[i] - m) / std::sqrt(ss) * (yk[i] - ymean);
        lmax = std::max(lmax, std::abs(dot) / 50);
    }
    const select::CandidateSet set(frame_of(yk, xs));
    bool empty = true;
    for (double lambda : {lmax * (1 + 1e-12), 2 * lmax, 10 * lmax}) empty = empty && select::lasso_select(set, select::LassoPolicy::fixed(lambda)).selected_ids.empty();
    c.check(empty, "lambda >= lambda_max (" + num(lmax) + ") gives an empty selection");

    double ols_err = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::Index rows = 40, p = 6;
        Eigen::MatrixXd raw(rows, p);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < p; ++j) raw(i, j) = gaussian(rng, 1)[0] + (j > 0 ? 0.3 * raw(i, j - 1) : 0.0);
        Eigen::VectorXd target = raw * Eigen::VectorXd::LinSpaced(p, -1, 2);
        for (Eigen::Index i = 0; i < rows; ++i) target(i) += 0.3 * gaussian(rng, 1)[0];
        const auto s = select::standardize(raw, target);
        const auto fit = select::lasso_coordinate_descent(s.X, s.y, 0.0);
        const Eigen::VectorXd ols = s.X.colPivHouseholderQr().solve(s.y);
        ols_err = std::max(ols_err, (fit.beta - ols).cwiseAbs().maxCoeff());
    }
    c.within("lambda=0: max |coef - OLS| over 10 full-rank problems", ols_err, 1e-6);
}

// ------------------------------------------------------------------ AC6

void correlation_fixtures(Criterion& c) {
    const select::CorrelationThresholds defaults{};
    c.check(defaults.target == 0.75 && defaults.mutual == 0.30, "default thresholds 0.75 / 0.30");

    std::mt19937_64 rng(606);
    const auto y = gaussian(rng, 48);
    const auto dup = select::correlation_select(select::CandidateSet(frame_of(y, {y, y})));
    c.check(dup.selected_ids == std::vector<std::string>{"x1"} && diagnostic(dup, "target_corr/x2").value_or(0) >= 0.75,
            "x1 = target, x2 = copy: both pass stage 1, only [x1] admitted");

    const auto basis = orthonormal_noise(rng, 60, 4);
    const auto weak1 = combine({{0.7, &basis[0]}, {std::sqrt(1 - 0.49), &basis[1]}});
    const auto weak2 = combine({{-0.5, &basis[0]}, {std::sqrt(1 - 0.25), &basis[2]}});
    const auto none = select::correlation_select(select::CandidateSet(frame_of(basis[0], {weak1, weak2, basis[3]})));
    c.check(none.selected_ids.empty(), "no candidate reaches 0.75: empty selection");

    // Target correlations 0.9 and 0.8 imply corr(x1, x2) >= 0.458, so the pair
    // is built at 0.5 and checked against thresholds on both sides of it.
    const auto e = orthonormal_noise(rng, 80, 3);
    const double a = (0.5 - 0.72) / std::sqrt(0.19);
    const double b = std::sqrt(1 - 0.64 - a * a);
    const auto x1 = combine({{0.9, &e[0]}, {std::sqrt(0.19), &e[1]}});
    const auto x2 = combine({{0.8, &e[0]}, {a, &e[1]}, {b, &e[2]}});
    const select::CandidateSet pair(frame_of(e[0], {x2, x1}, {"x2", "x1"}));
    const auto loose = select::correlation_select(pair, {0.75, 0.6});
    const auto strict = select::correlation_select(pair);
    c.check(loose.selected_ids == std::vector<std::string>{"x1", "x2"},
            "target-corr 0.9 / 0.8, mutual 0.5 < 0.6: both admitted in order [x1, x2]");
    c.check(strict.selected_ids == std::vector<std::string>{"x1"}, "same pair under the default 0.30 mutual rule: [x1]");
}

// ------------------------------------------------------------------ AC7

/// Deterministic pseudo-score per subset, independent of insertion order.
double hashed_score(const std::vector<std::string>& subset, std::uint64_t salt) {
    auto sorted = subset;
    std::sort(sorted.begin(), sorted.end());
    std::uint64_t h = 1469598103934665603ull ^ salt;
    for (const auto& id : sorted) {
        for (char ch : id) h = (h ^ static_cast<unsigned char>(ch)) * 1099511628211ull;
        h = (h ^ 0xff) * 1099511628211ull;
    }
    return static_cast<double>(h % 1000003) / 1000.0;
}

struct Greedy {
    std::vector<std::vector<std::string>> path;
    std::vector<double> scores;
    std::vector<std::string> best;
    double best_score = 0.0;
};

Greedy naive_greedy(const std::vector<std::string>& ids, const select::SubsetEvaluator& f, int cap) {
    Greedy g;
    std::vector<std::string> cur;
    g.path.push_back(cur);
    g.scores.push_back(f(cur));
    g.best = cur;
    g.best_score = g.scores.back();
    std::vector<bool> used(ids.size(), false);
    for (int step = 0; step < cap; ++step) {
        int pick = -1;
        double pick_score = 0;
        for (std::size_t j = 0; j < ids.size(); ++j) {
            if (used[j]) continue;
            auto s = cur;
            s.push_back(ids[j]);
            const double v = f(s);
            if (pick < 0 || v < pick_score) pick = static_cast<int>(j), pick_score = v;
            if (v < g.best_score) g.best_score = v, g.best = s;
        }
        if (pick < 0) break;
        used[static_cast<std::size_t>(pick)] = true;
        cur.push_back(ids[static_cast<std::size_t>(pick)]);
        g.path.push_back(cur);
        g.scores.push_back(pick_score);
    }
    return g;
}

void forward_oracle(Criterion& c) {
    const select::CandidateSet set(frame_of({1, 2, 3, 4}, {{1, 2, 3, 4}, {2, 2, 3, 1}, {5, 1, 2, 2}, {0, 1, 0, 1}}));
    int same_path = 0, min_score = 0;
    for (std::uint64_t salt = 0; salt < 50; ++salt) {
        const select::SubsetEvaluator f = [salt](const std::vector<std::string>& s) { return hashed_score(s, salt); };
        const auto r = select::forward_select(set, f, {4, 1});
        const auto oracle = naive_greedy(set.ids(), f, 4);
        std::vector<std::vector<std::string>> path;
        std::vector<double> scores;
        double lowest = std::numeric_limits<double>::infinity();
        for (const auto& entry : r.trace->entries) {
            if (entry.on_path) path.push_back(entry.subset), scores.push_back(*entry.score);
            if (entry.score) lowest = std::min(lowest, *entry.score);
        }
        same_path += path == oracle.path && scores == oracle.scores && r.selected_ids == oracle.best && *r.score == oracle.best_score;
        min_score += *r.score == lowest;
    }
    c.check(same_path == 50, "greedy trace identical to a naive re-implementation, 4 candidates, cap 4: " + std::to_string(same_path) + "/50");
    c.check(min_score == 50, "returned score equals the minimum over the trace: " + std::to_string(min_score) + "/50");

    harness::SyntheticSpec spec;
    spec.seed = 707;
    const auto data = harness::generate_synthetic(spec);
    harness::CellSettings serial, parallel;
    parallel.forward_jobs = 8;
    const auto a = harness::run_cell(data.frame, {0, 64}, method(select::Method::forward), sarimax_model(), serial);
    const auto b = harness::run_cell(data.frame, {0, 64}, method(select::Method::forward), sarimax_model(), parallel);
    c.check(select::to_json(a.selection) == select::to_json(b.selection) && a.predicted == b.predicted,
            "forward selection on planted-driver data identical under 1 and 8 jobs");
}

// ------------------------------------------------------------------ AC8

void planted_drivers(Criterion& c) {
    int sarimax_wins = 0, additive_wins = 0, recovered = 0, cells_ok = 0;
    std::string failed;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        harness::ExperimentConfig config;
        harness::SyntheticSpec spec;
        spec.seed = seed;
        config.datasets.push_back({"syn", spec});
        config.ranges.push_back({});
        config.methods = all_methods();
        config.models = {sarimax_model(), additive_model()};
        const auto run = harness::run_experiment(config, {0, false});
        const auto truth = harness::generate_synthetic(spec);
        for (const auto& cell : run.cells) {
            cells_ok += cell.ok();
            if (!cell.ok()) failed += " seed " + std::to_string(seed) + " " + cell.configuration() + " (" + cell.failure_code + ")";
        }

        auto cell = [&](std::size_t model, std::size_t m) -> const harness::CellRecord& { return run.cells[model * 5 + m]; };
        auto beats = [&](std::size_t model) { return cell(model, 3).ok() && cell(model, 0).ok() && cell(model, 3).oos_mae() < cell(model, 0).oos_mae(); };
        sarimax_wins += beats(0);
        additive_wins += beats(1);
        if (cell(0, 3).ok()) {
            const auto& ids = cell(0, 3).outcome->selection.selected_ids;
            recovered += std::any_of(truth.driver_ids.begin(), truth.driver_ids.end(),
                                     [&](const std::string& d) { return std::find(ids.begin(), ids.end(), d) != ids.end(); });
        }
    }
    c.check(cells_ok == 100, "all 100 cells (10 seeds x 5 methods x 2 models) completed: " + std::to_string(cells_ok) +
                                  (failed.empty() ? "" : ", failed:" + failed));
    c.at_least("SARIMAX forward beats none", sarimax_wins, 8, 10);
    c.at_least("additive forward beats none", additive_wins, 7, 10);
    c.at_least("SARIMAX forward recovers >= 1 planted driver", recovered, 8, 10);
}

// ------------------------------------------------------------------ AC9

void test_isolation(Criterion& c) {
    harness::SyntheticSpec spec;
    spec.seed = 909;
    const auto frame = harness::generate_synthetic(spec).frame;
    const auto poisoned = frame.map([](const MonthlySeries& m) {
        auto v = m.values();
        for (std::size_t i = 64; i < v.size(); ++i) v[i] = i % 2 ? 1e6 : -1e6;
        return MonthlySeries(m.id(), m.start(), v);
    });
    int unchanged = 0, total = 0;
    for (const auto& model : {sarimax_model(), additive_model()})
        for (const auto& m : all_methods()) {
            const auto clean = harness::run_cell(frame, {0, 64}, m, model, {});
            const auto dirty = harness::run_cell(poisoned, {0, 64}, m, model, {});
            unchanged += select::to_json(clean.selection) == select::to_json(dirty.selection) && clean.fitted == dirty.fitted &&
                         clean.predicted == dirty.predicted && clean.oos_mae != dirty.oos_mae;
            ++total;
        }
    c.check(unchanged == total, "sentinel-poisoned test window leaves selection, fit and forecast unchanged: " +
                                    std::to_string(unchanged) + "/" + std::to_string(total) + " cells");

    const auto base = scratch("determinism");
    harness::ExperimentConfig config;
    harness::SyntheticSpec s;
    s.seed = 910;
    config.datasets.push_back({"syn", s});
    harness::TrainingRange shorter;
    shorter.length = 48;
    config.ranges = {{}, shorter};
    config.methods = all_methods();
    config.models = {sarimax_model(), additive_model()};
    std::vector<std::map<std::string, std::string>> trees;
    std::vector<std::string> tables;
    for (int jobs : {1, 1, 8}) {
        config.output = base / ("jobs" + std::to_string(jobs) + "_" + std::to_string(trees.size()));
        const auto run = harness::run_experiment(config, {jobs, true});
        harness::write_reports(run, config.output);
        trees.push_back(read_tree(config.output));
        tables.push_back(harness::emit_table(harness::make_table(run), harness::TableFormat::csv));
    }
    c.check(tables[0] == tables[1] && tables[0] == tables[2], "results table bytes identical across repeats and 1 vs 8 jobs");
    c.check(trees[0] == trees[1] && trees[0] == trees[2],
            "all " + std::to_string(trees[0].size()) + " run artifacts byte-identical across repeats and 1 vs 8 jobs");
    fs::remove_all(base);
}

// ----------------------------------------------------------------- AC10

void eurostat_offline(Criterion& c) {
    const fs::path fixtures = fs::path(INDICAST_FIXTURES) / "eurostat";
    const auto snapshot = eurostat::parse_toc(read_file(fixtures / "toc.txt"), "2023-09-30T00:00:00Z");
    c.check(snapshot.descriptors.size() == 5, "fixture catalog parses into " + std::to_string(snapshot.descriptors.size()) + " descriptors (want 5)");

    const auto root = scratch("eurostat");
    fs::create_directories(root / "raw");
    for (const char* f : {"toc.txt", "ei_bsin_m.json", "ext_st_m.json"}) fs::copy_file(fixtures / f, root / "raw" / f);
    const int sockets_before = indicast::testing::socket_attempts.load();
    eurostat::ClientOptions options;
    options.offline = true;
    options.cache_dir = root;
    eurostat::Client client(options);
    const eurostat::Cache cache(root);
    eurostat::FunnelOptions funnel;
    funnel.keywords = eurostat::parse_keywords(read_file(fixtures / "keywords.txt"));
    const auto report = eurostat::run_funnel(client, cache, funnel);
    const std::vector<std::pair<std::string, std::size_t>> expected{
        {"catalog", 5}, {"monthly", 3}, {"parameters(business,trade)", 2}, {"coverage(2016-01)", 1}};
    std::string counts;
    for (const auto& [stage, n] : report.stage_counts) counts += (counts.empty() ? "" : ", ") + stage + "=" + std::to_string(n);
    c.check(report.stage_counts == expected, "stage counts " + counts);
    c.check(report.failures.empty() && report.manifest.series.size() == 1, "one representative series cached, no failures");
    const int attempts = indicast::testing::socket_attempts.load() - sockets_before;
    c.check(attempts == 0 && client.live_requests() == 0,
            "offline funnel socket attempts: " + std::to_string(attempts) + ", live requests: " + std::to_string(client.live_requests()));

    c.check(cache.load_catalog().descriptors.size() == 5, "funnel stored the 5-entry catalog in the cache");
    c.check(cache.load_manifest() == report.manifest, "manifest round trip equal");

    std::mt19937_64 rng(1010);
    std::uniform_real_distribution<double> val(-1e6, 1e6);
    std::vector<std::optional<double>> values(40);
    for (auto& v : values) v = val(rng);
    values[3] = std::nullopt;
    values[4] = 0.1 + 0.2;
    values[5] = -0.0;
    values[6] = 5e-324;
    values[7] = 1.7976931348623157e308;
    const MonthlySeries s("rt_m", {2016, 1}, values);
    const eurostat::SeriesKey key{"rt_m", {{"freq", "M"}, {"geo", "DE"}}};
    cache.store_series(key, s);
    const auto back = cache.load_series(key);
    bool bit_exact = back.size() == s.size();
    for (std::size_t i = 0; bit_exact && i < s.size(); ++i) {
        bit_exact = back[i].has_value() == s[i].has_value();
        if (bit_exact && s[i]) bit_exact = std::bit_cast<std::uint64_t>(*back[i]) == std::bit_cast<std::uint64_t>(*s[i]);
    }
    c.check(bit_exact, "series cache round trip bit-exact (incl. missing, -0.0, subnormal, max double)");
    cache.store_catalog(snapshot);
    c.check(cache.load_catalog() == snapshot, "catalog cache round trip equal");
    fs::remove_all(root);
}

// ----------------------------------------------------------------- AC11

void report_shape(Criterion& c) {
    const auto dir = scratch("report");
    harness::ExperimentConfig config;
    harness::SyntheticSpec spec;
    spec.seed = 1111;
    config.datasets.push_back({"syn", spec});
    config.ranges.push_back({});
    config.methods = {method(select::Method::none), method(select::Method::forward)};
    config.models = {sarimax_model()};
    config.output = dir / "run";
    const auto run = harness::run_experiment(config);
    const auto table = harness::make_table(run);

    const auto csv = harness::emit_table(table, harness::TableFormat::csv);
    const auto md = harness::emit_table(table, harness::TableFormat::markdown);
    c.check(line_count(csv) == 5, "2-method x 1-column CSV table: header + " + std::to_string(line_count(csv) - 1) + " data rows (want 4)");
    const auto exog_rows = [](const std::string& text) {
        std::size_t n = 0;
        for (std::size_t pos = 0; (pos = text.find(harness::kExogRowLabel, pos)) != std::string::npos; ++pos) ++n;
        return n;
    };
    c.check(exog_rows(csv) == 2 && exog_rows(md) == 2, "one \"Nbr. Exogenous variables\" sub-row per method in CSV and markdown");
    c.check(first_line(csv) == "model,method,syn_64", "column header \"" + first_line(csv) + "\"");
    int best = 0;
    for (const auto& r : table.rows) best += r.cells[0].best;
    c.check(best == 1, "exactly one best cell flagged per column");

    const auto files = harness::emit_plot_data(run, "syn_64", dir / "plots");
    const auto forecasts = read_file(files.forecasts);
    const auto errors = read_file(files.abs_errors);
    const auto development = read_file(files.score_development);
    bool four_columns = true;
    {
        std::size_t start = forecasts.find('\n') + 1;
        while (start < forecasts.size()) {
            const auto end = forecasts.find('\n', start);
            const auto row = forecasts.substr(start, end - start);
            four_columns = four_columns && std::count(row.begin(), row.end(), ',') == 3;
            start = end + 1;
        }
    }
    c.check(line_count(forecasts) == 13 && four_columns && first_line(forecasts) == "period,actual,sarimax/none,sarimax/forward",
            "forecasts.csv: 12 rows x 4 columns (period, actual, 2 configurations)");
    c.check(line_count(errors) == 1 + 12 * 2 && first_line(errors) == "configuration,period,abs_error",
            "abs_errors.csv: " + std::to_string(line_count(errors) - 1) + " rows (want 12 x 2)");
    c.check(line_count(development) >= 2 && first_line(development) == "n_vars,mean_oos_mae",
            "score_development.csv non-empty with header n_vars,mean_oos_mae");
    fs::remove_all(dir);
}

}  // namespace

int main() {
    const std::vector<Entry> criteria{
        {"AC1", "metric and transform suite", 5.0, metrics_and_transforms},
        {"AC2", "SARIMAX parameter recovery", 60.0, sarimax_recovery},
        {"AC3", "SARIMAX hand-recursion oracle", std::nullopt, sarimax_hand_recursion},
        {"AC4", "additive model fits and equivalences", 10.0, additive_model_properties},
        {"AC5", "LASSO oracles", 10.0, lasso_oracles},
        {"AC6", "correlation selection fixtures", std::nullopt, correlation_fixtures},
        {"AC7", "forward selection oracle and determinism", 60.0, forward_oracle},
        {"AC8", "planted-driver grid (10 seeds, n=76, h=12)", 300.0, planted_drivers},
        {"AC9", "test isolation and run determinism", std::nullopt, test_isolation},
        {"AC10", "Eurostat offline funnel", 5.0, eurostat_offline},
        {"AC11", "report shape", std::nullopt, report_shape},
    };

    int passed = 0;
    for (const auto& entry : criteria) {
        Criterion crit;
        const auto t0 = std::chrono::steady_clock::now();
        std::string error;
        try {
            entry.body(crit);
        } catch (const std::exception& e) {
            error = e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        bool ok = error.empty();
        for (const auto& ch : crit.checks()) ok = ok && ch.ok;
        const bool in_time = !entry.seconds_limit || secs < *entry.seconds_limit;
        ok = ok && in_time;
        passed += ok;

        std::printf("%s %-4s %s  [%.2f s", ok ? "PASS" : "FAIL", entry.id.c_str(), entry.title.c_str(), secs);
        if (entry.seconds_limit) std::printf(", limit %.0f s%s", *entry.seconds_limit, in_time ? "" : " EXCEEDED");
        std::printf("]\n");
        for (const auto& ch : crit.checks()) std::printf("       %s %s\n", ch.ok ? "ok  " : "FAIL", ch.text.c_str());
        if (!error.empty()) std::printf("       FAIL exception: %s\n", error.c_str());
    }
    std::printf("%d/%zu acceptance criteria passed\n", passed, criteria.size());
    return passed == static_cast<int>(criteria.size()) ? 0 : 1;
}
