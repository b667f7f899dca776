#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "indicast/errors.hpp"
#include "indicast/series.hpp"

namespace indicast::sarimax {

/// SARIMAX(p,d,q)(P,D,Q)_s structure.
struct SarimaxOrder {
    int p = 0, d = 0, q = 0;
    int P = 0, D = 0, Q = 0;
    int s = 12;

    bool seasonal() const noexcept { return P > 0 || D > 0 || Q > 0; }

    /// Season length as used by the recursion (1 when no seasonal part).
    std::size_t period() const noexcept { return seasonal() ? static_cast<std::size_t>(s) : 1; }

    /// Observations consumed by differencing.
    std::size_t differencing_span() const noexcept {
        return static_cast<std::size_t>(d) + static_cast<std::size_t>(D) * period();
    }

    /// First differenced index with a residual: max(p, P*s).
    std::size_t residual_start() const noexcept {
        return std::max(static_cast<std::size_t>(p), static_cast<std::size_t>(P) * period());
    }

    /// Longest lag of any AR or MA term.
    std::size_t max_lag() const noexcept {
        return std::max({static_cast<std::size_t>(p), static_cast<std::size_t>(q),
                         static_cast<std::size_t>(P) * period(), static_cast<std::size_t>(Q) * period()});
    }

    void validate() const {
        require(p >= 0 && d >= 0 && q >= 0 && P >= 0 && D >= 0 && Q >= 0, "SARIMAX orders must be nonnegative");
        require(s >= 1, "season length must be positive");
    }

    std::string to_string() const {
        return "(" + std::to_string(p) + "," + std::to_string(d) + "," + std::to_string(q) + ")(" + std::to_string(P) +
               "," + std::to_string(D) + "," + std::to_string(Q) + ")_" + std::to_string(s);
    }

    auto key() const noexcept { return std::tie(p, d, q, P, D, Q, s); }
    friend bool operator==(const SarimaxOrder& a, const SarimaxOrder& b) noexcept { return a.key() == b.key(); }
    friend auto operator<=>(const SarimaxOrder& a, const SarimaxOrder& b) noexcept { return a.key() <=> b.key(); }
};

struct SarimaxParams {
    double c = 0.0;
    std::vector<double> alpha;  // nonseasonal AR, lags 1..p
    std::vector<double> theta;  // nonseasonal MA, lags 1..q
    std::vector<double> phi;    // seasonal AR, lags s..P*s
    std::vector<double> Theta;  // seasonal MA, lags s..Q*s
    std::vector<double> beta;   // exogenous coefficients
    double sigma2 = 1.0;

    static SarimaxParams zeros(const SarimaxOrder& order, std::size_t k) {
        SarimaxParams out;
        out.alpha.assign(static_cast<std::size_t>(order.p), 0.0);
        out.theta.assign(static_cast<std::size_t>(order.q), 0.0);
        out.phi.assign(static_cast<std::size_t>(order.P), 0.0);
        out.Theta.assign(static_cast<std::size_t>(order.Q), 0.0);
        out.beta.assign(k, 0.0);
        return out;
    }

    void check(const SarimaxOrder& order, std::size_t k) const {
        require(alpha.size() == static_cast<std::size_t>(order.p) && theta.size() == static_cast<std::size_t>(order.q) &&
                    phi.size() == static_cast<std::size_t>(order.P) && Theta.size() == static_cast<std::size_t>(order.Q),
                "SARIMAX parameter lengths do not match order " + order.to_string());
        require(beta.size() == k, "expected " + std::to_string(k) + " exogenous coefficients, got " +
                                      std::to_string(beta.size()));
    }

    friend bool operator==(const SarimaxParams&, const SarimaxParams&) = default;
};

/// How exogenous columns enter the differenced equation.
enum class ExogMode {
    level,        ///< X_t undifferenced, aligned to the differenced index
    differenced,  ///< X differenced like Y (regression with differenced X)
};

/// Exogenous columns as seen by the recursion: one vector per regressor,
/// already aligned with the differenced target.
inline std::vector<std::vector<double>> align_exog(const std::vector<std::vector<double>>& exog,
                                                   const SarimaxOrder& order, ExogMode mode) {
    std::vector<std::vector<double>> out;
    out.reserve(exog.size());
    const std::size_t span = order.differencing_span();
    for (const auto& x : exog) {
        if (mode == ExogMode::level) {
            out.emplace_back(x.begin() + static_cast<long>(span), x.end());
        } else {
            out.push_back(difference(x, order.d, order.seasonal() ? order.D : 0, static_cast<int>(order.period())));
        }
    }
    return out;
}

struct CssResult {
    std::vector<double> residuals;  // residuals for differenced t = start .. n_w-1
    std::size_t start = 0;          // differenced index of residuals[0]
    double css = 0.0;
};

/// Residual recursion on an already differenced and exog-aligned problem.
/// `eps` receives the full length-n_w residual array (zeros before start).
inline double css_recursion(const SarimaxOrder& order, const SarimaxParams& params, std::span<const double> w,
                            const std::vector<std::vector<double>>& x, std::vector<double>& eps) {
    const std::size_t n = w.size();
    const std::size_t s = order.period();
    const std::size_t start = order.residual_start();
    eps.assign(n, 0.0);
    double css = 0.0;
    for (std::size_t t = start; t < n; ++t) {
        double e = w[t] - params.c;
        for (std::size_t k = 0; k < x.size(); ++k) e -= params.beta[k] * x[k][t];
        for (std::size_t i = 1; i <= params.alpha.size(); ++i) e -= params.alpha[i - 1] * w[t - i];
        for (std::size_t j = 1; j <= params.phi.size(); ++j) e -= params.phi[j - 1] * w[t - j * s];
        for (std::size_t i = 1; i <= params.theta.size() && i <= t; ++i) e -= params.theta[i - 1] * eps[t - i];
        for (std::size_t j = 1; j <= params.Theta.size() && j * s <= t; ++j) e -= params.Theta[j - 1] * eps[t - j * s];
        eps[t] = e;
        css += e * e;
    }
    return css;
}

/// Conditional residuals of
///   w_t = c + b.x_t + sum a_i w_{t-i} + sum f_j w_{t-js} + sum th_i e_{t-i} + sum Th_j e_{t-js} + e_t
/// with w = diff^d diff_s^D y and pre-sample residuals zero.
inline CssResult css_residuals(const SarimaxOrder& order, const SarimaxParams& params, std::span<const double> y,
                               const std::vector<std::vector<double>>& exog = {}, ExogMode mode = ExogMode::level) {
    order.validate();
    params.check(order, exog.size());
    const std::size_t needed = order.differencing_span() + order.residual_start() + 1;
    if (y.size() < needed) {
        throw InsufficientData("SARIMAX" + order.to_string() + " needs at least " + std::to_string(needed) +
                               " observations, got " + std::to_string(y.size()));
    }
    for (const auto& col : exog) require(col.size() == y.size(), "exogenous column length does not match target");

    const auto w = difference(y, order.d, order.seasonal() ? order.D : 0, static_cast<int>(order.period()));
    const auto x = align_exog(exog, order, mode);
    std::vector<double> eps;
    CssResult out;
    out.css = css_recursion(order, params, w, x, eps);
    out.start = order.residual_start();
    out.residuals.assign(eps.begin() + static_cast<long>(out.start), eps.end());
    return out;
}

/// Frame overload: target plus the frame's indicators as regressors.
inline CssResult css_residuals(const SarimaxOrder& order, const SarimaxParams& params, const AlignedFrame& frame,
                               ExogMode mode = ExogMode::level) {
    std::vector<std::vector<double>> exog;
    for (const auto& ind : frame.indicators()) exog.push_back(ind.dense());
    return css_residuals(order, params, frame.target().dense(), exog, mode);
}

// ---------------------------------------------------------------------------
// Stationarity / invertibility reparameterization

/// Maps unconstrained values to partial autocorrelations in (-1, 1) via tanh,
/// then runs the Durbin-Levinson recursion. The result a satisfies: all roots
/// of 1 - a_1 z - ... - a_m z^m lie outside the unit circle.
inline std::vector<double> pacf_to_ar(std::span<const double> raw) {
    const std::size_t m = raw.size();
    std::vector<double> a(m), work(m);
    for (std::size_t i = 0; i < m; ++i) a[i] = std::tanh(raw[i]);
    for (std::size_t j = 1; j < m; ++j) {
        for (std::size_t k = 0; k < j; ++k) work[k] = a[k] - a[j] * a[j - k - 1];
        std::copy(work.begin(), work.begin() + static_cast<long>(j), a.begin());
    }
    return a;
}

/// Inverse of pacf_to_ar for coefficients inside the stationary region.
inline std::vector<double> ar_to_pacf(std::span<const double> coef) {
    const std::size_t m = coef.size();
    std::vector<double> a(coef.begin(), coef.end()), work(m);
    for (std::size_t j = m; j-- > 1;) {
        const double r = a[j];
        const double denom = 1.0 - r * r;
        require(std::abs(r) < 1.0, "coefficients outside the stationary region");
        for (std::size_t k = 0; k < j; ++k) work[k] = (a[k] + r * a[j - k - 1]) / denom;
        std::copy(work.begin(), work.begin() + static_cast<long>(j), a.begin());
    }
    std::vector<double> raw(m);
    for (std::size_t i = 0; i < m; ++i) {
        require(std::abs(a[i]) < 1.0, "coefficients outside the stationary region");
        raw[i] = std::atanh(a[i]);
    }
    return raw;
}

/// Layout of the unconstrained optimizer vector:
/// [c, alpha_raw(p), theta_raw(q), phi_raw(P), Theta_raw(Q), beta(k)].
struct ParamLayout {
    std::size_t p, q, P, Q, k;

    ParamLayout(const SarimaxOrder& order, std::size_t regressors)
        : p(static_cast<std::size_t>(order.p)),
          q(static_cast<std::size_t>(order.q)),
          P(static_cast<std::size_t>(order.P)),
          Q(static_cast<std::size_t>(order.Q)),
          k(regressors) {}

    std::size_t size() const noexcept { return 1 + p + q + P + Q + k; }
    std::size_t alpha() const noexcept { return 1; }
    std::size_t theta() const noexcept { return 1 + p; }
    std::size_t phi() const noexcept { return 1 + p + q; }
    std::size_t Theta() const noexcept { return 1 + p + q + P; }
    std::size_t beta() const noexcept { return 1 + p + q + P + Q; }

    SarimaxParams decode(std::span<const double> u) const {
        auto sub = [&](std::size_t off, std::size_t len) { return u.subspan(off, len); };
        SarimaxParams out;
        out.c = u[0];
        out.alpha = pacf_to_ar(sub(alpha(), p));
        out.phi = pacf_to_ar(sub(phi(), P));
        // MA polynomial 1 + sum theta_i z^i is invertible iff -theta is a stationary AR set.
        out.theta = pacf_to_ar(sub(theta(), q));
        for (auto& v : out.theta) v = -v;
        out.Theta = pacf_to_ar(sub(Theta(), Q));
        for (auto& v : out.Theta) v = -v;
        out.beta.assign(u.begin() + static_cast<long>(beta()), u.begin() + static_cast<long>(beta() + k));
        return out;
    }

    std::vector<double> encode(const SarimaxParams& params) const {
        std::vector<double> u(size());
        u[0] = params.c;
        auto put = [&](std::size_t off, const std::vector<double>& raw) {
            std::copy(raw.begin(), raw.end(), u.begin() + static_cast<long>(off));
        };
        auto negated = [](std::vector<double> v) {
            for (auto& x : v) x = -x;
            return v;
        };
        put(alpha(), ar_to_pacf(params.alpha));
        put(theta(), ar_to_pacf(negated(params.theta)));
        put(phi(), ar_to_pacf(params.phi));
        put(Theta(), ar_to_pacf(negated(params.Theta)));
        put(beta(), params.beta);
        return u;
    }
};

}  // namespace indicast::sarimax
