#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "indicast/errors.hpp"

namespace indicast::sarimax {

struct QuasiNewtonOptions {
    int max_iterations = 500;
    double relative_tolerance = 1e-8;  // on the objective change between iterations
    double fd_step = 1e-6;             // relative finite-difference step
    double gradient_tolerance = 1e-10;
};

struct Bounds {
    std::vector<double> lower;
    std::vector<double> upper;

    static Bounds unbounded(std::size_t n) {
        const double inf = std::numeric_limits<double>::infinity();
        return {std::vector<double>(n, -inf), std::vector<double>(n, inf)};
    }
};

struct MinimizeResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
    int evaluations = 0;
};

namespace detail {

inline void project(std::vector<double>& x, const Bounds& b) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], b.lower[i], b.upper[i]);
}

/// Central differences, one-sided where a bound blocks the central stencil.
template <class F>
std::vector<double> fd_gradient(F& f, const std::vector<double>& x, double fx, const Bounds& b, double rel_step,
                                int& evals) {
    std::vector<double> g(x.size());
    std::vector<double> probe = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double h = rel_step * std::max(1.0, std::abs(x[i]));
        const bool can_up = x[i] + h <= b.upper[i];
        const bool can_down = x[i] - h >= b.lower[i];
        if (can_up && can_down) {
            probe[i] = x[i] + h;
            const double fp = f(probe);
            probe[i] = x[i] - h;
            const double fm = f(probe);
            evals += 2;
            g[i] = (fp - fm) / (2.0 * h);
        } else if (can_up) {
            probe[i] = x[i] + h;
            g[i] = (f(probe) - fx) / h;
            ++evals;
        } else {
            probe[i] = x[i] - h;
            g[i] = (fx - f(probe)) / h;
            ++evals;
        }
        probe[i] = x[i];
    }
    return g;
}

}  // namespace detail

/// Box-constrained BFGS with finite-difference gradients.
///
/// Variables sitting on a bound with the gradient pointing outward are held
/// fixed for the iteration; the step is projected back onto the box and
/// accepted under an Armijo condition. Convergence is declared when the
/// relative objective change stays below the tolerance for two consecutive
/// iterations, when the projected gradient vanishes, or when no descent step
/// exists from the current point. Exhausting the iteration budget throws
/// ConvergenceFailure carrying the best point.
template <class F>
MinimizeResult minimize_bounded(F&& objective, std::vector<double> x0, const Bounds& bounds,
                                const QuasiNewtonOptions& opt = {}) {
    const std::size_t n = x0.size();
    require(bounds.lower.size() == n && bounds.upper.size() == n, "bounds dimension mismatch");

    MinimizeResult res;
    auto f = [&](const std::vector<double>& x) {
        const double v = objective(std::span<const double>(x));
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    std::vector<double> x = std::move(x0);
    detail::project(x, bounds);
    double fx = f(x);
    ++res.evaluations;
    if (n == 0) {
        res.x = x;
        res.value = fx;
        return res;
    }

    std::vector<double> g = detail::fd_gradient(f, x, fx, bounds, opt.fd_step, res.evaluations);
    std::vector<double> H(n * n, 0.0);
    auto reset_h = [&] {
        std::fill(H.begin(), H.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) H[i * n + i] = 1.0;
    };
    reset_h();
    bool h_is_identity = true;
    int small_changes = 0;

    for (int iter = 0; iter < opt.max_iterations; ++iter) {
        res.iterations = iter + 1;

        std::vector<bool> free(n);
        double pg_norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const bool at_lower = x[i] <= bounds.lower[i] && g[i] > 0.0;
            const bool at_upper = x[i] >= bounds.upper[i] && g[i] < 0.0;
            free[i] = !(at_lower || at_upper);
            if (free[i]) pg_norm = std::max(pg_norm, std::abs(g[i]));
        }
        if (pg_norm <= opt.gradient_tolerance * std::max(1.0, std::abs(fx))) {
            res.x = x;
            res.value = fx;
            return res;
        }

        bool accepted = false;
        std::vector<double> x_new, d(n);
        double f_new = fx;
        for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
            std::fill(d.begin(), d.end(), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                if (!free[i]) continue;
                for (std::size_t j = 0; j < n; ++j)
                    if (free[j]) d[i] -= H[i * n + j] * g[j];
            }
            double slope = 0.0;
            for (std::size_t i = 0; i < n; ++i) slope += g[i] * d[i];
            if (!(slope < 0.0)) {
                reset_h();
                h_is_identity = true;
                for (std::size_t i = 0; i < n; ++i) d[i] = free[i] ? -g[i] : 0.0;
            }

            double step = 1.0;
            if (h_is_identity) {
                double dmax = 0.0;
                for (double v : d) dmax = std::max(dmax, std::abs(v));
                if (dmax > 1.0) step = 1.0 / dmax;
            }
            for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
                x_new = x;
                for (std::size_t i = 0; i < n; ++i) x_new[i] += step * d[i];
                detail::project(x_new, bounds);
                double decrease = 0.0;
                for (std::size_t i = 0; i < n; ++i) decrease += g[i] * (x_new[i] - x[i]);
                f_new = f(x_new);
                ++res.evaluations;
                if (f_new <= fx + 1e-4 * decrease && f_new <= fx) {
                    accepted = true;
                    break;
                }
            }
            if (!accepted) {
                if (h_is_identity) break;
                reset_h();
                h_is_identity = true;
            }
        }
        if (!accepted) {
            // No descent direction left at working precision.
            res.x = x;
            res.value = fx;
            return res;
        }

        std::vector<double> g_new = detail::fd_gradient(f, x_new, f_new, bounds, opt.fd_step, res.evaluations);
        std::vector<double> s(n), y(n);
        double sy = 0.0, ss = 0.0, yy = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = x_new[i] - x[i];
            y[i] = g_new[i] - g[i];
            sy += s[i] * y[i];
            ss += s[i] * s[i];
            yy += y[i] * y[i];
        }
        if (sy > 1e-12 * std::sqrt(ss * yy)) {
            if (h_is_identity) {
                // Scale the initial inverse Hessian before the first update.
                const double gamma = sy / yy;
                for (std::size_t i = 0; i < n; ++i) H[i * n + i] = gamma;
            }
            std::vector<double> Hy(n, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) Hy[i] += H[i * n + j] * y[j];
            double yHy = 0.0;
            for (std::size_t i = 0; i < n; ++i) yHy += y[i] * Hy[i];
            const double rho = 1.0 / sy;
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    H[i * n + j] += (1.0 + yHy * rho) * rho * s[i] * s[j] - rho * (Hy[i] * s[j] + s[i] * Hy[j]);
                }
            }
            h_is_identity = false;
        }

        const double change = std::abs(fx - f_new);
        const double scale = std::max(std::abs(f_new), std::numeric_limits<double>::min());
        x = std::move(x_new);
        fx = f_new;
        g = std::move(g_new);

        if (fx == 0.0 || change <= opt.relative_tolerance * scale) {
            if (++small_changes >= 2 || fx == 0.0) {
                res.x = x;
                res.value = fx;
                return res;
            }
        } else {
            small_changes = 0;
        }
    }
    throw ConvergenceFailure("quasi-Newton optimizer did not converge within " + std::to_string(opt.max_iterations) +
                                 " iterations",
                             x, fx);
}

}  // namespace indicast::sarimax
