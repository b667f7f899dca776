#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "indicast/select/types.hpp"

namespace indicast::select {

struct LassoOptions {
    double tolerance = 1e-8;      // on the largest coefficient change in one sweep
    int max_iterations = 10'000;  // full sweeps
};

struct LassoFit {
    Eigen::VectorXd beta;
    int iterations = 0;
};

inline double soft_threshold(double z, double gamma) noexcept {
    if (z > gamma) return z - gamma;
    if (z < -gamma) return z + gamma;
    return 0.0;
}

/// Cyclic coordinate descent for (1/2n)||y - X b||^2 + lambda ||b||_1.
inline LassoFit lasso_coordinate_descent(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                                         const LassoOptions& options = {}, Eigen::VectorXd warm_start = {}) {
    require(lambda >= 0.0, "lambda must be nonnegative");
    const auto n = static_cast<double>(X.rows());
    const Eigen::Index p = X.cols();
    Eigen::VectorXd beta = warm_start.size() == p ? std::move(warm_start) : Eigen::VectorXd::Zero(p);
    const Eigen::VectorXd col_sq = X.colwise().squaredNorm().transpose() / n;
    Eigen::VectorXd r = y - X * beta;

    for (int it = 1; it <= options.max_iterations; ++it) {
        double max_change = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (col_sq(j) == 0.0) continue;
            const double old = beta(j);
            const double rho = X.col(j).dot(r) / n + col_sq(j) * old;
            const double updated = soft_threshold(rho, lambda) / col_sq(j);
            if (updated != old) {
                r -= (updated - old) * X.col(j);
                beta(j) = updated;
                max_change = std::max(max_change, std::abs(updated - old));
            }
        }
        if (max_change < options.tolerance) return {beta, it};
    }
    const double objective = r.squaredNorm() / (2 * n) + lambda * beta.lpNorm<1>();
    throw ConvergenceFailure("lasso coordinate descent did not converge in " + std::to_string(options.max_iterations) +
                                 " sweeps at lambda " + std::to_string(lambda),
                             std::vector<double>(beta.data(), beta.data() + p), objective);
}

/// Largest lambda at which any coefficient is nonzero.
inline double lasso_lambda_max(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    return (X.transpose() * y).cwiseAbs().maxCoeff() / static_cast<double>(X.rows());
}

/// Fits along `lambdas` in the given order, warm-starting each from the previous.
inline std::vector<LassoFit> lasso_path(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                        const std::vector<double>& lambdas, const LassoOptions& options = {}) {
    std::vector<LassoFit> out;
    Eigen::VectorXd warm;
    for (double lambda : lambdas) {
        out.push_back(lasso_coordinate_descent(X, y, lambda, options, warm));
        warm = out.back().beta;
    }
    return out;
}

/// Columns centered and scaled to unit (population) variance; target centered.
struct Standardized {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    Eigen::VectorXd x_mean;
    Eigen::VectorXd x_scale;  // 0 for constant columns, which are left at zero
    double y_mean = 0.0;

    Eigen::VectorXd transform(const Eigen::MatrixXd& raw_rows, Eigen::Index row) const {
        Eigen::VectorXd z(X.cols());
        for (Eigen::Index j = 0; j < X.cols(); ++j)
            z(j) = x_scale(j) > 0 ? (raw_rows(row, j) - x_mean(j)) / x_scale(j) : 0.0;
        return z;
    }
};

inline Standardized standardize(const Eigen::MatrixXd& raw_x, const Eigen::VectorXd& raw_y) {
    Standardized s;
    const auto n = static_cast<double>(raw_x.rows());
    s.x_mean = raw_x.colwise().mean().transpose();
    s.X = raw_x.rowwise() - s.x_mean.transpose();
    s.x_scale = (s.X.colwise().squaredNorm().transpose() / n).cwiseSqrt();
    for (Eigen::Index j = 0; j < s.X.cols(); ++j) {
        if (s.x_scale(j) > 1e-12 * (1.0 + std::abs(s.x_mean(j)))) {
            s.X.col(j) /= s.x_scale(j);
        } else {
            s.x_scale(j) = 0.0;
            s.X.col(j).setZero();
        }
    }
    s.y_mean = raw_y.mean();
    s.y = raw_y.array() - s.y_mean;
    return s;
}

struct LassoPolicy {
    enum class Kind { fixed, grid } kind = Kind::grid;
    double lambda = 0.0;  // fixed policy only
    int grid_points = 50;
    double grid_ratio = 1e-4;  // smallest grid lambda as a fraction of lambda_max
    double validation_fraction = 0.2;
    LassoOptions solver{};

    static LassoPolicy fixed(double lambda) {
        LassoPolicy p;
        p.kind = Kind::fixed;
        p.lambda = lambda;
        return p;
    }
};

/// Descending log-spaced grid from lambda_max to ratio * lambda_max.
inline std::vector<double> lambda_grid(double lambda_max, int points, double ratio) {
    require(points >= 1, "lambda grid needs at least one point");
    std::vector<double> out;
    if (points == 1) return {lambda_max};
    const double lo = std::log(lambda_max * ratio), hi = std::log(lambda_max);
    for (int i = 0; i < points; ++i) out.push_back(std::exp(hi + (lo - hi) * i / (points - 1)));
    out.front() = lambda_max;
    return out;
}

namespace detail {

inline std::pair<Eigen::MatrixXd, Eigen::VectorXd> to_matrix(const CandidateSet& c, std::size_t offset, std::size_t rows) {
    const auto y = c.frame().target().dense();
    Eigen::MatrixXd X(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(c.size()));
    Eigen::VectorXd t(static_cast<Eigen::Index>(rows));
    for (std::size_t j = 0; j < c.size(); ++j) {
        const auto x = c.series(j).dense();
        for (std::size_t r = 0; r < rows; ++r) X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = x[offset + r];
    }
    for (std::size_t r = 0; r < rows; ++r) t(static_cast<Eigen::Index>(r)) = y[offset + r];
    return {X, t};
}

}  // namespace detail

/// Regresses the target on the contemporaneous candidates with an L1 penalty
/// and keeps the candidates whose standardized coefficient survives.
inline SelectionResult lasso_select(const CandidateSet& candidates, const LassoPolicy& policy = {}) {
    const std::size_t n = candidates.frame().size();
    if (n < 3) throw InsufficientData("lasso selection needs at least 3 training rows, got " + std::to_string(n));
    SelectionResult out;
    out.method = Method::lasso;
    if (candidates.size() == 0) return out;

    const auto [raw_x, raw_y] = detail::to_matrix(candidates, 0, n);
    const auto full = standardize(raw_x, raw_y);
    const double lmax = lasso_lambda_max(full.X, full.y);
    out.diagnostics.emplace_back("lambda_max", lmax);

    double lambda = policy.lambda;
    std::vector<double> approach;  // grid lambdas above the chosen one, for warm starts
    if (policy.kind == LassoPolicy::Kind::grid && lmax <= 0.0) {
        lambda = 0.0;  // no candidate carries any signal; every coefficient is zero
    } else if (policy.kind == LassoPolicy::Kind::grid) {
        const auto n_val = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(policy.validation_fraction * static_cast<double>(n))));
        if (n < n_val + 3) throw InsufficientData("lasso validation split leaves fewer than 3 fitting rows");
        const std::size_t n_fit = n - n_val;
        const auto [fit_x, fit_y] = detail::to_matrix(candidates, 0, n_fit);
        const auto [val_x, val_y] = detail::to_matrix(candidates, n_fit, n_val);
        const auto inner = standardize(fit_x, fit_y);
        const auto grid = lambda_grid(lmax, policy.grid_points, policy.grid_ratio);
        // The path ends at the first lambda the solver cannot converge on; smaller
        // ones are harder still and are left out of the search.
        std::vector<LassoFit> path;
        Eigen::VectorXd warm;
        for (double l : grid) {
            try {
                path.push_back(lasso_coordinate_descent(inner.X, inner.y, l, policy.solver, warm));
            } catch (const ConvergenceFailure&) {
                break;
            }
            warm = path.back().beta;
        }
        out.diagnostics.emplace_back("grid_converged", static_cast<double>(path.size()));
        double best_mae = std::numeric_limits<double>::infinity();
        for (std::size_t g = 0; g < path.size(); ++g) {
            double err = 0.0;
            for (Eigen::Index r = 0; r < val_x.rows(); ++r)
                err += std::abs(val_y(r) - (inner.y_mean + inner.transform(val_x, r).dot(path[g].beta)));
            err /= static_cast<double>(val_x.rows());
            // grid runs from large to small lambda, so strict improvement keeps ties at the larger one
            if (err < best_mae) {
                best_mae = err;
                lambda = grid[g];
                approach.assign(grid.begin(), grid.begin() + static_cast<long>(g));
            }
        }
        out.diagnostics.emplace_back("validation_mae", best_mae);
    }
    out.diagnostics.emplace_back("lambda", lambda);

    Eigen::VectorXd warm;
    for (double l : approach) {
        try {
            warm = lasso_coordinate_descent(full.X, full.y, l, policy.solver, warm).beta;
        } catch (const ConvergenceFailure& e) {
            warm = Eigen::Map<const Eigen::VectorXd>(e.best_point().data(), static_cast<Eigen::Index>(e.best_point().size()));
        }
    }
    const auto fit = lasso_coordinate_descent(full.X, full.y, lambda, policy.solver, warm);
    for (std::size_t j = 0; j < candidates.size(); ++j) {
        const double b = fit.beta(static_cast<Eigen::Index>(j));
        out.diagnostics.emplace_back("coef/" + candidates.ids()[j], b);
        if (std::abs(b) > 1e-10) out.selected_ids.push_back(candidates.ids()[j]);
    }
    return out;
}

}  // namespace indicast::select
