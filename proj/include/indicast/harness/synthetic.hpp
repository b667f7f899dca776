#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "indicast/series.hpp"

namespace indicast::harness {

struct SyntheticSpec {
    int n_months = 76;
    double ar_coefficient = 0.5;
    double seasonal_amplitude = 1.0;
    int n_indicators = 10;
    int n_drivers = 2;
    std::vector<double> driver_betas{1.5, -1.0};
    double noise_sigma = 0.5;
    std::uint64_t seed = 0;
    YearMonth start{2016, 1};

    void validate() const {
        if (n_months < 1) throw ConfigError("synthetic n_months must be positive");
        if (!(ar_coefficient > -1.0 && ar_coefficient < 1.0)) throw ConfigError("synthetic ar_coefficient must lie in (-1, 1)");
        if (n_indicators < 1) throw ConfigError("synthetic n_indicators must be positive");
        if (n_drivers < 0 || n_drivers > n_indicators) throw ConfigError("synthetic n_drivers must lie in [0, n_indicators]");
        if (driver_betas.size() != static_cast<std::size_t>(n_drivers))
            throw ConfigError("synthetic driver_betas needs exactly n_drivers entries");
        if (!(noise_sigma > 0.0)) throw ConfigError("synthetic noise_sigma must be positive");
    }
};

struct SyntheticData {
    AlignedFrame frame;
    std::vector<std::string> driver_ids;  // in the order of driver_betas
    std::vector<double> driver_betas;
};

inline std::string indicator_name(int i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "x%02d", i + 1);
    return buf;
}

/// Drivers are integrated random walks: a slope drawn once with sd
/// kDriverSlopeSd that itself drifts by kDriverSlopeStepSd per month.
inline constexpr double kDriverSlopeSd = 0.4;
inline constexpr double kDriverSlopeStepSd = 0.005;

/// target = AR(1) base + period-12 sinusoid + sum of beta_j * driver_j + noise.
/// Drivers are smooth random walks (see above); the other indicators are plain
/// Gaussian random walks. Which indicators are drivers is
/// drawn from the seed as well.
inline SyntheticData generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    const auto n = static_cast<std::size_t>(spec.n_months);
    const auto k = static_cast<std::size_t>(spec.n_indicators);

    std::vector<std::size_t> slots(k);
    std::iota(slots.begin(), slots.end(), 0);
    std::shuffle(slots.begin(), slots.end(), rng);
    std::vector<std::size_t> drivers(slots.begin(), slots.begin() + spec.n_drivers);

    std::vector<std::vector<double>> x(k, std::vector<double>(n));
    for (std::size_t j = 0; j < k; ++j) {
        const bool is_driver = std::find(drivers.begin(), drivers.end(), j) != drivers.end();
        double level = 0.0;
        double step = is_driver ? kDriverSlopeSd * unit(rng) : 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            if (is_driver) {
                step += kDriverSlopeStepSd * unit(rng);
                level += step;
            } else {
                level += unit(rng);
            }
            x[j][t] = level;
        }
    }

    double u = 0.0;
    for (int burn = 0; burn < 50; ++burn) u = spec.ar_coefficient * u + unit(rng);
    std::vector<double> y(n);
    for (std::size_t t = 0; t < n; ++t) {
        u = spec.ar_coefficient * u + unit(rng);
        const auto month = spec.start.plus(static_cast<int>(t));
        double v = 10.0 + u + spec.seasonal_amplitude * std::sin(2.0 * std::numbers::pi * (month.month - 1) / 12.0);
        for (std::size_t d = 0; d < drivers.size(); ++d) v += spec.driver_betas[d] * x[drivers[d]][t];
        y[t] = v + spec.noise_sigma * unit(rng);
    }

    SyntheticData out;
    std::vector<MonthlySeries> indicators;
    for (std::size_t j = 0; j < k; ++j) indicators.emplace_back(indicator_name(static_cast<int>(j)), spec.start, x[j]);
    out.frame = AlignedFrame(MonthlySeries("target", spec.start, y), std::move(indicators));
    for (auto d : drivers) out.driver_ids.push_back(indicator_name(static_cast<int>(d)));
    out.driver_betas = spec.driver_betas;
    return out;
}

inline nlohmann::json to_json(const SyntheticSpec& s) {
    return {{"n_months", s.n_months},
            {"ar_coefficient", s.ar_coefficient},
            {"seasonal_amplitude", s.seasonal_amplitude},
            {"n_indicators", s.n_indicators},
            {"n_drivers", s.n_drivers},
            {"driver_betas", s.driver_betas},
            {"noise_sigma", s.noise_sigma},
            {"seed", s.seed},
            {"start", s.start.to_string()}};
}

/// Missing keys keep their defaults; `driver_betas` defaults to 1.0 per driver
/// when only `n_drivers` is given.
inline SyntheticSpec synthetic_from_json(const nlohmann::json& j, std::uint64_t default_seed = 0) {
    try {
        for (const auto& [key, _] : j.items())
            if (key != "n_months" && key != "ar_coefficient" && key != "seasonal_amplitude" && key != "n_indicators" &&
                key != "n_drivers" && key != "driver_betas" && key != "noise_sigma" && key != "seed" && key != "start")
                throw ConfigError("unknown key '" + key + "' in synthetic spec");
        SyntheticSpec s;
        s.n_months = j.value("n_months", s.n_months);
        s.ar_coefficient = j.value("ar_coefficient", s.ar_coefficient);
        s.seasonal_amplitude = j.value("seasonal_amplitude", s.seasonal_amplitude);
        s.n_indicators = j.value("n_indicators", s.n_indicators);
        s.n_drivers = j.value("n_drivers", s.n_drivers);
        if (j.contains("driver_betas")) {
            s.driver_betas = j.at("driver_betas").get<std::vector<double>>();
        } else if (j.contains("n_drivers")) {
            s.driver_betas.assign(static_cast<std::size_t>(std::max(0, s.n_drivers)), 1.0);
        }
        s.noise_sigma = j.value("noise_sigma", s.noise_sigma);
        s.seed = j.value("seed", default_seed);
        if (j.contains("start")) s.start = YearMonth::parse(j.at("start").get<std::string>());
        s.validate();
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("synthetic spec: ") + e.what());
    } catch (const ParseError& e) {
        throw ConfigError(std::string("synthetic spec: ") + e.what());
    }
}

}  // namespace indicast::harness
