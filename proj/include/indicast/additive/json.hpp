#pragma once

#include <json.hpp>

#include "indicast/additive/model.hpp"

namespace indicast::additive {

inline constexpr int kFittedAdditiveSchemaVersion = 1;

inline nlohmann::json to_json(const AdditiveConfig& c) {
    nlohmann::json seas = nlohmann::json::array();
    for (const auto& s : c.seasonalities) seas.push_back({{"period", s.period}, {"fourier_order", s.order}});
    nlohmann::json events = nlohmann::json::array();
    for (const auto& e : c.events) {
        std::vector<std::string> months;
        for (auto m : e.months) months.push_back(m.to_string());
        events.push_back({{"id", e.id}, {"months", months}});
    }
    return {{"n_changepoints", c.n_changepoints}, {"changepoint_range", c.changepoint_range},
            {"seasonalities", seas},              {"ar_lags", c.ar_lags},
            {"regressor_lags", c.regressor_lags}, {"events", events},
            {"future_known", c.future_known},     {"ridge_lambda", c.ridge_lambda}};
}

/// Missing keys fall back to the defaults of AdditiveConfig.
inline AdditiveConfig config_from_json(const nlohmann::json& j) {
    AdditiveConfig c;
    c.n_changepoints = j.value("n_changepoints", c.n_changepoints);
    c.changepoint_range = j.value("changepoint_range", c.changepoint_range);
    if (j.contains("seasonalities"))
        for (const auto& s : j.at("seasonalities"))
            c.seasonalities.push_back({s.at("period").get<double>(), s.at("fourier_order").get<int>()});
    c.ar_lags = j.value("ar_lags", c.ar_lags);
    c.regressor_lags = j.value("regressor_lags", c.regressor_lags);
    if (j.contains("events"))
        for (const auto& e : j.at("events")) {
            EventSpec ev{e.at("id").get<std::string>(), {}};
            for (const auto& m : e.at("months")) ev.months.push_back(YearMonth::parse(m.get<std::string>()));
            c.events.push_back(std::move(ev));
        }
    c.future_known = j.value("future_known", c.future_known);
    c.ridge_lambda = j.value("ridge_lambda", c.ridge_lambda);
    c.validate();
    return c;
}

inline nlohmann::json to_json(const FittedAdditive& f) {
    nlohmann::json columns = nlohmann::json::array();
    for (const auto& c : f.columns)
        columns.push_back({{"component", component_tag(c.component)}, {"name", c.name}, {"penalized", c.penalized}});
    nlohmann::json j;
    j["schema"] = "indicast.additive";
    j["version"] = kFittedAdditiveSchemaVersion;
    j["config"] = to_json(f.config);
    j["columns"] = columns;
    j["coefficients"] = f.coefficients;
    j["time_scale"] = {{"origin", f.time_scale.origin.to_string()}, {"span_months", f.time_scale.span}};
    j["target_id"] = f.target_id;
    j["regressor_ids"] = f.regressor_ids;
    j["last_period"] = f.last_period.to_string();
    j["training_tail"] = {{"target", f.tail_target}, {"regressors", f.tail_regressors}};
    j["fitted"] = {{"start", f.fitted_start.to_string()}, {"values", f.fitted_values}};
    return j;
}

inline FittedAdditive fitted_additive_from_json(const nlohmann::json& j) {
    try {
        if (j.value("schema", "") != "indicast.additive") throw ParseError("not a fitted additive-model document");
        FittedAdditive f;
        f.config = config_from_json(j.at("config"));
        for (const auto& c : j.at("columns"))
            f.columns.push_back({component_from_tag(c.at("component").get<std::string>()), c.at("name").get<std::string>(),
                                 c.at("penalized").get<bool>()});
        f.coefficients = j.at("coefficients").get<std::vector<double>>();
        if (f.coefficients.size() != f.columns.size())
            throw ParseError("coefficient count does not match the column layout");
        f.time_scale.origin = YearMonth::parse(j.at("time_scale").at("origin").get<std::string>());
        f.time_scale.span = j.at("time_scale").at("span_months").get<long>();
        f.target_id = j.at("target_id").get<std::string>();
        f.regressor_ids = j.at("regressor_ids").get<std::vector<std::string>>();
        f.last_period = YearMonth::parse(j.at("last_period").get<std::string>());
        f.tail_target = j.at("training_tail").at("target").get<std::vector<double>>();
        f.tail_regressors = j.at("training_tail").at("regressors").get<std::vector<std::vector<double>>>();
        if (f.tail_target.size() != f.config.max_lag() || f.tail_regressors.size() != f.regressor_ids.size())
            throw ParseError("training tail does not match the configured lags");
        f.fitted_start = YearMonth::parse(j.at("fitted").at("start").get<std::string>());
        f.fitted_values = j.at("fitted").at("values").get<std::vector<double>>();
        if (detail::builder_for(f).columns() != f.columns) throw ParseError("column layout does not match the config");
        return f;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("fitted additive document: ") + e.what());
    }
}

}  // namespace indicast::additive
