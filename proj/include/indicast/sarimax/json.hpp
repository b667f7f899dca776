#pragma once

#include <json.hpp>

#include "indicast/sarimax/estimate.hpp"

namespace indicast {

inline nlohmann::json to_json(const NormalizationParams& p) { return {{"min", p.min()}, {"max", p.max()}}; }

inline NormalizationParams normalization_from_json(const nlohmann::json& j) {
    return NormalizationParams(j.at("min").get<double>(), j.at("max").get<double>());
}

}  // namespace indicast

namespace indicast::sarimax {

inline constexpr int kFittedSarimaxSchemaVersion = 1;

inline nlohmann::json to_json(const SarimaxOrder& o) {
    return {{"p", o.p}, {"d", o.d}, {"q", o.q}, {"P", o.P}, {"D", o.D}, {"Q", o.Q}, {"s", o.s}};
}

inline SarimaxOrder order_from_json(const nlohmann::json& j) {
    SarimaxOrder o;
    o.p = j.value("p", 0);
    o.d = j.value("d", 0);
    o.q = j.value("q", 0);
    o.P = j.value("P", 0);
    o.D = j.value("D", 0);
    o.Q = j.value("Q", 0);
    o.s = j.value("s", 12);
    o.validate();
    return o;
}

inline nlohmann::json to_json(const FittedSarimax& f) {
    nlohmann::json j;
    j["schema"] = "indicast.sarimax";
    j["version"] = kFittedSarimaxSchemaVersion;
    j["order"] = to_json(f.order);
    j["params"] = {{"c", f.params.c},         {"alpha", f.params.alpha}, {"theta", f.params.theta},
                   {"phi", f.params.phi},     {"Theta", f.params.Theta}, {"beta", f.params.beta},
                   {"sigma2", f.params.sigma2}};
    j["regressor_ids"] = f.regressor_ids;
    j["exog_mode"] = f.exog_mode == ExogMode::level ? "level" : "differenced";
    j["target_id"] = f.target_id;
    j["last_period"] = f.last_period.to_string();
    j["training_tail"] = {{"values", f.tail_values}, {"residuals", f.tail_residuals}, {"exog", f.tail_exog}};
    j["normalization"] = f.normalization ? indicast::to_json(*f.normalization) : nlohmann::json(nullptr);
    j["css"] = f.css;
    j["residual_count"] = f.residual_count;
    j["iterations"] = f.iterations;
    return j;
}

inline FittedSarimax fitted_from_json(const nlohmann::json& j) {
    try {
        if (j.value("schema", "") != "indicast.sarimax") throw ParseError("not a fitted SARIMAX document");
        FittedSarimax f;
        f.order = order_from_json(j.at("order"));
        const auto& p = j.at("params");
        f.params.c = p.at("c").get<double>();
        f.params.alpha = p.at("alpha").get<std::vector<double>>();
        f.params.theta = p.at("theta").get<std::vector<double>>();
        f.params.phi = p.at("phi").get<std::vector<double>>();
        f.params.Theta = p.at("Theta").get<std::vector<double>>();
        f.params.beta = p.at("beta").get<std::vector<double>>();
        f.params.sigma2 = p.at("sigma2").get<double>();
        f.regressor_ids = j.at("regressor_ids").get<std::vector<std::string>>();
        f.params.check(f.order, f.regressor_ids.size());
        f.exog_mode = j.at("exog_mode").get<std::string>() == "differenced" ? ExogMode::differenced : ExogMode::level;
        f.target_id = j.at("target_id").get<std::string>();
        f.last_period = YearMonth::parse(j.at("last_period").get<std::string>());
        const auto& tail = j.at("training_tail");
        f.tail_values = tail.at("values").get<std::vector<double>>();
        f.tail_residuals = tail.at("residuals").get<std::vector<double>>();
        f.tail_exog = tail.at("exog").get<std::vector<std::vector<double>>>();
        if (!j.at("normalization").is_null()) f.normalization = normalization_from_json(j.at("normalization"));
        f.css = j.at("css").get<double>();
        f.residual_count = j.at("residual_count").get<std::size_t>();
        f.iterations = j.value("iterations", 0);
        return f;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("fitted SARIMAX document: ") + e.what());
    }
}

}  // namespace indicast::sarimax
