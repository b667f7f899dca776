#pragma once

#include <json.hpp>

#include "indicast/select/types.hpp"
#include "indicast/series_csv.hpp"

namespace indicast::select {

inline nlohmann::json to_json(const SelectionTrace& trace) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& e : trace.entries) {
        nlohmann::json j{{"subset", e.subset}, {"iteration", e.iteration}, {"on_path", e.on_path}};
        j["score"] = e.score ? nlohmann::json(*e.score) : nlohmann::json(nullptr);
        if (!e.failure.empty()) j["failure"] = e.failure;
        out.push_back(std::move(j));
    }
    return out;
}

inline SelectionTrace trace_from_json(const nlohmann::json& j) {
    SelectionTrace t;
    for (const auto& e : j) {
        TraceEntry entry;
        entry.subset = e.at("subset").get<std::vector<std::string>>();
        if (!e.at("score").is_null()) entry.score = e.at("score").get<double>();
        entry.failure = e.value("failure", "");
        entry.iteration = e.value("iteration", 0);
        entry.on_path = e.value("on_path", false);
        t.entries.push_back(std::move(entry));
    }
    return t;
}

inline nlohmann::json to_json(const SelectionResult& r) {
    nlohmann::json j;
    j["schema"] = "indicast.selection";
    j["version"] = 1;
    j["method"] = method_tag(r.method);
    j["selected_ids"] = r.selected_ids;
    j["score"] = r.score ? nlohmann::json(*r.score) : nlohmann::json(nullptr);
    nlohmann::json diag = nlohmann::json::array();
    for (const auto& [name, value] : r.diagnostics) diag.push_back({{"name", name}, {"value", value}});
    j["diagnostics"] = diag;
    j["trace"] = r.trace ? to_json(*r.trace) : nlohmann::json(nullptr);
    return j;
}

inline SelectionResult selection_from_json(const nlohmann::json& j) {
    try {
        if (j.value("schema", "") != "indicast.selection") throw ParseError("not a selection-result document");
        SelectionResult r;
        r.method = method_from_tag(j.at("method").get<std::string>());
        r.selected_ids = j.at("selected_ids").get<std::vector<std::string>>();
        if (!j.at("score").is_null()) r.score = j.at("score").get<double>();
        for (const auto& d : j.at("diagnostics")) r.diagnostics.emplace_back(d.at("name").get<std::string>(), d.at("value").get<double>());
        if (j.contains("trace") && !j.at("trace").is_null()) r.trace = trace_from_json(j.at("trace"));
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("selection document: ") + e.what());
    }
}

/// One row per evaluation: iteration, subset size, ids joined by ';', score (empty on failure).
inline std::string trace_to_csv(const SelectionTrace& trace) {
    std::string out = "iteration,size,subset,score,on_path\n";
    for (const auto& e : trace.entries) {
        std::string ids;
        for (std::size_t i = 0; i < e.subset.size(); ++i) ids += (i ? ";" : "") + e.subset[i];
        out += std::to_string(e.iteration) + ',' + std::to_string(e.subset.size()) + ',' + ids + ',' +
               (e.score ? format_double(*e.score) : std::string()) + ',' + (e.on_path ? "1" : "0") + '\n';
    }
    return out;
}

}  // namespace indicast::select
