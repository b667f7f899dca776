#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "indicast/additive/json.hpp"
#include "indicast/harness/synthetic.hpp"
#include "indicast/sarimax/json.hpp"
#include "indicast/select.hpp"

namespace indicast::harness {

inline constexpr int kExperimentSchemaVersion = 1;

struct CsvSource {
    std::filesystem::path target;
    std::vector<std::filesystem::path> indicators;
};

/// Indicators are every series listed in the cache manifest.
struct EurostatCacheSource {
    std::filesystem::path root;
    std::filesystem::path target;
};

struct DatasetSpec {
    std::string name;
    std::variant<SyntheticSpec, CsvSource, EurostatCacheSource> source;
};

/// Either explicit months, or the `length` months ending right before the
/// terminal horizon window. Neither set means all months before that window.
struct TrainingRange {
    std::optional<YearMonth> start, end;
    std::optional<int> length;
};

struct MethodSpec {
    select::Method method = select::Method::none;
    std::vector<std::string> manual_ids;
    std::string label() const { return select::method_tag(method); }
};

struct ModelSpec {
    enum class Kind { sarimax, additive } kind = Kind::sarimax;
    sarimax::SarimaxOrder order{1, 0, 0};
    std::vector<sarimax::SarimaxOrder> grid;     // nonempty: pick the order per cell by validation
    std::optional<additive::AdditiveConfig> additive;  // empty: auto_config per cell
    std::string label() const { return kind == Kind::sarimax ? "sarimax" : "additive"; }
};

struct Preprocessing {
    int smooth_window = 1;
    bool normalize = true;
    bool detrend = false;
};

struct SelectionSettings {
    select::CorrelationThresholds correlation{};
    select::LassoPolicy lasso{};
    int forward_cap = 20;
    int forward_folds = 1;
};

struct ExperimentConfig {
    std::uint64_t seed = 0;
    int horizon = 12;
    std::vector<DatasetSpec> datasets;
    std::vector<TrainingRange> ranges;
    std::vector<MethodSpec> methods;
    std::vector<ModelSpec> models;
    Preprocessing preprocessing;
    SelectionSettings selection;
    int rolling_origins = 1;  // >1 averages over origins stepped back one month at a time
    std::filesystem::path output = "indicast-run";

    void validate() const {
        if (horizon < 1) throw ConfigError("horizon must be positive");
        if (datasets.empty()) throw ConfigError("at least one dataset is required");
        if (ranges.empty()) throw ConfigError("at least one training range is required");
        if (methods.empty()) throw ConfigError("at least one method is required");
        if (models.empty()) throw ConfigError("at least one model is required");
        if (preprocessing.smooth_window < 1 || preprocessing.smooth_window % 2 == 0)
            throw ConfigError("smooth_window must be a positive odd number");
        if (selection.forward_cap < 1) throw ConfigError("forward cap must be positive");
        if (selection.forward_folds < 1) throw ConfigError("forward validation_folds must be positive");
        if (rolling_origins < 1) throw ConfigError("rolling_origins must be positive");
        for (const auto& r : ranges) {
            if (r.length && *r.length < 1) throw ConfigError("training range length must be positive");
            if (r.length && (r.start || r.end)) throw ConfigError("a training range takes either start/end or length");
            if (r.start.has_value() != r.end.has_value()) throw ConfigError("a training range needs both start and end");
            if (r.start && *r.end < *r.start) throw ConfigError("training range ends before it starts");
        }
        for (std::size_t i = 0; i < datasets.size(); ++i)
            for (std::size_t j = i + 1; j < datasets.size(); ++j)
                if (datasets[i].name == datasets[j].name) throw ConfigError("duplicate dataset name '" + datasets[i].name + "'");
    }
};

namespace detail {

inline const char* kExperimentSchema = R"({
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "indicast experiment configuration",
  "type": "object",
  "required": ["datasets", "methods", "models"],
  "properties": {
    "schema": {"const": "indicast.experiment"},
    "version": {"const": 1},
    "seed": {"type": "integer", "minimum": 0, "default": 0,
             "description": "Base seed; synthetic datasets without their own seed use it. --seed overrides it."},
    "horizon": {"type": "integer", "minimum": 1, "default": 12},
    "output": {"type": "string", "default": "indicast-run", "description": "Run directory; --out overrides it."},
    "datasets": {
      "type": "array", "minItems": 1,
      "items": {
        "type": "object", "required": ["name"],
        "properties": {
          "name": {"type": "string"},
          "synthetic": {"type": "object", "properties": {
            "n_months": {"type": "integer", "default": 76},
            "ar_coefficient": {"type": "number", "default": 0.5},
            "seasonal_amplitude": {"type": "number", "default": 1.0},
            "n_indicators": {"type": "integer", "default": 10},
            "n_drivers": {"type": "integer", "default": 2},
            "driver_betas": {"type": "array", "items": {"type": "number"}, "default": [1.5, -1.0]},
            "noise_sigma": {"type": "number", "default": 0.5},
            "seed": {"type": "integer"},
            "start": {"type": "string", "pattern": "^[0-9]{4}-[0-9]{2}$", "default": "2016-01"}}},
          "csv": {"type": "object", "required": ["target"], "properties": {
            "target": {"type": "string"},
            "indicators": {"type": "array", "items": {"type": "string"}}}},
          "eurostat_cache": {"type": "object", "required": ["root", "target"], "properties": {
            "root": {"type": "string"}, "target": {"type": "string"}}}
        },
        "oneOf": [{"required": ["synthetic"]}, {"required": ["csv"]}, {"required": ["eurostat_cache"]}]
      }
    },
    "ranges": {
      "type": "array",
      "default": [{}],
      "description": "Training windows; the test window is the horizon right after each. {} means everything before the terminal horizon.",
      "items": {"type": "object", "properties": {
        "start": {"type": "string", "pattern": "^[0-9]{4}-[0-9]{2}$"},
        "end": {"type": "string", "pattern": "^[0-9]{4}-[0-9]{2}$"},
        "length": {"type": "integer", "minimum": 1}}}
    },
    "methods": {
      "type": "array", "minItems": 1,
      "items": {"oneOf": [
        {"enum": ["none", "correlation", "lasso", "forward"]},
        {"type": "object", "required": ["manual"], "properties": {"manual": {"type": "array", "items": {"type": "string"}}}}]}
    },
    "models": {
      "type": "array", "minItems": 1,
      "items": {"oneOf": [
        {"type": "object", "required": ["sarimax"], "properties": {"sarimax": {"type": "object", "properties": {
          "order": {"$ref": "#/$defs/order"},
          "grid": {"type": "array", "items": {"$ref": "#/$defs/order"}}}}}},
        {"type": "object", "required": ["additive"], "properties": {"additive": {"oneOf": [
          {"const": "auto"},
          {"type": "object", "properties": {
            "n_changepoints": {"type": "integer"}, "changepoint_range": {"type": "number"},
            "seasonalities": {"type": "array", "items": {"type": "object", "properties": {
              "period": {"type": "number"}, "fourier_order": {"type": "integer"}}}},
            "ar_lags": {"type": "integer"}, "regressor_lags": {"type": "integer"},
            "events": {"type": "array", "items": {"type": "object", "properties": {
              "id": {"type": "string"}, "months": {"type": "array", "items": {"type": "string"}}}}},
            "future_known": {"type": "array", "items": {"type": "string"}},
            "ridge_lambda": {"type": "number"}}}]}}}]}
    },
    "preprocessing": {"type": "object", "properties": {
      "smooth_window": {"type": "integer", "minimum": 1, "default": 1, "description": "Odd; 1 disables smoothing."},
      "normalize": {"type": "boolean", "default": true, "description": "Min-max on the training window only."},
      "detrend": {"type": "boolean", "default": false, "description": "Remove a training-window OLS line; added back to forecasts."}}},
    "selection": {"type": "object", "properties": {
      "correlation": {"type": "object", "properties": {
        "target_threshold": {"type": "number", "default": 0.75},
        "mutual_threshold": {"type": "number", "default": 0.30}}},
      "lasso": {"type": "object", "properties": {
        "lambda": {"type": "number", "description": "Fixed penalty; omit for the validation grid."},
        "grid_points": {"type": "integer", "default": 50},
        "grid_ratio": {"type": "number", "default": 0.0001},
        "validation_fraction": {"type": "number", "default": 0.2}}},
      "forward": {"type": "object", "properties": {"cap": {"type": "integer", "minimum": 1, "default": 20},
                                                    "validation_folds": {"type": "integer", "minimum": 1, "default": 1}}}}},
    "evaluation": {"type": "object", "properties": {
      "rolling_origins": {"type": "integer", "minimum": 1, "default": 1,
                          "description": "Values above 1 average the OOS MAE over that many origins, each one month earlier."}}}
  },
  "$defs": {
    "order": {"type": "object", "properties": {
      "p": {"type": "integer", "default": 0}, "d": {"type": "integer", "default": 0}, "q": {"type": "integer", "default": 0},
      "P": {"type": "integer", "default": 0}, "D": {"type": "integer", "default": 0}, "Q": {"type": "integer", "default": 0},
      "s": {"type": "integer", "default": 12}}}
  }
})";

inline YearMonth month_field(const nlohmann::json& j, const char* key) {
    try {
        return YearMonth::parse(j.at(key).get<std::string>());
    } catch (const ParseError& e) {
        throw ConfigError(std::string(key) + ": " + e.what());
    }
}

inline void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> known, const std::string& where) {
    for (const auto& [key, _] : j.items())
        if (std::find_if(known.begin(), known.end(), [&](const char* k) { return key == k; }) == known.end())
            throw ConfigError("unknown key '" + key + "' in " + where);
}

}  // namespace detail

/// The JSON schema of the configuration file, as printed by --print-schema.
inline std::string experiment_schema() { return detail::kExperimentSchema; }

inline ExperimentConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
    auto resolve = [&](const std::string& p) {
        const std::filesystem::path path(p);
        return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
    };
    try {
        if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
        detail::reject_unknown(j, {"schema", "version", "seed", "horizon", "output", "datasets", "ranges", "methods", "models",
                                   "preprocessing", "selection", "evaluation"},
                               "configuration");
        if (j.contains("schema") && j.at("schema") != "indicast.experiment") throw ConfigError("schema must be 'indicast.experiment'");
        if (j.contains("version") && j.at("version") != kExperimentSchemaVersion)
            throw ConfigError("unsupported configuration version " + j.at("version").dump());

        ExperimentConfig c;
        c.seed = j.value("seed", std::uint64_t{0});
        c.horizon = j.value("horizon", 12);
        if (j.contains("output")) c.output = resolve(j.at("output").get<std::string>());

        for (const auto& d : j.at("datasets")) {
            detail::reject_unknown(d, {"name", "synthetic", "csv", "eurostat_cache"}, "dataset");
            DatasetSpec ds;
            ds.name = d.at("name").get<std::string>();
            const int kinds = static_cast<int>(d.contains("synthetic")) + static_cast<int>(d.contains("csv")) +
                              static_cast<int>(d.contains("eurostat_cache"));
            if (kinds != 1) throw ConfigError("dataset '" + ds.name + "' needs exactly one of synthetic, csv, eurostat_cache");
            if (d.contains("synthetic")) {
                ds.source = synthetic_from_json(d.at("synthetic"), c.seed);
            } else if (d.contains("csv")) {
                CsvSource src;
                src.target = resolve(d.at("csv").at("target").get<std::string>());
                for (const auto& p : d.at("csv").value("indicators", std::vector<std::string>{})) src.indicators.push_back(resolve(p));
                ds.source = src;
            } else {
                const auto& e = d.at("eurostat_cache");
                ds.source = EurostatCacheSource{resolve(e.at("root").get<std::string>()), resolve(e.at("target").get<std::string>())};
            }
            c.datasets.push_back(std::move(ds));
        }

        if (j.contains("ranges")) {
            for (const auto& r : j.at("ranges")) {
                detail::reject_unknown(r, {"start", "end", "length"}, "training range");
                TrainingRange tr;
                if (r.contains("start")) tr.start = detail::month_field(r, "start");
                if (r.contains("end")) tr.end = detail::month_field(r, "end");
                if (r.contains("length")) tr.length = r.at("length").get<int>();
                c.ranges.push_back(tr);
            }
        } else {
            c.ranges.push_back({});
        }

        for (const auto& m : j.at("methods")) {
            MethodSpec ms;
            if (m.is_string()) {
                ms.method = select::method_from_tag(m.get<std::string>());
                if (ms.method == select::Method::manual) throw ConfigError("manual method needs an id list: {\"manual\": [...]}");
            } else {
                detail::reject_unknown(m, {"manual"}, "method");
                ms.method = select::Method::manual;
                ms.manual_ids = m.at("manual").get<std::vector<std::string>>();
            }
            c.methods.push_back(std::move(ms));
        }

        for (const auto& m : j.at("models")) {
            detail::reject_unknown(m, {"sarimax", "additive"}, "model");
            ModelSpec ms;
            if (m.contains("sarimax") == m.contains("additive")) throw ConfigError("each model needs exactly one of sarimax, additive");
            if (m.contains("sarimax")) {
                const auto& s = m.at("sarimax");
                detail::reject_unknown(s, {"order", "grid"}, "sarimax model");
                if (s.contains("order")) ms.order = sarimax::order_from_json(s.at("order"));
                if (s.contains("grid"))
                    for (const auto& o : s.at("grid")) ms.grid.push_back(sarimax::order_from_json(o));
            } else {
                ms.kind = ModelSpec::Kind::additive;
                const auto& a = m.at("additive");
                if (!(a.is_string() && a.get<std::string>() == "auto")) {
                    ms.additive = additive::config_from_json(a);
                    ms.additive->validate();
                }
            }
            c.models.push_back(std::move(ms));
        }

        if (j.contains("preprocessing")) {
            const auto& p = j.at("preprocessing");
            detail::reject_unknown(p, {"smooth_window", "normalize", "detrend"}, "preprocessing");
            c.preprocessing.smooth_window = p.value("smooth_window", 1);
            c.preprocessing.normalize = p.value("normalize", true);
            c.preprocessing.detrend = p.value("detrend", false);
        }
        if (j.contains("selection")) {
            const auto& s = j.at("selection");
            detail::reject_unknown(s, {"correlation", "lasso", "forward"}, "selection");
            if (s.contains("correlation")) {
                detail::reject_unknown(s.at("correlation"), {"target_threshold", "mutual_threshold"}, "selection.correlation");
                c.selection.correlation.target = s.at("correlation").value("target_threshold", 0.75);
                c.selection.correlation.mutual = s.at("correlation").value("mutual_threshold", 0.30);
            }
            if (s.contains("lasso")) {
                const auto& l = s.at("lasso");
                detail::reject_unknown(l, {"lambda", "grid_points", "grid_ratio", "validation_fraction"}, "selection.lasso");
                if (l.contains("lambda")) {
                    c.selection.lasso = select::LassoPolicy::fixed(l.at("lambda").get<double>());
                } else {
                    c.selection.lasso.grid_points = l.value("grid_points", 50);
                    c.selection.lasso.grid_ratio = l.value("grid_ratio", 1e-4);
                    c.selection.lasso.validation_fraction = l.value("validation_fraction", 0.2);
                }
            }
            if (s.contains("forward")) {
                const auto& f = s.at("forward");
                detail::reject_unknown(f, {"cap", "validation_folds"}, "selection.forward");
                c.selection.forward_cap = f.value("cap", 20);
                c.selection.forward_folds = f.value("validation_folds", 1);
            }
        }
        if (j.contains("evaluation")) detail::reject_unknown(j.at("evaluation"), {"rolling_origins"}, "evaluation");
        if (j.contains("evaluation")) c.rolling_origins = j.at("evaluation").value("rolling_origins", 1);
        c.validate();
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("configuration: ") + e.what());
    } catch (const ParseError& e) {
        throw ConfigError(std::string("configuration: ") + e.what());
    } catch (const ContractViolation& e) {
        throw ConfigError(std::string("configuration: ") + e.what());
    }
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return config_from_json(j, path.parent_path());
}

}  // namespace indicast::harness
