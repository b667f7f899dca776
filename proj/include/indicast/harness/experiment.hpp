#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "indicast/eurostat/cache.hpp"
#include "indicast/harness/config.hpp"
#include "indicast/harness/pipeline.hpp"
#include "indicast/parallel.hpp"
#include "indicast/select/json.hpp"
#include "indicast/series_csv.hpp"

namespace indicast::harness {

inline constexpr int kRunSchemaVersion = 1;

struct LoadedDataset {
    std::string name;
    AlignedFrame frame;
    std::vector<std::string> driver_ids;  // synthetic data only
    std::vector<double> driver_betas;
};

inline LoadedDataset load_dataset(const DatasetSpec& spec) {
    LoadedDataset out;
    out.name = spec.name;
    if (const auto* syn = std::get_if<SyntheticSpec>(&spec.source)) {
        auto data = generate_synthetic(*syn);
        out.frame = std::move(data.frame);
        out.driver_ids = std::move(data.driver_ids);
        out.driver_betas = std::move(data.driver_betas);
    } else if (const auto* csv = std::get_if<CsvSource>(&spec.source)) {
        std::vector<MonthlySeries> inds;
        for (const auto& p : csv->indicators) inds.push_back(read_series_csv(p));
        out.frame = align_merge(read_series_csv(csv->target), inds);
    } else {
        const auto& src = std::get<EurostatCacheSource>(spec.source);
        out.frame = align_merge(read_series_csv(src.target), eurostat::Cache(src.root).load_all_series());
    }
    return out;
}

/// One configured combination of dataset, training range, method and model.
struct CellRecord {
    std::size_t dataset = 0, range = 0, method = 0, model = 0;
    std::string column;        // "<dataset>_<training months>"
    std::string method_label;  // unique within the run
    std::string model_label;   // unique within the run
    std::optional<CellOutcome> outcome;
    std::vector<double> origin_maes;  // rolling-origin runs: one per origin, primary first
    std::string failure_code;
    std::string failure_message;

    bool ok() const noexcept { return outcome.has_value(); }
    std::string configuration() const { return model_label + "/" + method_label; }
    double oos_mae() const {
        if (origin_maes.size() <= 1) return outcome->oos_mae;
        double s = 0.0;
        for (double v : origin_maes) s += v;
        return s / static_cast<double>(origin_maes.size());
    }
    int n_exog() const { return static_cast<int>(outcome->selection.selected_ids.size()); }
};

struct ExperimentRun {
    std::vector<std::string> columns;  // dataset-major, ranges in config order
    std::vector<std::string> models;   // row groups, config order
    std::vector<std::string> methods;  // rows within a group, config order
    std::vector<CellRecord> cells;     // keyed order: dataset, range, model, method

    bool all_ok() const {
        for (const auto& c : cells)
            if (!c.ok()) return false;
        return true;
    }
};

struct RunOptions {
    int jobs = 1;
    bool write_artifacts = true;
};

namespace detail {

/// Second and later repeats of a label get "#2", "#3", ...
inline std::vector<std::string> unique_labels(const std::vector<std::string>& labels) {
    std::vector<std::string> out = labels;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto seen = std::count(labels.begin(), labels.begin() + static_cast<long>(i), labels[i]);
        if (seen > 0) out[i] += "#" + std::to_string(seen + 1);
    }
    return out;
}

inline nlohmann::json months_json(const std::vector<YearMonth>& months) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& m : months) out.push_back(m.to_string());
    return out;
}

inline nlohmann::json optional_values_json(const std::vector<std::optional<double>>& values) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& v : values) out.push_back(v ? nlohmann::json(*v) : nlohmann::json(nullptr));
    return out;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

}  // namespace detail

inline nlohmann::json to_json(const CellRecord& c) {
    nlohmann::json j{{"dataset", c.dataset}, {"range", c.range},   {"method", c.method},
                     {"model", c.model},     {"column", c.column}, {"method_label", c.method_label},
                     {"model_label", c.model_label}};
    if (!c.ok()) {
        j["failure"] = {{"code", c.failure_code}, {"message", c.failure_message}};
        return j;
    }
    const auto& o = *c.outcome;
    j["oos_mae"] = c.oos_mae();
    j["n_exog"] = c.n_exog();
    j["selection"] = select::to_json(o.selection);
    j["dropped"] = o.dropped;
    if (o.order) j["order"] = sarimax::to_json(*o.order);
    j["fitted"] = o.fitted;
    j["test"] = {{"months", detail::months_json(o.test_months)},
                 {"actual", detail::optional_values_json(o.actual)},
                 {"predicted", o.predicted},
                 {"oos_mae", o.oos_mae}};
    if (c.origin_maes.size() > 1) j["origin_maes"] = c.origin_maes;
    nlohmann::json path = nlohmann::json::array();
    for (const auto& [n, v] : o.path_oos) path.push_back({{"n_vars", n}, {"oos_mae", v}});
    j["path_oos"] = path;
    return j;
}

inline CellRecord cell_from_json(const nlohmann::json& j) {
    CellRecord c;
    c.dataset = j.at("dataset").get<std::size_t>();
    c.range = j.at("range").get<std::size_t>();
    c.method = j.at("method").get<std::size_t>();
    c.model = j.at("model").get<std::size_t>();
    c.column = j.at("column").get<std::string>();
    c.method_label = j.at("method_label").get<std::string>();
    c.model_label = j.at("model_label").get<std::string>();
    if (j.contains("failure")) {
        c.failure_code = j.at("failure").at("code").get<std::string>();
        c.failure_message = j.at("failure").at("message").get<std::string>();
        return c;
    }
    CellOutcome o;
    o.selection = select::selection_from_json(j.at("selection"));
    o.dropped = j.value("dropped", std::vector<std::string>{});
    if (j.contains("order")) o.order = sarimax::order_from_json(j.at("order"));
    o.fitted = j.at("fitted");
    const auto& t = j.at("test");
    for (const auto& m : t.at("months")) o.test_months.push_back(YearMonth::parse(m.get<std::string>()));
    for (const auto& v : t.at("actual")) o.actual.push_back(v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()));
    o.predicted = t.at("predicted").get<std::vector<double>>();
    o.oos_mae = t.at("oos_mae").get<double>();
    for (const auto& p : j.at("path_oos")) o.path_oos.emplace_back(p.at("n_vars").get<int>(), p.at("oos_mae").get<double>());
    c.origin_maes = j.value("origin_maes", std::vector<double>{});
    c.outcome = std::move(o);
    return c;
}

inline nlohmann::json to_json(const ExperimentRun& run) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : run.cells) cells.push_back(to_json(c));
    return {{"schema", "indicast.run"},
            {"version", kRunSchemaVersion},
            {"columns", run.columns},
            {"models", run.models},
            {"methods", run.methods},
            {"cells", cells}};
}

inline ExperimentRun run_from_json(const nlohmann::json& j) {
    try {
        if (j.value("schema", "") != "indicast.run") throw ParseError("not an experiment run document");
        ExperimentRun run;
        run.columns = j.at("columns").get<std::vector<std::string>>();
        run.models = j.at("models").get<std::vector<std::string>>();
        run.methods = j.at("methods").get<std::vector<std::string>>();
        for (const auto& c : j.at("cells")) run.cells.push_back(cell_from_json(c));
        return run;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("experiment run: ") + e.what());
    }
}

inline ExperimentRun load_run(const std::filesystem::path& dir) {
    const auto path = dir / "run.json";
    if (!std::filesystem::exists(path)) throw IoError("no run.json in " + dir.string());
    try {
        return run_from_json(nlohmann::json::parse(read_file(path)));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

/// Persists a cell's selection, trace, fitted model and forecast under
/// `<out>/cells/<column>/<model>/<method>/`.
inline void write_cell_artifacts(const std::filesystem::path& out, const CellRecord& c) {
    const auto dir = out / "cells" / c.column / c.model_label / c.method_label;
    if (!c.ok()) {
        write_file_atomic(dir / "failure.txt", c.failure_code + ": " + c.failure_message + "\n");
        return;
    }
    const auto& o = *c.outcome;
    detail::write_json(dir / "selection.json", select::to_json(o.selection));
    if (o.selection.trace) write_file_atomic(dir / "trace.csv", select::trace_to_csv(*o.selection.trace));
    detail::write_json(dir / "model.json", o.fitted);
    std::string csv = "period,actual,predicted\n";
    for (std::size_t i = 0; i < o.predicted.size(); ++i)
        csv += o.test_months[i].to_string() + "," + (o.actual[i] ? format_double(*o.actual[i]) : "") + "," +
               format_double(o.predicted[i]) + "\n";
    write_file_atomic(dir / "forecast.csv", csv);
}

/// Runs every dataset x range x model x method cell on a pool of `jobs`
/// workers. Inputs are resolved up front, so an unusable configuration fails
/// before any fitting; afterwards a failing cell is recorded and the rest go on.
inline ExperimentRun run_experiment(const ExperimentConfig& config, const RunOptions& options = {}) {
    config.validate();
    std::vector<LoadedDataset> data;
    for (const auto& spec : config.datasets) {
        try {
            data.push_back(load_dataset(spec));
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw ConfigError("dataset '" + spec.name + "': " + e.what());
        }
    }
    std::vector<std::vector<Window>> windows(data.size());
    ExperimentRun run;
    for (std::size_t d = 0; d < data.size(); ++d) {
        for (const auto& range : config.ranges) {
            try {
                windows[d].push_back(resolve_window(data[d].frame, range, config.horizon));
            } catch (const ConfigError& e) {
                throw ConfigError("dataset '" + data[d].name + "': " + e.what());
            }
            run.columns.push_back(data[d].name + "_" + std::to_string(windows[d].back().train_length));
        }
    }
    {
        std::vector<std::string> m;
        for (const auto& spec : config.methods) m.push_back(spec.label());
        run.methods = detail::unique_labels(m);
        std::vector<std::string> mo;
        for (const auto& spec : config.models) mo.push_back(spec.label());
        run.models = detail::unique_labels(mo);
    }
    run.columns = detail::unique_labels(run.columns);

    std::size_t column = 0;
    for (std::size_t d = 0; d < data.size(); ++d)
        for (std::size_t r = 0; r < config.ranges.size(); ++r, ++column)
            for (std::size_t mo = 0; mo < config.models.size(); ++mo)
                for (std::size_t me = 0; me < config.methods.size(); ++me) {
                    CellRecord c;
                    c.dataset = d;
                    c.range = r;
                    c.model = mo;
                    c.method = me;
                    c.column = run.columns[column];
                    c.model_label = run.models[mo];
                    c.method_label = run.methods[me];
                    run.cells.push_back(std::move(c));
                }

    const int jobs = resolve_jobs(options.jobs);
    CellSettings settings{config.horizon, config.preprocessing, config.selection,
                          std::max(1, jobs / static_cast<int>(run.cells.size()))};

    parallel_for(run.cells.size(), jobs, [&](std::size_t i) {
        auto& cell = run.cells[i];
        const auto& frame = data[cell.dataset].frame;
        const auto window = windows[cell.dataset][cell.range];
        try {
            cell.outcome = run_cell(frame, window, config.methods[cell.method], config.models[cell.model], settings);
            if (config.rolling_origins > 1) {
                cell.origin_maes.push_back(cell.outcome->oos_mae);
                for (int back = 1; back < config.rolling_origins; ++back) {
                    const auto shift = static_cast<std::size_t>(back);
                    if (shift >= window.train_length) throw InsufficientData("rolling origin steps past the training start");
                    const Window earlier{window.offset, window.train_length - shift};
                    cell.origin_maes.push_back(run_cell(frame, earlier, config.methods[cell.method], config.models[cell.model], settings).oos_mae);
                }
            }
        } catch (const Error& e) {
            cell.outcome.reset();
            cell.origin_maes.clear();
            cell.failure_code = e.code();
            cell.failure_message = e.what();
        } catch (const std::exception& e) {
            cell.outcome.reset();
            cell.origin_maes.clear();
            cell.failure_code = "internal";
            cell.failure_message = e.what();
        }
    });

    if (options.write_artifacts) {
        const auto& out = config.output;
        detail::write_json(out / "run.json", to_json(run));
        for (const auto& c : run.cells) write_cell_artifacts(out, c);
        for (const auto& d : data) {
            const auto dir = out / "datasets" / d.name;
            write_series_csv(dir / "target.csv", d.frame.target());
            for (const auto& ind : d.frame.indicators()) write_series_csv(dir / "indicators" / (ind.id() + ".csv"), ind);
            if (!d.driver_ids.empty()) detail::write_json(dir / "truth.json", {{"driver_ids", d.driver_ids}, {"driver_betas", d.driver_betas}});
        }
    }
    return run;
}

}  // namespace indicast::harness
