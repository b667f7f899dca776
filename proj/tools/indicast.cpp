// indicast: command-line front end for the forecasting toolkit.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "indicast/eurostat.hpp"
#include "indicast/harness.hpp"

namespace fs = std::filesystem;
using namespace indicast;

namespace {

enum Exit : int { kOk = 0, kPartial = 1, kError = 2 };

struct Globals {
    std::optional<fs::path> config;
    std::optional<std::uint64_t> seed;
    std::optional<fs::path> out;
    bool offline = false;
    int jobs = 1;
    bool print_schema = false;
};

/// A data directory holds target.csv plus indicators/<id>.csv, the layout
/// written by `synth` and by experiment runs under datasets/<name>/.
AlignedFrame load_data_dir(const fs::path& dir) {
    const auto target = dir / "target.csv";
    if (!fs::exists(target)) throw IoError("no target.csv in " + dir.string());
    std::vector<fs::path> files;
    if (fs::exists(dir / "indicators"))
        for (const auto& e : fs::directory_iterator(dir / "indicators"))
            if (e.path().extension() == ".csv") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<MonthlySeries> indicators;
    for (const auto& f : files) indicators.push_back(read_series_csv(f));
    return align_merge(read_series_csv(target), indicators);
}

AlignedFrame interpolate_frame(const AlignedFrame& frame) {
    auto fill = [](const MonthlySeries& s) { return s.has_missing() ? interpolate_missing(s) : s; };
    std::vector<MonthlySeries> indicators;
    for (const auto& ind : frame.indicators()) indicators.push_back(fill(ind));
    return AlignedFrame(fill(frame.target()), std::move(indicators));
}

std::vector<std::string> split_ids(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream in(text);
    for (std::string id; std::getline(in, id, ',');)
        if (!id.empty()) out.push_back(id);
    return out;
}

sarimax::SarimaxOrder parse_order(const std::string& text) {
    std::vector<int> v;
    std::stringstream in(text);
    for (std::string part; std::getline(in, part, ',');) {
        try {
            v.push_back(std::stoi(part));
        } catch (const std::exception&) {
            throw ConfigError("order '" + text + "' is not a comma-separated list of integers");
        }
    }
    if (v.size() != 3 && v.size() != 7) throw ConfigError("order takes p,d,q or p,d,q,P,D,Q,s");
    sarimax::SarimaxOrder o{v[0], v[1], v[2]};
    if (v.size() == 7) {
        o.P = v[3];
        o.D = v[4];
        o.Q = v[5];
        o.s = v[6];
    }
    o.validate();
    return o;
}

void emit(const std::optional<fs::path>& out, const fs::path& name, const std::string& text) {
    if (out) {
        write_file_atomic(*out / name, text);
        std::cerr << "wrote " << (*out / name).string() << "\n";
    } else {
        std::cout << text;
    }
}

// ------------------------------------------------------------------- fetch

struct FetchArgs {
    std::optional<fs::path> cache_dir;
    std::string since = "2016-01";
    std::optional<fs::path> keywords;
};

int run_fetch(const Globals& g, const FetchArgs& a) {
    const fs::path cache_dir = a.cache_dir ? *a.cache_dir : g.out ? *g.out : fs::path("eurostat-cache");
    eurostat::ClientOptions options;
    options.offline = g.offline;
    options.cache_dir = cache_dir;
    eurostat::Client client(options);
    eurostat::FunnelOptions funnel;
    funnel.since = YearMonth::parse(a.since);
    if (a.keywords) funnel.keywords = eurostat::parse_keywords(read_file(*a.keywords));
    const auto report = eurostat::run_funnel(client, eurostat::Cache(cache_dir), funnel);

    nlohmann::json j;
    j["cache_dir"] = cache_dir.string();
    j["live_requests"] = client.live_requests();
    nlohmann::json stages = nlohmann::json::array();
    for (const auto& [stage, count] : report.stage_counts) stages.push_back({{"stage", stage}, {"count", count}});
    j["stages"] = stages;
    j["series"] = report.manifest.series.size();
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& [code, reason] : report.failures) failures.push_back({{"dataset", code}, {"reason", reason}});
    j["failures"] = failures;
    std::cout << j.dump(2) << "\n";
    return report.failures.empty() ? kOk : kPartial;
}

// ------------------------------------------------------------------- synth

struct SynthArgs {
    std::optional<int> months, indicators, drivers;
    std::optional<double> noise;
};

int run_synth(const Globals& g, const SynthArgs& a) {
    harness::SyntheticSpec spec;
    if (g.config) {
        const auto j = nlohmann::json::parse(read_file(*g.config));
        spec = harness::synthetic_from_json(j.contains("synthetic") ? j.at("synthetic") : j, g.seed.value_or(0));
    }
    if (g.seed) spec.seed = *g.seed;
    if (a.months) spec.n_months = *a.months;
    if (a.indicators) spec.n_indicators = *a.indicators;
    if (a.drivers) {
        spec.n_drivers = *a.drivers;
        spec.driver_betas.resize(static_cast<std::size_t>(std::max(0, *a.drivers)), 1.0);
    }
    if (a.noise) spec.noise_sigma = *a.noise;
    const auto data = harness::generate_synthetic(spec);

    const fs::path out = g.out.value_or("synthetic");
    write_series_csv(out / "target.csv", data.frame.target());
    for (const auto& ind : data.frame.indicators()) write_series_csv(out / "indicators" / (ind.id() + ".csv"), ind);
    write_file_atomic(out / "truth.json",
                      nlohmann::json{{"driver_ids", data.driver_ids}, {"driver_betas", data.driver_betas}}.dump(2) + "\n");
    write_file_atomic(out / "spec.json", harness::to_json(spec).dump(2) + "\n");
    std::cerr << "wrote " << data.frame.size() << " months x " << data.frame.indicators().size() << " indicators to " << out.string()
              << "\n";
    return kOk;
}

// ------------------------------------------------------------------ select

struct ModelArgs {
    std::string model = "sarimax";
    std::string order = "1,0,0";
};

harness::ModelSpec model_spec(const ModelArgs& a) {
    harness::ModelSpec m;
    if (a.model == "sarimax") {
        m.order = parse_order(a.order);
    } else if (a.model == "additive") {
        m.kind = harness::ModelSpec::Kind::additive;
    } else {
        throw ConfigError("unknown model '" + a.model + "' (sarimax, additive)");
    }
    return m;
}

struct SelectArgs {
    fs::path data;
    std::string method = "forward";
    std::string manual;
    ModelArgs model;
    int horizon = 12;
    int cap = 20;
    int folds = 1;
};

int run_select(const Globals& g, const SelectArgs& a) {
    const auto frame = load_data_dir(a.data);
    const auto prepared = harness::prepare_training(frame, {});
    harness::MethodSpec method{select::method_from_tag(a.method), split_ids(a.manual)};
    harness::CellSettings settings;
    settings.horizon = a.horizon;
    settings.selection.forward_cap = a.cap;
    settings.selection.forward_folds = a.folds;
    settings.forward_jobs = resolve_jobs(g.jobs);
    auto resolved = harness::resolve_model(model_spec(a.model), prepared.frame, a.horizon);
    resolved.normalization = prepared.target.normalization;
    const auto result = harness::detail::run_selection(method, resolved, prepared.frame, settings);

    emit(g.out, "selection.json", select::to_json(result).dump(2) + "\n");
    if (g.out && result.trace) write_file_atomic(*g.out / "trace.csv", select::trace_to_csv(*result.trace));
    for (const auto& d : prepared.dropped) std::cerr << "dropped " << d << "\n";
    return kOk;
}

// --------------------------------------------------------------------- fit

struct FitArgs {
    fs::path data;
    ModelArgs model;
    std::string regressors;
    std::optional<fs::path> selection;
};

int run_fit(const Globals& g, const FitArgs& a) {
    auto frame = load_data_dir(a.data);
    std::vector<std::string> ids = split_ids(a.regressors);
    if (a.selection) ids = select::selection_from_json(nlohmann::json::parse(read_file(*a.selection))).selected_ids;
    const auto train = interpolate_frame(frame.with_indicators(ids));

    nlohmann::json fitted;
    if (a.model.model == "sarimax") {
        fitted = sarimax::to_json(sarimax::fit(train, parse_order(a.model.order)));
    } else if (a.model.model == "additive") {
        fitted = additive::to_json(additive::fit(train, additive::auto_config(train)));
    } else {
        throw ConfigError("unknown model '" + a.model.model + "' (sarimax, additive)");
    }
    fitted["model"] = a.model.model;
    emit(g.out, "model.json", fitted.dump(2) + "\n");
    return kOk;
}

// ---------------------------------------------------------------- forecast

struct ForecastArgs {
    fs::path model;
    std::optional<fs::path> data;
    int horizon = 12;
};

int run_forecast(const Globals& g, const ForecastArgs& a) {
    const auto j = nlohmann::json::parse(read_file(a.model));
    const auto kind = j.value("model", j.contains("order") ? "sarimax" : "additive");
    std::vector<std::string> ids = j.value("regressor_ids", std::vector<std::string>{});

    std::vector<RegressorForecast> future;
    if (!ids.empty()) {
        if (!a.data) throw ConfigError("the model uses regressors; pass --data with their history");
        future = extrapolate_regressors(interpolate_frame(load_data_dir(*a.data).with_indicators(ids)), a.horizon);
    }
    MonthlySeries forecast;
    if (kind == "sarimax") {
        forecast = sarimax::forecast(sarimax::fitted_from_json(j), a.horizon, future);
    } else {
        forecast = additive::forecast(additive::fitted_additive_from_json(j), a.horizon, future);
    }
    emit(g.out, "forecast.csv", series_to_csv(forecast));
    return kOk;
}

// -------------------------------------------------------------- experiment

int run_experiment_cmd(const Globals& g) {
    if (!g.config) throw ConfigError("experiment needs --config <path>");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(*g.config));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(g.config->string() + ": " + e.what());
    }
    if (g.seed) j["seed"] = *g.seed;
    auto config = harness::config_from_json(j, g.config->parent_path());
    if (g.out) config.output = *g.out;

    const auto run = harness::run_experiment(config, {g.jobs, true});
    harness::write_reports(run, config.output);
    std::cout << harness::emit_table(harness::make_table(run), harness::TableFormat::markdown);
    for (const auto& c : run.cells)
        if (!c.ok()) std::cerr << "cell " << c.column << "/" << c.configuration() << " failed [" << c.failure_code << "]: " << c.failure_message << "\n";
    std::cerr << "run written to " << config.output.string() << "\n";
    return run.all_ok() ? kOk : kPartial;
}

// ------------------------------------------------------------------ report

struct ReportArgs {
    std::optional<fs::path> run;
    std::string format = "markdown";
};

int run_report(const Globals& g, const ReportArgs& a) {
    const fs::path dir = a.run ? *a.run : g.out ? *g.out : fs::path("indicast-run");
    const auto run = harness::load_run(dir);
    harness::write_reports(run, g.out.value_or(dir));
    if (a.format != "csv" && a.format != "markdown") throw ConfigError("format must be csv or markdown");
    std::cout << harness::emit_table(harness::make_table(run), a.format == "csv" ? harness::TableFormat::csv : harness::TableFormat::markdown);
    return run.all_ok() ? kOk : kPartial;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"indicast: monthly demand forecasting with automatically selected market indicators"};
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config, "Configuration file (JSON)");
    app.add_option("--seed", g.seed, "Seed override");
    app.add_option("--out", g.out, "Output directory");
    app.add_flag("--offline", g.offline, "Never touch the network; read the cache only");
    app.add_option("--jobs", g.jobs, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    app.add_flag("--print-schema", g.print_schema, "Print the configuration JSON schema and exit");

    FetchArgs fetch;
    auto* fetch_cmd = app.add_subcommand("fetch", "Run the Eurostat funnel into a local cache");
    fetch_cmd->add_option("--cache-dir", fetch.cache_dir, "Cache root (default: --out or ./eurostat-cache)");
    fetch_cmd->add_option("--since", fetch.since, "Required coverage start, YYYY-MM")->capture_default_str();
    fetch_cmd->add_option("--keywords", fetch.keywords, "Keyword file, one per line, # comments")->check(CLI::ExistingFile);

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic planted-driver dataset");
    synth_cmd->add_option("--months", synth.months, "Series length");
    synth_cmd->add_option("--indicators", synth.indicators, "Number of candidate indicators");
    synth_cmd->add_option("--drivers", synth.drivers, "Number of planted drivers (beta 1.0 each unless configured)");
    synth_cmd->add_option("--noise", synth.noise, "Observation noise sigma");

    SelectArgs sel;
    auto* select_cmd = app.add_subcommand("select", "Select indicators for a data directory");
    select_cmd->add_option("--data", sel.data, "Data directory (target.csv, indicators/)")->required()->check(CLI::ExistingDirectory);
    select_cmd->add_option("--method", sel.method, "none, correlation, lasso, forward or manual")->capture_default_str();
    select_cmd->add_option("--manual", sel.manual, "Comma-separated ids for the manual method");
    select_cmd->add_option("--model", sel.model.model, "Model behind forward selection: sarimax or additive")->capture_default_str();
    select_cmd->add_option("--order", sel.model.order, "SARIMAX order p,d,q[,P,D,Q,s]")->capture_default_str();
    select_cmd->add_option("--horizon", sel.horizon, "Validation horizon in months")->capture_default_str();
    select_cmd->add_option("--cap", sel.cap, "Forward selection size cap")->capture_default_str();
    select_cmd->add_option("--folds", sel.folds, "Forward selection validation origins")->capture_default_str();

    FitArgs fit;
    auto* fit_cmd = app.add_subcommand("fit", "Fit a model and write its JSON");
    fit_cmd->add_option("--data", fit.data, "Data directory (target.csv, indicators/)")->required()->check(CLI::ExistingDirectory);
    fit_cmd->add_option("--model", fit.model.model, "sarimax or additive (auto config)")->capture_default_str();
    fit_cmd->add_option("--order", fit.model.order, "SARIMAX order p,d,q[,P,D,Q,s]")->capture_default_str();
    auto* regs = fit_cmd->add_option("--regressors", fit.regressors, "Comma-separated indicator ids");
    fit_cmd->add_option("--selection", fit.selection, "selection.json whose ids to use")->check(CLI::ExistingFile)->excludes(regs);

    ForecastArgs fc;
    auto* forecast_cmd = app.add_subcommand("forecast", "Forecast from a fitted model JSON");
    forecast_cmd->add_option("--model", fc.model, "model.json written by fit")->required()->check(CLI::ExistingFile);
    forecast_cmd->add_option("--data", fc.data, "Data directory with the regressor history")->check(CLI::ExistingDirectory);
    forecast_cmd->add_option("--horizon", fc.horizon, "Months ahead")->capture_default_str()->check(CLI::PositiveNumber);

    auto* experiment_cmd = app.add_subcommand("experiment", "Run the configured dataset x range x method x model grid");

    ReportArgs rep;
    auto* report_cmd = app.add_subcommand("report", "Rebuild tables and plot data from a finished run");
    report_cmd->add_option("run", rep.run, "Run directory (default: --out)");
    report_cmd->add_option("--format", rep.format, "Table printed to stdout: csv or markdown")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    if (g.print_schema) {
        std::cout << harness::experiment_schema() << "\n";
        return kOk;
    }
    try {
        if (*fetch_cmd) return run_fetch(g, fetch);
        if (*synth_cmd) return run_synth(g, synth);
        if (*select_cmd) return run_select(g, sel);
        if (*fit_cmd) return run_fit(g, fit);
        if (*forecast_cmd) return run_forecast(g, fc);
        if (*experiment_cmd) return run_experiment_cmd(g);
        if (*report_cmd) return run_report(g, rep);
        std::cerr << app.help();
        return kError;
    } catch (const Error& e) {
        std::cerr << "error [" << e.code() << "]: " << e.what() << "\n";
        return kError;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error [parse]: " << e.what() << "\n";
        return kError;
    }
}
