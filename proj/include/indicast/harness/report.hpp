#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "indicast/harness/experiment.hpp"
#include "indicast/select/forward.hpp"
#include "indicast/series_csv.hpp"

namespace indicast::harness {

struct TableCell {
    std::optional<double> oos_mae;
    std::optional<int> n_exog;
    std::string failure;  // reason code when the cell failed
    bool best = false;    // lowest OOS MAE among the model's methods in this column
};

struct TableRow {
    std::string model;
    std::string method;
    std::vector<TableCell> cells;  // one per column
};

/// Methods as rows grouped by model, dataset x range as columns.
struct ResultsTable {
    std::vector<std::string> columns;
    std::vector<TableRow> rows;
};

inline constexpr const char* kExogRowLabel = "Nbr. Exogenous variables";

inline ResultsTable make_table(const ExperimentRun& run) {
    ResultsTable t;
    t.columns = run.columns;
    for (const auto& model : run.models)
        for (const auto& method : run.methods) t.rows.push_back({model, method, std::vector<TableCell>(t.columns.size())});

    auto column_index = [&](const std::string& c) {
        return static_cast<std::size_t>(std::find(t.columns.begin(), t.columns.end(), c) - t.columns.begin());
    };
    for (const auto& c : run.cells) {
        auto row = std::find_if(t.rows.begin(), t.rows.end(), [&](const TableRow& r) { return r.model == c.model_label && r.method == c.method_label; });
        const auto col = column_index(c.column);
        if (row == t.rows.end() || col >= t.columns.size()) throw ContractViolation("cell does not belong to the run layout");
        auto& cell = row->cells[col];
        if (c.ok()) {
            cell.oos_mae = c.oos_mae();
            cell.n_exog = c.n_exog();
        } else {
            cell.failure = c.failure_code;
        }
    }
    for (const auto& model : run.models) {
        for (std::size_t col = 0; col < t.columns.size(); ++col) {
            std::optional<double> best;
            for (const auto& r : t.rows)
                if (r.model == model && r.cells[col].oos_mae && (!best || *r.cells[col].oos_mae < *best)) best = r.cells[col].oos_mae;
            for (auto& r : t.rows)
                if (r.model == model && best && r.cells[col].oos_mae == best) r.cells[col].best = true;
        }
    }
    return t;
}

enum class TableFormat { csv, markdown };

namespace detail {

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::string score_text(const TableCell& c) {
    if (!c.failure.empty()) return "FAIL(" + c.failure + ")";
    if (!c.oos_mae) return "";
    return format_double(*c.oos_mae);
}

inline std::string count_text(const TableCell& c) { return c.n_exog ? std::to_string(*c.n_exog) : "-"; }

}  // namespace detail

/// Renders the table. Each method row is followed by an indented sub-row with
/// the number of exogenous variables used. Both formats print the same number
/// strings; the best cell per model and column is marked with a trailing '*'
/// in CSV and in bold in Markdown.
inline std::string emit_table(const ResultsTable& t, TableFormat format) {
    std::string out;
    if (format == TableFormat::csv) {
        out += "model,method";
        for (const auto& c : t.columns) out += "," + detail::csv_field(c);
        out += "\n";
        for (const auto& r : t.rows) {
            out += detail::csv_field(r.model) + "," + detail::csv_field(r.method);
            for (const auto& c : r.cells) out += "," + detail::score_text(c) + (c.best ? "*" : "");
            out += "\n" + detail::csv_field(r.model) + ",  " + kExogRowLabel;
            for (const auto& c : r.cells) out += "," + detail::count_text(c);
            out += "\n";
        }
        return out;
    }
    out += "| Model | Method |";
    for (const auto& c : t.columns) out += " " + c + " |";
    out += "\n|---|---|";
    for (std::size_t i = 0; i < t.columns.size(); ++i) out += "---:|";
    out += "\n";
    std::string previous_model;
    for (const auto& r : t.rows) {
        out += "| " + (r.model == previous_model ? std::string() : r.model) + " | " + r.method + " |";
        previous_model = r.model;
        for (const auto& c : r.cells) {
            const auto s = detail::score_text(c);
            out += " " + (c.best ? "**" + s + "**" : s) + " |";
        }
        out += "\n| | &emsp;" + std::string(kExogRowLabel) + " |";
        for (const auto& c : r.cells) out += " " + detail::count_text(c) + " |";
        out += "\n";
    }
    return out;
}

inline void write_table(const ResultsTable& t, TableFormat format, const std::filesystem::path& path) {
    write_file_atomic(path, emit_table(t, format));
}

struct PlotFiles {
    std::filesystem::path forecasts, score_development, abs_errors;
};

/// Long-format plot data for one column (dataset x range):
///   forecasts.csv          period, actual, one prediction column per configuration
///   score_development.csv  n_vars, mean OOS MAE along the forward-selection paths
///   abs_errors.csv         configuration, period, absolute error
/// Failed configurations get empty prediction cells and no error rows.
inline PlotFiles emit_plot_data(const ExperimentRun& run, const std::string& column, const std::filesystem::path& dir) {
    std::vector<const CellRecord*> cells;
    for (const auto& c : run.cells)
        if (c.column == column) cells.push_back(&c);
    if (cells.empty()) throw UnknownId("no column '" + column + "' in the run");

    const CellRecord* reference = nullptr;
    for (const auto* c : cells)
        if (c->ok()) {
            reference = c;
            break;
        }

    std::string forecasts = "period,actual";
    for (const auto* c : cells) forecasts += "," + detail::csv_field(c->configuration());
    forecasts += "\n";
    std::string errors = "configuration,period,abs_error\n";
    if (reference) {
        const auto& ref = *reference->outcome;
        for (std::size_t i = 0; i < ref.test_months.size(); ++i) {
            forecasts += ref.test_months[i].to_string() + "," + (ref.actual[i] ? format_double(*ref.actual[i]) : "");
            for (const auto* c : cells) forecasts += "," + (c->ok() ? format_double(c->outcome->predicted[i]) : "");
            forecasts += "\n";
        }
        for (const auto* c : cells) {
            if (!c->ok()) continue;
            const auto& o = *c->outcome;
            for (std::size_t i = 0; i < o.test_months.size(); ++i)
                errors += detail::csv_field(c->configuration()) + "," + o.test_months[i].to_string() + "," +
                          (o.actual[i] ? format_double(std::abs(*o.actual[i] - o.predicted[i])) : "") + "\n";
        }
    }

    std::vector<select::SelectionTrace> paths;
    for (const auto* c : cells) {
        if (!c->ok() || c->outcome->path_oos.empty()) continue;
        select::SelectionTrace trace;
        for (const auto& [n, score] : c->outcome->path_oos) {
            select::TraceEntry e;
            e.subset.assign(static_cast<std::size_t>(n), std::string());
            e.score = score;
            e.on_path = true;
            trace.entries.push_back(std::move(e));
        }
        paths.push_back(std::move(trace));
    }
    std::string development = "n_vars,mean_oos_mae\n";
    if (!paths.empty())
        for (const auto& [n, v] : select::score_development(paths)) development += std::to_string(n) + "," + format_double(v) + "\n";

    PlotFiles files{dir / "forecasts.csv", dir / "score_development.csv", dir / "abs_errors.csv"};
    write_file_atomic(files.forecasts, forecasts);
    write_file_atomic(files.score_development, development);
    write_file_atomic(files.abs_errors, errors);
    return files;
}

/// Tables in both formats plus plot data for every column, under `out`.
inline void write_reports(const ExperimentRun& run, const std::filesystem::path& out) {
    const auto table = make_table(run);
    write_table(table, TableFormat::csv, out / "table.csv");
    write_table(table, TableFormat::markdown, out / "table.md");
    for (const auto& column : run.columns) emit_plot_data(run, column, out / "plots" / column);
}

}  // namespace indicast::harness
