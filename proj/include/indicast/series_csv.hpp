#pragma once

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>

#include "indicast/series.hpp"

namespace indicast {

/// Shortest text that parses back to the identical double.
inline std::string format_double(double v) {
    char buf[32];
    for (int precision = 15; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

/// Writes `contents` to `path` through a sibling temp file and a rename.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    static std::atomic<unsigned long> counter{0};
    auto tmp = path;
    tmp += ".tmp." + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()) % 1000003) + "." +
           std::to_string(counter++);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out << contents;
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        std::error_code ignored;
        fs::remove(tmp, ignored);
        throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
    }
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// CSV with header `period,value`; missing values are empty fields.
inline std::string series_to_csv(const MonthlySeries& series) {
    std::string out = "period,value\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        out += series.month_at(i).to_string();
        out += ',';
        if (series[i]) out += format_double(*series[i]);
        out += '\n';
    }
    return out;
}

inline MonthlySeries series_from_csv(std::string_view text, std::string id) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line)) throw ParseError("series '" + id + "': empty CSV");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "period,value") throw ParseError("series '" + id + "': expected header 'period,value', got '" + line + "'");

    std::optional<YearMonth> start;
    std::vector<std::optional<double>> values;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ParseError("series '" + id + "' line " + std::to_string(lineno) + ": missing ','");
        const auto month = YearMonth::parse(std::string_view(line).substr(0, comma));
        if (!start) {
            start = month;
        } else if (month != start->plus(static_cast<int>(values.size()))) {
            throw ParseError("series '" + id + "' line " + std::to_string(lineno) + ": month " + month.to_string() +
                             " breaks the consecutive index");
        }
        const std::string field = line.substr(comma + 1);
        if (field.empty()) {
            values.emplace_back(std::nullopt);
        } else {
            char* end = nullptr;
            const double v = std::strtod(field.c_str(), &end);
            if (end != field.c_str() + field.size())
                throw ParseError("series '" + id + "' line " + std::to_string(lineno) + ": bad number '" + field + "'");
            values.emplace_back(v);
        }
    }
    if (!start) throw ParseError("series '" + id + "': no data rows");
    return MonthlySeries(std::move(id), *start, std::move(values));
}

inline void write_series_csv(const std::filesystem::path& path, const MonthlySeries& series) {
    write_file_atomic(path, series_to_csv(series));
}

/// Loads one series; its id is the file stem.
inline MonthlySeries read_series_csv(const std::filesystem::path& path) {
    return series_from_csv(read_file(path), path.stem().string());
}

}  // namespace indicast
