#pragma once

// Everything that knows the remote payload formats lives here: the tab-separated
// table of contents and JSON-stat 2.0 dataset responses.

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "indicast/eurostat/types.hpp"

namespace indicast::eurostat {

inline Frequency infer_frequency(std::string_view period) {
    auto digits = [&](std::size_t from, std::size_t count) {
        if (period.size() < from + count) return false;
        for (std::size_t i = from; i < from + count; ++i)
            if (!std::isdigit(static_cast<unsigned char>(period[i]))) return false;
        return true;
    };
    if (!digits(0, 4)) return Frequency::other;
    if (period.size() == 4) return Frequency::annual;
    if (period.size() == 7 && (period[4] == 'M' || period[4] == '-') && digits(5, 2)) return Frequency::monthly;
    if (period.size() == 6 && period[4] == 'Q' && period[5] >= '1' && period[5] <= '4') return Frequency::quarterly;
    return Frequency::other;
}

namespace detail {

inline std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto tab = line.find('\t', start);
        out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
        if (tab == std::string::npos) break;
        start = tab + 1;
    }
    return out;
}

inline std::string unquote(std::string s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
        s = s.substr(1, s.size() - 2);
        std::string out;
        for (std::size_t i = 0; i < s.size(); ++i) {
            out += s[i];
            if (s[i] == '"' && i + 1 < s.size() && s[i + 1] == '"') ++i;
        }
        return out;
    }
    return s;
}

inline void merge_labels(std::vector<std::string>& into, const std::vector<std::string>& from) {
    for (const auto& l : from)
        if (std::find(into.begin(), into.end(), l) == into.end()) into.push_back(l);
}

}  // namespace detail

/// Parses the tab-separated table of contents. Leading spaces in the title
/// (four per level) give the folder depth; each dataset inherits the titles
/// of its enclosing folders as source parameters. Duplicate codes are merged
/// into the first occurrence and reported in `warnings`.
inline CatalogSnapshot parse_toc(std::string_view text, std::string fetched_at) {
    CatalogSnapshot snap;
    snap.fetched_at = std::move(fetched_at);
    std::istringstream in{std::string(text)};
    std::string line;
    std::vector<std::string> folders;
    std::size_t lineno = 0;
    bool any_row = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (lineno == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
        if (line.empty()) continue;
        auto fields = detail::split_tabs(line);
        for (auto& f : fields) f = detail::unquote(f);
        if (fields[0] == "title") continue;  // header row
        if (fields.size() < 6) {
            throw ParseError("table of contents line " + std::to_string(lineno) + ": expected at least 6 tab-separated fields, got " +
                             std::to_string(fields.size()));
        }
        std::size_t indent = 0;
        while (indent < fields[0].size() && fields[0][indent] == ' ') ++indent;
        const std::size_t depth = indent / 4;
        std::string title = fields[0].substr(indent);
        while (!title.empty() && title.back() == ' ') title.pop_back();
        const std::string& code = fields[1];
        const std::string& type = fields[2];
        if (code.empty()) throw ParseError("table of contents line " + std::to_string(lineno) + ": empty code");
        any_row = true;

        if (type == "folder") {
            folders.resize(std::min(folders.size(), depth));
            folders.push_back(title);
            continue;
        }
        if (type != "dataset" && type != "table") {
            throw ParseError("table of contents line " + std::to_string(lineno) + ": unknown entry type '" + type + "'");
        }
        DatasetDescriptor d;
        d.code = code;
        d.title = title;
        d.earliest_period = fields[5];
        d.frequency = infer_frequency(d.earliest_period);
        d.source_parameters.assign(folders.begin(), folders.begin() + static_cast<long>(std::min(folders.size(), depth)));

        auto it = std::find_if(snap.descriptors.begin(), snap.descriptors.end(), [&](const auto& e) { return e.code == code; });
        if (it != snap.descriptors.end()) {
            detail::merge_labels(it->source_parameters, d.source_parameters);
            snap.warnings.push_back("duplicate code '" + code + "' at line " + std::to_string(lineno) + " merged into its first entry");
            continue;
        }
        snap.descriptors.push_back(std::move(d));
    }
    if (!any_row) throw ParseError("table of contents is empty");
    return snap;
}

namespace detail {

/// Category codes of one JSON-stat dimension, in index order.
inline std::vector<std::string> category_codes(const nlohmann::json& dim, std::size_t size) {
    const auto& cat = dim.at("category");
    std::vector<std::string> codes(size);
    if (cat.contains("index")) {
        const auto& index = cat.at("index");
        if (index.is_array()) {
            for (std::size_t i = 0; i < index.size() && i < size; ++i) codes[i] = index[i].get<std::string>();
        } else {
            for (const auto& [code, pos] : index.items()) {
                const auto p = pos.get<std::size_t>();
                if (p >= size) throw ParseError("category index " + std::to_string(p) + " out of range");
                codes[p] = code;
            }
        }
    } else if (cat.contains("label") && cat.at("label").size() == 1 && size == 1) {
        codes[0] = cat.at("label").begin().key();
    } else {
        throw ParseError("dimension without a category index");
    }
    for (const auto& c : codes)
        if (c.empty()) throw ParseError("dimension category index has holes");
    return codes;
}

}  // namespace detail

/// Parses a JSON-stat 2.0 dataset. Only series holding at least one value are kept.
inline RawDataset parse_jsonstat(std::string_view text, const std::string& code) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("dataset '" + code + "': " + e.what());
    }
    try {
        if (j.contains("error")) {
            const auto& err = j.at("error");
            const auto& first = err.is_array() && !err.empty() ? err[0] : err;
            const std::string label = first.is_object() ? first.value("label", "") : std::string();
            throw UnknownId("dataset '" + code + "' rejected by the service: " + label);
        }
        RawDataset ds;
        ds.code = code;
        ds.label = j.value("label", "");
        const auto ids = j.at("id").get<std::vector<std::string>>();
        const auto sizes = j.at("size").get<std::vector<std::size_t>>();
        if (ids.size() != sizes.size()) throw ParseError("dataset '" + code + "': id and size lengths differ");

        std::string time_id = "time";
        if (j.contains("role") && j.at("role").contains("time") && !j.at("role").at("time").empty())
            time_id = j.at("role").at("time")[0].get<std::string>();
        const auto time_pos = static_cast<std::size_t>(std::find(ids.begin(), ids.end(), time_id) - ids.begin());
        if (time_pos == ids.size()) throw ParseError("dataset '" + code + "' has no time dimension");

        std::size_t total = 1;
        for (auto s : sizes) total *= s;
        std::vector<std::vector<std::string>> codes;
        for (std::size_t d = 0; d < ids.size(); ++d) codes.push_back(detail::category_codes(j.at("dimension").at(ids[d]), sizes[d]));
        ds.periods = codes[time_pos];
        for (std::size_t d = 0; d < ids.size(); ++d)
            if (d != time_pos) ds.dimensions.push_back({ids[d], codes[d]});

        std::map<std::size_t, double> values;
        const auto& v = j.contains("value") ? j.at("value") : nlohmann::json();
        if (v.is_array()) {
            if (v.size() != total) throw ParseError("dataset '" + code + "': value array length does not match the dimension sizes");
            for (std::size_t i = 0; i < v.size(); ++i)
                if (!v[i].is_null()) values[i] = v[i].get<double>();
        } else if (v.is_object()) {
            for (const auto& [k, val] : v.items()) {
                std::size_t idx = 0;
                try {
                    idx = std::stoul(k);
                } catch (const std::exception&) {
                    throw ParseError("dataset '" + code + "': bad value key '" + k + "'");
                }
                if (idx >= total) throw ParseError("dataset '" + code + "': value index " + k + " out of range");
                if (!val.is_null()) values[idx] = val.get<double>();
            }
        }
        if (total == 0 || values.empty()) throw InsufficientData("dataset '" + code + "' has no observations");

        std::vector<std::size_t> stride(ids.size(), 1);
        for (std::size_t d = ids.size(); d-- > 1;) stride[d - 1] = stride[d] * sizes[d];
        for (const auto& [flat, value] : values) {
            SeriesKey key{code, {}};
            std::size_t t = 0;
            for (std::size_t d = 0; d < ids.size(); ++d) {
                const std::size_t pos = (flat / stride[d]) % sizes[d];
                if (d == time_pos) {
                    t = pos;
                } else {
                    key.dimension_values.emplace_back(ids[d], codes[d][pos]);
                }
            }
            auto& row = ds.series[key];
            if (row.empty()) row.resize(ds.periods.size());
            row[t] = value;
        }
        return ds;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("dataset '" + code + "': " + e.what());
    }
}

}  // namespace indicast::eurostat
