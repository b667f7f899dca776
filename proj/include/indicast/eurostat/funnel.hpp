#pragma once

#include <algorithm>
#include <cctype>
#include <sstream>
#include <string>
#include <vector>

#include "indicast/eurostat/types.hpp"

namespace indicast::eurostat {

/// One step of the catalog funnel.
struct FilterStage {
    enum class Kind { monthly, parameters, coverage } kind = Kind::monthly;
    std::vector<std::string> keywords;  // parameters stage
    YearMonth since{2016, 1};           // coverage stage

    static FilterStage monthly() { return {}; }
    static FilterStage parameters(std::vector<std::string> kw) { return {Kind::parameters, std::move(kw), {}}; }
    static FilterStage coverage(YearMonth since) { return {Kind::coverage, {}, since}; }

    std::string describe() const {
        switch (kind) {
            case Kind::monthly: return "monthly";
            case Kind::parameters: {
                std::string out = "parameters(";
                for (std::size_t i = 0; i < keywords.size(); ++i) out += (i ? "," : "") + keywords[i];
                return out + ")";
            }
            case Kind::coverage: return "coverage(" + since.to_string() + ")";
        }
        return "";
    }

    friend bool operator==(const FilterStage&, const FilterStage&) = default;
};

namespace detail {

inline std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

inline bool keeps(const DatasetDescriptor& d, const FilterStage& stage) {
    switch (stage.kind) {
        case FilterStage::Kind::monthly: return d.frequency == Frequency::monthly;
        case FilterStage::Kind::parameters:
            for (const auto& label : d.source_parameters) {
                const auto l = lower(label);
                for (const auto& kw : stage.keywords)
                    if (!kw.empty() && l.find(lower(kw)) != std::string::npos) return true;
            }
            return false;
        case FilterStage::Kind::coverage: {
            const auto first = d.earliest_month();
            return first && *first <= stage.since;
        }
    }
    return false;
}

}  // namespace detail

/// Keeps the descriptors passing `stage`. Keyword matching is a
/// case-insensitive substring test against each source parameter.
inline CatalogSnapshot filter_catalog(const CatalogSnapshot& snapshot, const FilterStage& stage) {
    CatalogSnapshot out;
    out.fetched_at = snapshot.fetched_at;
    out.warnings = snapshot.warnings;
    for (const auto& d : snapshot.descriptors)
        if (detail::keeps(d, stage)) out.descriptors.push_back(d);
    return out;
}

/// One keyword per line; blank lines and lines starting with '#' are skipped.
inline std::vector<std::string> parse_keywords(std::string_view text) {
    std::vector<std::string> out;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos || line[b] == '#') continue;
        const auto e = line.find_last_not_of(" \t\r");
        out.push_back(line.substr(b, e - b + 1));
    }
    return out;
}

/// Indicator families that tend to lead industrial demand.
inline std::vector<std::string> default_keywords() {
    return {"business", "consumer", "confidence", "industry", "industrial", "production", "trade", "retail",
            "construction", "prices", "labour market", "energy", "sentiment", "short-term"};
}

/// Chooses the single series of `dataset` that best covers `since` to the
/// dataset's last period: complete series first, then fewest gaps; ties by
/// smallest dimension values. Gaps stay missing.
inline std::pair<SeriesKey, MonthlySeries> pick_representative(const RawDataset& dataset, YearMonth since) {
    if (dataset.series.empty()) throw InsufficientData("dataset '" + dataset.code + "' holds no series");
    std::vector<YearMonth> months;
    for (const auto& p : dataset.periods) {
        try {
            months.push_back(YearMonth::parse(p));
        } catch (const ParseError&) {
            throw ParseError("dataset '" + dataset.code + "' has non-monthly period '" + p + "'");
        }
    }
    const auto last = *std::max_element(months.begin(), months.end());
    if (last < since) {
        throw InsufficientData("dataset '" + dataset.code + "' ends at " + last.to_string() + ", before " + since.to_string());
    }
    const auto width = static_cast<std::size_t>(months_between(since, last) + 1);

    const SeriesKey* best_key = nullptr;
    std::vector<std::optional<double>> best_values;
    std::size_t best_missing = 0;
    for (const auto& [key, raw] : dataset.series) {
        std::vector<std::optional<double>> window(width);
        for (std::size_t t = 0; t < months.size(); ++t) {
            if (months[t] < since) continue;
            window[static_cast<std::size_t>(months_between(since, months[t]))] = raw[t];
        }
        const auto missing = static_cast<std::size_t>(std::count(window.begin(), window.end(), std::nullopt));
        if (missing == width) continue;
        // map iteration is in key order, so strict improvement keeps the smallest key on ties
        if (!best_key || missing < best_missing) {
            best_key = &key;
            best_values = std::move(window);
            best_missing = missing;
        }
    }
    if (!best_key) throw InsufficientData("dataset '" + dataset.code + "' has no values from " + since.to_string());
    return {*best_key, MonthlySeries(dataset.code, since, std::move(best_values))};
}

}  // namespace indicast::eurostat
