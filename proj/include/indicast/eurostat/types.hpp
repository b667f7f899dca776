#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "indicast/series.hpp"

namespace indicast::eurostat {

enum class Frequency { monthly, quarterly, annual, other };

inline std::string frequency_tag(Frequency f) {
    switch (f) {
        case Frequency::monthly: return "monthly";
        case Frequency::quarterly: return "quarterly";
        case Frequency::annual: return "annual";
        case Frequency::other: return "other";
    }
    return "other";
}

inline Frequency frequency_from_tag(const std::string& s) {
    for (auto f : {Frequency::monthly, Frequency::quarterly, Frequency::annual, Frequency::other})
        if (frequency_tag(f) == s) return f;
    throw ParseError("unknown frequency '" + s + "'");
}

struct DatasetDescriptor {
    std::string code;
    std::string title;
    Frequency frequency = Frequency::other;
    std::vector<std::string> dimension_names;
    std::string earliest_period;                 // as published: "2016M01", "2016Q1", "2016"
    std::vector<std::string> source_parameters;  // titles of the enclosing catalog folders

    /// First calendar month covered by `earliest_period`, when it can be read.
    std::optional<YearMonth> earliest_month() const {
        const auto& p = earliest_period;
        if (p.size() < 4) return std::nullopt;
        int year = 0;
        for (std::size_t i = 0; i < 4; ++i) {
            if (p[i] < '0' || p[i] > '9') return std::nullopt;
            year = year * 10 + (p[i] - '0');
        }
        if (p.size() == 4) return YearMonth{year, 1};
        if (p.size() == 6 && p[4] == 'Q' && p[5] >= '1' && p[5] <= '4') return YearMonth{year, 3 * (p[5] - '1') + 1};
        try {
            return YearMonth::parse(p);
        } catch (const ParseError&) {
            return std::nullopt;
        }
    }

    friend bool operator==(const DatasetDescriptor&, const DatasetDescriptor&) = default;
};

struct CatalogSnapshot {
    std::string fetched_at;  // ISO-8601 UTC
    std::vector<DatasetDescriptor> descriptors;
    std::vector<std::string> warnings;

    const DatasetDescriptor* find(const std::string& code) const {
        for (const auto& d : descriptors)
            if (d.code == code) return &d;
        return nullptr;
    }

    friend bool operator==(const CatalogSnapshot&, const CatalogSnapshot&) = default;
};

/// Identifies one series inside a dataset by fixing every non-time dimension.
struct SeriesKey {
    std::string dataset_code;
    std::vector<std::pair<std::string, std::string>> dimension_values;

    /// "geo=AT,unit=I15"
    std::string coordinates() const {
        std::string out;
        for (const auto& [name, value] : dimension_values) {
            if (!out.empty()) out += ',';
            out += name + '=' + value;
        }
        return out;
    }

    /// 16 hex digits of FNV-1a over the coordinates; names the cache file.
    std::string hash() const {
        std::uint64_t h = 14695981039346656037ull;
        for (unsigned char c : coordinates()) h = (h ^ c) * 1099511628211ull;
        static constexpr char digits[] = "0123456789abcdef";
        std::string out(16, '0');
        for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = digits[h & 0xf];
        return out;
    }

    friend bool operator==(const SeriesKey&, const SeriesKey&) = default;
    friend auto operator<=>(const SeriesKey&, const SeriesKey&) = default;
};

struct Dimension {
    std::string id;
    std::vector<std::string> codes;  // category codes in payload order
    friend bool operator==(const Dimension&, const Dimension&) = default;
};

/// A dataset as published: every series over the dataset's time labels.
struct RawDataset {
    std::string code;
    std::string label;
    std::vector<Dimension> dimensions;  // non-time dimensions, payload order
    std::vector<std::string> periods;   // time labels, payload order
    std::map<SeriesKey, std::vector<std::optional<double>>> series;

    std::size_t observation_count() const {
        std::size_t n = 0;
        for (const auto& [key, values] : series)
            for (const auto& v : values) n += v.has_value();
        return n;
    }
};

}  // namespace indicast::eurostat
