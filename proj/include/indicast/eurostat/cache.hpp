#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "indicast/eurostat/types.hpp"
#include "indicast/series_csv.hpp"

namespace indicast::eurostat {

inline constexpr int kCacheSchemaVersion = 1;

inline nlohmann::json to_json(const DatasetDescriptor& d) {
    return {{"code", d.code},
            {"title", d.title},
            {"frequency", frequency_tag(d.frequency)},
            {"dimension_names", d.dimension_names},
            {"earliest_period", d.earliest_period},
            {"source_parameters", d.source_parameters}};
}

inline DatasetDescriptor descriptor_from_json(const nlohmann::json& j) {
    DatasetDescriptor d;
    d.code = j.at("code").get<std::string>();
    d.title = j.value("title", "");
    d.frequency = frequency_from_tag(j.value("frequency", "other"));
    d.dimension_names = j.value("dimension_names", std::vector<std::string>{});
    d.earliest_period = j.value("earliest_period", "");
    d.source_parameters = j.value("source_parameters", std::vector<std::string>{});
    return d;
}

inline nlohmann::json to_json(const CatalogSnapshot& s) {
    nlohmann::json ds = nlohmann::json::array();
    for (const auto& d : s.descriptors) ds.push_back(to_json(d));
    return {{"schema", "indicast.eurostat.catalog"},
            {"version", kCacheSchemaVersion},
            {"fetched_at", s.fetched_at},
            {"descriptors", ds},
            {"warnings", s.warnings}};
}

inline CatalogSnapshot catalog_from_json(const nlohmann::json& j) {
    try {
        if (j.value("schema", "") != "indicast.eurostat.catalog") throw ParseError("not a catalog document");
        CatalogSnapshot s;
        s.fetched_at = j.at("fetched_at").get<std::string>();
        for (const auto& d : j.at("descriptors")) s.descriptors.push_back(descriptor_from_json(d));
        s.warnings = j.value("warnings", std::vector<std::string>{});
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("catalog document: ") + e.what());
    }
}

struct ManifestEntry {
    SeriesKey key;
    std::string file;  // relative to the cache root
    std::string fetched_at;
    friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

/// What was fetched, from where, and through which funnel stages.
struct Manifest {
    std::string endpoint;
    std::string fetched_at;
    std::vector<std::string> filter_stages;
    std::vector<std::pair<std::string, std::size_t>> stage_counts;
    std::vector<ManifestEntry> series;
    friend bool operator==(const Manifest&, const Manifest&) = default;
};

inline nlohmann::json to_json(const Manifest& m) {
    nlohmann::json counts = nlohmann::json::array();
    for (const auto& [stage, n] : m.stage_counts) counts.push_back({{"stage", stage}, {"count", n}});
    nlohmann::json series = nlohmann::json::array();
    for (const auto& e : m.series) {
        nlohmann::json dims = nlohmann::json::array();
        for (const auto& [name, value] : e.key.dimension_values) dims.push_back({name, value});
        series.push_back({{"dataset_code", e.key.dataset_code},
                          {"dimension_values", dims},
                          {"file", e.file},
                          {"fetched_at", e.fetched_at}});
    }
    return {{"schema", "indicast.eurostat.manifest"},
            {"version", kCacheSchemaVersion},
            {"endpoint", m.endpoint},
            {"fetched_at", m.fetched_at},
            {"filter_stages", m.filter_stages},
            {"stage_counts", counts},
            {"series", series}};
}

inline Manifest manifest_from_json(const nlohmann::json& j) {
    try {
        if (j.value("schema", "") != "indicast.eurostat.manifest") throw ParseError("not a cache manifest");
        Manifest m;
        m.endpoint = j.at("endpoint").get<std::string>();
        m.fetched_at = j.at("fetched_at").get<std::string>();
        m.filter_stages = j.at("filter_stages").get<std::vector<std::string>>();
        for (const auto& c : j.at("stage_counts"))
            m.stage_counts.emplace_back(c.at("stage").get<std::string>(), c.at("count").get<std::size_t>());
        for (const auto& e : j.at("series")) {
            ManifestEntry entry;
            entry.key.dataset_code = e.at("dataset_code").get<std::string>();
            for (const auto& d : e.at("dimension_values"))
                entry.key.dimension_values.emplace_back(d.at(0).get<std::string>(), d.at(1).get<std::string>());
            entry.file = e.at("file").get<std::string>();
            entry.fetched_at = e.value("fetched_at", "");
            m.series.push_back(std::move(entry));
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("cache manifest: ") + e.what());
    }
}

/// On-disk layout under `root`:
///   catalog.json, manifest.json, raw/<name> (archived responses),
///   <dataset_code>/<key-hash>.csv (one representative series each).
class Cache {
public:
    explicit Cache(std::filesystem::path root) : root_(std::move(root)) {}

    const std::filesystem::path& root() const noexcept { return root_; }

    void store_catalog(const CatalogSnapshot& snapshot) const {
        write_file_atomic(root_ / "catalog.json", to_json(snapshot).dump(2) + "\n");
    }

    CatalogSnapshot load_catalog() const { return catalog_from_json(load_json(root_ / "catalog.json", "catalog")); }

    std::filesystem::path series_path(const SeriesKey& key) const {
        return root_ / key.dataset_code / (key.hash() + ".csv");
    }

    std::filesystem::path store_series(const SeriesKey& key, const MonthlySeries& series) const {
        const auto path = series_path(key);
        write_file_atomic(path, series_to_csv(series));
        return path;
    }

    MonthlySeries load_series(const SeriesKey& key) const {
        const auto path = series_path(key);
        if (!std::filesystem::exists(path))
            throw NotCached("series " + key.dataset_code + "[" + key.coordinates() + "] is not cached at " + path.string());
        return series_from_csv(read_file(path), key.dataset_code);
    }

    void store_manifest(const Manifest& m) const { write_file_atomic(root_ / "manifest.json", to_json(m).dump(2) + "\n"); }

    Manifest load_manifest() const { return manifest_from_json(load_json(root_ / "manifest.json", "manifest")); }

    /// Every series listed in the manifest, in manifest order.
    std::vector<MonthlySeries> load_all_series() const {
        std::vector<MonthlySeries> out;
        for (const auto& e : load_manifest().series) out.push_back(load_series(e.key));
        return out;
    }

    void archive_raw(const std::string& name, const std::string& payload) const {
        write_file_atomic(root_ / "raw" / name, payload);
    }

    std::optional<std::string> load_raw(const std::string& name) const {
        const auto path = root_ / "raw" / name;
        if (!std::filesystem::exists(path)) return std::nullopt;
        return read_file(path);
    }

private:
    nlohmann::json load_json(const std::filesystem::path& path, const std::string& what) const {
        if (!std::filesystem::exists(path)) throw NotCached("no cached " + what + " at " + path.string());
        try {
            return nlohmann::json::parse(read_file(path));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.string() + ": " + e.what());
        }
    }

    std::filesystem::path root_;
};

}  // namespace indicast::eurostat
