#pragma once

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include <httplib.h>
// <resolv.h> defines _res as a macro, which breaks Eigen headers included later.
#undef _res

#include "indicast/eurostat/cache.hpp"
#include "indicast/eurostat/funnel.hpp"
#include "indicast/eurostat/wire.hpp"

namespace indicast::eurostat {

inline constexpr const char* kDefaultBaseUrl = "https://ec.europa.eu/eurostat/api/dissemination";
inline constexpr const char* kBaseUrlEnv = "INDICAST_EUROSTAT_BASE_URL";

/// The base URL from the environment override, else the public endpoint.
inline std::string default_base_url() {
    const char* env = std::getenv(kBaseUrlEnv);
    return env && *env ? std::string(env) : std::string(kDefaultBaseUrl);
}

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct ClientOptions {
    std::string base_url = default_base_url();
    bool offline = false;
    std::optional<std::filesystem::path> cache_dir;  // raw responses are archived and, offline, replayed from here
    std::chrono::milliseconds min_interval{250};
    std::chrono::seconds timeout{60};
};

/// Catalog and dataset access. Live requests go through one queue with a
/// minimum spacing; concurrent requests for the same resource share a single
/// download. Offline, payloads come only from fixtures or the cache.
class Client {
public:
    explicit Client(ClientOptions options = {}) : options_(std::move(options)) {
        const auto scheme_end = options_.base_url.find("://");
        if (scheme_end == std::string::npos) throw ConfigError("base URL '" + options_.base_url + "' has no scheme");
        const auto path_start = options_.base_url.find('/', scheme_end + 3);
        origin_ = options_.base_url.substr(0, path_start);
        prefix_ = path_start == std::string::npos ? "" : options_.base_url.substr(path_start);
        while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
    }

    const ClientOptions& options() const noexcept { return options_; }
    std::string catalog_endpoint() const { return options_.base_url + catalog_path(); }
    int live_requests() const {
        std::lock_guard lock(queue_mutex_);
        return live_requests_;
    }

    CatalogSnapshot fetch_catalog(const std::optional<std::filesystem::path>& fixture = std::nullopt) {
        const auto text = payload("toc.txt", catalog_path(), fixture);
        return parse_toc(text, utc_timestamp());
    }

    RawDataset fetch_dataset(const std::string& code, const std::optional<std::filesystem::path>& fixture = std::nullopt) {
        require(!code.empty() && code.find_first_of("/?#&. ") == std::string::npos, "invalid dataset code '" + code + "'");
        const auto text = payload(code + ".json", "/statistics/1.0/data/" + code + "?format=JSON&lang=EN", fixture);
        return parse_jsonstat(text, code);
    }

private:
    static std::string catalog_path() { return "/catalogue/toc/txt?lang=en"; }

    std::string payload(const std::string& archive_name, const std::string& resource,
                        const std::optional<std::filesystem::path>& fixture) {
        if (fixture) return read_file(*fixture);
        if (options_.cache_dir) {
            if (options_.offline) {
                if (auto raw = Cache(*options_.cache_dir).load_raw(archive_name)) return *raw;
                throw NotCached("offline and no cached response '" + archive_name + "' under " + options_.cache_dir->string());
            }
        } else if (options_.offline) {
            throw NotCached("offline and neither a fixture nor a cache directory was given for '" + archive_name + "'");
        }
        auto text = single_flight(resource);
        if (options_.cache_dir) Cache(*options_.cache_dir).archive_raw(archive_name, text);
        return text;
    }

    std::string single_flight(const std::string& resource) {
        std::shared_future<std::string> pending;
        std::promise<std::string> mine;
        bool owner = false;
        {
            std::lock_guard lock(flight_mutex_);
            auto it = in_flight_.find(resource);
            if (it != in_flight_.end()) {
                pending = it->second;
            } else {
                pending = mine.get_future().share();
                in_flight_.emplace(resource, pending);
                owner = true;
            }
        }
        if (!owner) return pending.get();
        try {
            mine.set_value(rate_limited_get(resource));
        } catch (...) {
            mine.set_exception(std::current_exception());
        }
        {
            std::lock_guard lock(flight_mutex_);
            in_flight_.erase(resource);
        }
        return pending.get();
    }

    std::string rate_limited_get(const std::string& resource) {
        std::lock_guard lock(queue_mutex_);
        if (last_request_) {
            const auto ready = *last_request_ + options_.min_interval;
            std::this_thread::sleep_until(ready);
        }
        last_request_ = std::chrono::steady_clock::now();
        ++live_requests_;

        httplib::Client http(origin_);
        http.set_connection_timeout(options_.timeout);
        http.set_read_timeout(options_.timeout);
        http.set_follow_location(true);
        const auto url = origin_ + prefix_ + resource;
        auto res = http.Get(prefix_ + resource);
        if (!res) throw NetworkError("GET " + url + " failed: " + httplib::to_string(res.error()));
        if (res->status == 404) throw UnknownId("GET " + url + ": not found (404)");
        if (res->status != 200) throw NetworkError("GET " + url + ": HTTP " + std::to_string(res->status));
        return res->body;
    }

    ClientOptions options_;
    std::string origin_;
    std::string prefix_;

    mutable std::mutex queue_mutex_;
    std::optional<std::chrono::steady_clock::time_point> last_request_;
    int live_requests_ = 0;

    std::mutex flight_mutex_;
    std::map<std::string, std::shared_future<std::string>> in_flight_;
};

struct FunnelOptions {
    std::vector<std::string> keywords = default_keywords();
    YearMonth since{2016, 1};
};

struct FunnelReport {
    std::vector<std::pair<std::string, std::size_t>> stage_counts;
    Manifest manifest;
    std::vector<std::pair<std::string, std::string>> failures;  // dataset code, reason
};

/// Catalog, then monthly, parameters and coverage stages, then one
/// representative series per surviving dataset, all persisted in `cache`.
/// A dataset that cannot be fetched or reduced is reported and skipped.
inline FunnelReport run_funnel(Client& client, const Cache& cache, const FunnelOptions& options) {
    FunnelReport report;
    const auto snapshot = client.fetch_catalog();
    cache.store_catalog(snapshot);

    const std::vector<FilterStage> stages{FilterStage::monthly(), FilterStage::parameters(options.keywords),
                                          FilterStage::coverage(options.since)};
    report.stage_counts.emplace_back("catalog", snapshot.descriptors.size());
    auto current = snapshot;
    for (const auto& stage : stages) {
        current = filter_catalog(current, stage);
        report.stage_counts.emplace_back(stage.describe(), current.descriptors.size());
        report.manifest.filter_stages.push_back(stage.describe());
    }

    report.manifest.endpoint = client.options().base_url;
    report.manifest.fetched_at = snapshot.fetched_at;
    report.manifest.stage_counts = report.stage_counts;
    for (const auto& d : current.descriptors) {
        try {
            const auto raw = client.fetch_dataset(d.code);
            const auto [key, series] = pick_representative(raw, options.since);
            const auto path = cache.store_series(key, series);
            report.manifest.series.push_back(
                {key, std::filesystem::relative(path, cache.root()).generic_string(), utc_timestamp()});
        } catch (const Error& e) {
            report.failures.emplace_back(d.code, e.code() + ": " + e.what());
        }
    }
    cache.store_manifest(report.manifest);
    return report;
}

}  // namespace indicast::eurostat
