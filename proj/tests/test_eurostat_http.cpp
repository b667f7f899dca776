#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <thread>

#include "indicast/eurostat.hpp"

using namespace indicast;
using namespace indicast::eurostat;
using namespace std::chrono_literals;

namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = fs::path(INDICAST_FIXTURES) / "eurostat";

/// Serves the fixture files under /api on a loopback port and counts hits.
class FixtureServer {
public:
    FixtureServer() {
        server_.Get("/api/catalogue/toc/txt", [this](const httplib::Request&, httplib::Response& res) {
            ++hits_;
            res.set_content(read_file(kFixtures / "toc.txt"), "text/plain");
        });
        server_.Get(R"(/api/statistics/1\.0/data/(\w+))", [this](const httplib::Request& req, httplib::Response& res) {
            ++hits_;
            const std::string code = req.matches[1];
            if (code == "slow_m") std::this_thread::sleep_for(300ms);
            if (code == "broken_m") {
                res.status = 500;
                return;
            }
            const auto file = kFixtures / ((code == "slow_m" ? std::string("ei_bsin_m") : code) + ".json");
            if (!fs::exists(file)) {
                res.status = 404;
                res.set_content(read_file(kFixtures / "error_unknown.json"), "application/json");
                return;
            }
            if (req.get_param_value("format") != "JSON") {
                res.status = 400;
                return;
            }
            res.set_content(read_file(file), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~FixtureServer() {
        server_.stop();
        thread_.join();
    }

    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/api"; }
    int hits() const { return hits_.load(); }

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::atomic<int> hits_{0};
};

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("indicast_http_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

ClientOptions live(const FixtureServer& server, std::chrono::milliseconds interval = 0ms) {
    ClientOptions o;
    o.base_url = server.base_url();
    o.min_interval = interval;
    o.timeout = 5s;
    return o;
}

}  // namespace

TEST(Http, FetchesCatalogAndDataset) {
    FixtureServer server;
    Client client(live(server));
    EXPECT_EQ(client.fetch_catalog().descriptors.size(), 5u);
    const auto ds = client.fetch_dataset("ei_bsin_m");
    EXPECT_EQ(ds.observation_count(), 46u);
    EXPECT_EQ(client.live_requests(), 2);
    EXPECT_EQ(server.hits(), 2);
}

TEST(Http, NotFoundIsUnknownId) {
    FixtureServer server;
    Client client(live(server));
    EXPECT_THROW(client.fetch_dataset("no_such_m"), UnknownId);
}

TEST(Http, ServerErrorIsNetworkError) {
    FixtureServer server;
    Client client(live(server));
    EXPECT_THROW(client.fetch_dataset("broken_m"), NetworkError);
}

TEST(Http, UnreachableEndpointIsNetworkError) {
    ClientOptions o;
    o.base_url = "http://127.0.0.1:1/api";
    o.timeout = 2s;
    Client client(o);
    EXPECT_THROW(client.fetch_catalog(), NetworkError);
}

TEST(Http, ArchivesResponsesForOfflineReplay) {
    FixtureServer server;
    const auto root = scratch("archive");
    auto opts = live(server);
    opts.cache_dir = root;
    Client online(opts);
    const auto snap = online.fetch_catalog();
    const auto ds = online.fetch_dataset("ei_bsin_m");
    EXPECT_EQ(read_file(root / "raw" / "toc.txt"), read_file(kFixtures / "toc.txt"));

    opts.offline = true;
    Client offline(opts);
    EXPECT_EQ(offline.fetch_catalog().descriptors, snap.descriptors);
    EXPECT_EQ(offline.fetch_dataset("ei_bsin_m").series, ds.series);
    EXPECT_EQ(offline.live_requests(), 0);
    EXPECT_EQ(server.hits(), 2);
}

TEST(Http, RequestsAreSpacedByTheMinimumInterval) {
    FixtureServer server;
    Client client(live(server, 250ms));
    const auto start = std::chrono::steady_clock::now();
    client.fetch_catalog();
    client.fetch_dataset("ei_bsin_m");
    client.fetch_dataset("ext_st_m");
    const auto elapsed = std::chrono::steady_clock::now() - start;
    EXPECT_GE(elapsed, 500ms);
    EXPECT_EQ(server.hits(), 3);
}

TEST(Http, ConcurrentRequestsForOneDatasetShareADownload) {
    FixtureServer server;
    Client client(live(server));
    std::vector<std::thread> threads;
    std::vector<std::size_t> counts(6);
    for (std::size_t i = 0; i < counts.size(); ++i)
        threads.emplace_back([&, i] { counts[i] = client.fetch_dataset("slow_m").observation_count(); });
    for (auto& t : threads) t.join();
    for (auto c : counts) EXPECT_EQ(c, 46u);
    EXPECT_EQ(server.hits(), 1);
    EXPECT_EQ(client.live_requests(), 1);
}

TEST(Http, LiveFunnelMatchesOfflineFunnel) {
    FixtureServer server;
    const auto live_root = scratch("funnel_live");
    auto opts = live(server);
    opts.cache_dir = live_root;
    Client client(opts);
    FunnelOptions fo;
    fo.keywords = {"business", "trade"};
    const auto online = run_funnel(client, Cache(live_root), fo);

    opts.offline = true;
    const auto offline_root = scratch("funnel_replay");
    fs::copy(live_root / "raw", offline_root / "raw");
    opts.cache_dir = offline_root;
    Client replay_client(opts);
    const auto offline = run_funnel(replay_client, Cache(offline_root), fo);
    EXPECT_EQ(online.stage_counts, offline.stage_counts);
    EXPECT_EQ(Cache(live_root).load_all_series(), Cache(offline_root).load_all_series());
    EXPECT_EQ(replay_client.live_requests(), 0);
}

TEST(Http, EnvironmentOverridesBaseUrl) {
    ::setenv(kBaseUrlEnv, "http://127.0.0.1:8080/mirror", 1);
    EXPECT_EQ(ClientOptions{}.base_url, "http://127.0.0.1:8080/mirror");
    ::unsetenv(kBaseUrlEnv);
    EXPECT_EQ(ClientOptions{}.base_url, kDefaultBaseUrl);
}
