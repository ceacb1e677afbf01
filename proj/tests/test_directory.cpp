#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "agora/bus.hpp"
#include "agora/clock.hpp"
#include "agora/directory.hpp"

using namespace agora;

namespace {

HostRecord make_host(const std::string& id, double price, int64_t mem_free = 1024) {
    HostRecord r;
    r.host_id = id;
    r.address = "auc:" + id;
    r.cpu_capacity = 1.0;
    r.memory_total = 2048;
    r.memory_free = mem_free;
    r.price = price;
    return r;
}

struct Caller : ServiceBase {
    using ServiceBase::ServiceBase;
    Json last;
    void call(const std::string& to, const std::string& type, Json body) {
        request(to, type, std::move(body), [this](const Envelope& r) { last = r.body; });
    }
    void handle(const Envelope&) override {}
};

}  // namespace

TEST_CASE("directory ranks hosts by price then id") {
    VirtualClock clock;
    SimBus bus(clock);
    Directory dir(bus);
    dir.register_host(make_host("h2", 0.5));
    dir.register_host(make_host("h1", 0.25));
    dir.register_host(make_host("h3", 0.25));

    auto ranked = dir.query_ranked(10);
    REQUIRE(ranked.size() == 3);
    REQUIRE(ranked[0].host_id == "h1");
    REQUIRE(ranked[1].host_id == "h3");
    REQUIRE(ranked[2].host_id == "h2");

    auto top = dir.query_ranked(2);
    REQUIRE(top.size() == 2);
    REQUIRE(top[1].host_id == "h3");
}

TEST_CASE("registration validates and re-registration overwrites") {
    VirtualClock clock;
    SimBus bus(clock);
    Directory dir(bus);
    REQUIRE_THROWS_AS(dir.register_host(make_host("", 0.5)), Error);
    HostRecord bad = make_host("h1", 0.5);
    bad.cpu_capacity = 0;
    REQUIRE_THROWS_AS(dir.register_host(bad), Error);

    dir.register_host(make_host("h1", 0.5));
    dir.register_host(make_host("h1", 0.75));
    auto ranked = dir.query_ranked(10);
    REQUIRE(ranked.size() == 1);
    REQUIRE(ranked[0].price == 0.75);
}

TEST_CASE("heartbeats refresh liveness and the fast-moving fields") {
    VirtualClock clock;
    SimBus bus(clock);
    Directory dir(bus, 30.0);
    dir.register_host(make_host("h1", 0.5, 2048));

    clock.advance_to(25.0);
    REQUIRE(dir.heartbeat("h1", 0.8, 1024));
    auto ranked = dir.query_ranked(10);
    REQUIRE(ranked[0].price == 0.8);
    REQUIRE(ranked[0].memory_free == 1024);

    // Refreshed at t=25, so still live at t=54, gone after t=55.
    clock.advance_to(54.0);
    REQUIRE(dir.knows("h1"));
    clock.advance_to(55.5);
    REQUIRE_FALSE(dir.knows("h1"));
    REQUIRE_FALSE(dir.heartbeat("h1", 0.8, 1024));
    REQUIRE(dir.live_count() == 0);
}

TEST_CASE("silent hosts are evicted exactly after the liveness window") {
    VirtualClock clock;
    SimBus bus(clock);
    Directory dir(bus, 30.0);
    dir.register_host(make_host("h1", 0.5));
    clock.advance_to(30.0);
    REQUIRE(dir.knows("h1"));  // exactly at the window edge is still live
    clock.advance_to(30.001);
    REQUIRE_FALSE(dir.knows("h1"));
}

TEST_CASE("ranked queries match a brute-force sort oracle") {
    std::mt19937_64 rng(987654321);
    for (int trial = 0; trial < 1000; ++trial) {
        VirtualClock clock;
        SimBus bus(clock);
        Directory dir(bus);
        size_t n = rng() % 101;
        std::vector<std::pair<double, std::string>> oracle;
        for (size_t i = 0; i < n; ++i) {
            char buf[8];
            std::snprintf(buf, sizeof(buf), "h%03zu", i);
            // Few distinct prices so ties are common.
            double price = static_cast<double>(rng() % 7) * 0.125;
            dir.register_host(make_host(buf, price));
            oracle.emplace_back(price, buf);
        }
        std::sort(oracle.begin(), oracle.end());  // pair order = (price, id)
        size_t limit = 1 + rng() % 120;
        auto ranked = dir.query_ranked(limit);
        REQUIRE(ranked.size() == std::min(limit, n));
        for (size_t i = 0; i < ranked.size(); ++i) {
            REQUIRE(ranked[i].price == oracle[i].first);
            REQUIRE(ranked[i].host_id == oracle[i].second);
        }
    }
}

TEST_CASE("directory answers over the wire and demands re-registration after eviction") {
    VirtualClock clock;
    SimBus bus(clock);
    Directory dir(bus, 30.0);
    Caller c(bus, "c");
    bus.attach("sls", &dir);
    bus.attach("c", &c);

    c.call("sls", "sls.register",
           Json{{"address", "auc:h1"},
                {"cpu_capacity", 2.0},
                {"host_id", "h1"},
                {"memory_free", 4096},
                {"memory_total", 4096},
                {"price", 0.0}});
    clock.advance_to(1.0);
    REQUIRE(c.last.at("registered") == true);

    c.call("sls", "sls.heartbeat", Json{{"host_id", "h1"}, {"memory_free", 2048}, {"price", 1.5}});
    clock.advance_to(2.0);
    REQUIRE(c.last.at("live") == true);

    c.call("sls", "sls.query", Json{{"limit", 10}});
    clock.advance_to(3.0);
    REQUIRE(c.last.at("hosts").size() == 1);
    REQUIRE(c.last.at("hosts")[0].at("price") == 1.5);
    REQUIRE(c.last.at("hosts")[0].at("memory_free") == 2048);

    // Silence past the window: the next heartbeat is refused.
    clock.advance_to(40.0);
    c.call("sls", "sls.heartbeat", Json{{"host_id", "h1"}, {"memory_free", 2048}, {"price", 1.5}});
    clock.advance_to(41.0);
    REQUIRE(c.last.at("error").at("code") == "unknown_host");

    c.call("sls", "sls.query", Json{{"limit", 10}});
    clock.advance_to(42.0);
    REQUIRE(c.last.at("hosts").empty());
}
