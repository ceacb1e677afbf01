#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "agora/bus.hpp"

namespace agora {

// One advertised host. memory_free and price are pushed by the host's
// auctioneer on every heartbeat, so queries never talk to hosts directly.
struct HostRecord {
    std::string host_id;
    std::string address;
    double cpu_capacity = 0;
    int64_t memory_total = 0;
    int64_t memory_free = 0;
    double price = 0;
    double last_heartbeat = 0;

    Json to_json() const {
        return Json{{"address", address},
                    {"cpu_capacity", cpu_capacity},
                    {"host_id", host_id},
                    {"memory_free", memory_free},
                    {"memory_total", memory_total},
                    {"price", price}};
    }

    static HostRecord from_json(const Json& h) {
        HostRecord rec;
        rec.host_id = h.at("host_id").get<std::string>();
        rec.address = h.at("address").get<std::string>();
        rec.cpu_capacity = h.at("cpu_capacity").get<double>();
        rec.memory_total = h.at("memory_total").get<int64_t>();
        rec.memory_free = h.at("memory_free").get<int64_t>();
        rec.price = h.at("price").get<double>();
        return rec;
    }
};

// Service-location directory: hosts register and heartbeat, clients ask for
// hosts ranked by price. Records are evicted lazily on access once a host
// has been silent longer than the liveness window.
class Directory : public ServiceBase {
public:
    Directory(Context& ctx, double liveness_window = 30.0, std::string name = "sls")
        : ServiceBase(ctx, std::move(name)), liveness_window_(liveness_window) {
        if (liveness_window_ <= 0) fail("bad_config", "liveness window must be > 0");
    }

    void register_host(HostRecord rec) {
        if (rec.host_id.empty()) fail("bad_record", "host_id required");
        if (rec.cpu_capacity <= 0) fail("bad_record", "cpu_capacity must be > 0");
        if (rec.memory_total <= 0) fail("bad_record", "memory_total must be > 0");
        rec.last_heartbeat = ctx_.now();
        records_[rec.host_id] = std::move(rec);
    }

    // Refreshes liveness plus the fast-moving fields. Returns false when the
    // host was already evicted and must register again.
    bool heartbeat(const std::string& host_id, double price, int64_t memory_free) {
        evict_stale();
        auto it = records_.find(host_id);
        if (it == records_.end()) return false;
        it->second.price = price;
        it->second.memory_free = memory_free;
        it->second.last_heartbeat = ctx_.now();
        return true;
    }

    // Live hosts ordered by (price, host_id); at most limit entries.
    std::vector<HostRecord> query_ranked(size_t limit) {
        evict_stale();
        std::vector<HostRecord> out;
        out.reserve(records_.size());
        for (auto& [id, rec] : records_) out.push_back(rec);
        std::sort(out.begin(), out.end(), [](const HostRecord& a, const HostRecord& b) {
            if (a.price != b.price) return a.price < b.price;
            return a.host_id < b.host_id;
        });
        if (out.size() > limit) out.resize(limit);
        return out;
    }

    bool knows(const std::string& host_id) {
        evict_stale();
        return records_.count(host_id) > 0;
    }

    size_t live_count() {
        evict_stale();
        return records_.size();
    }

protected:
    void handle(const Envelope& env) override {
        try {
            if (env.msg_type == "sls.register") {
                HostRecord rec;
                rec.host_id = env.body.at("host_id").get<std::string>();
                rec.address = env.body.at("address").get<std::string>();
                rec.cpu_capacity = env.body.at("cpu_capacity").get<double>();
                rec.memory_total = env.body.at("memory_total").get<int64_t>();
                rec.memory_free = env.body.at("memory_free").get<int64_t>();
                rec.price = env.body.at("price").get<double>();
                register_host(std::move(rec));
                reply(env, Json{{"host_id", env.body.at("host_id")}, {"registered", true}});
            } else if (env.msg_type == "sls.heartbeat") {
                std::string host_id = env.body.at("host_id").get<std::string>();
                bool ok = heartbeat(host_id, env.body.at("price").get<double>(),
                                    env.body.at("memory_free").get<int64_t>());
                if (ok)
                    reply(env, Json{{"host_id", host_id}, {"live", true}});
                else
                    reply_error(env, "unknown_host", "not registered: " + host_id);
            } else if (env.msg_type == "sls.query") {
                size_t limit = env.body.value("limit", size_t{100});
                Json hosts = Json::array();
                for (const auto& rec : query_ranked(limit)) hosts.push_back(rec.to_json());
                reply(env, Json{{"hosts", std::move(hosts)}});
            } else {
                reply_error(env, "bad_request", "unknown message type: " + env.msg_type);
            }
        } catch (const Error& e) {
            reply_error(env, e.code(), e.what());
        } catch (const Json::exception& e) {
            reply_error(env, "bad_request", e.what());
        }
    }

private:
    void evict_stale() {
        double cutoff = ctx_.now() - liveness_window_;
        for (auto it = records_.begin(); it != records_.end();) {
            if (it->second.last_heartbeat < cutoff)
                it = records_.erase(it);
            else
                ++it;
        }
    }

    double liveness_window_;
    std::map<std::string, HostRecord> records_;
};

}  // namespace agora
