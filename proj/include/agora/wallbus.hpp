#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <queue>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <httplib.h>

#include "agora/bus.hpp"
#include "agora/wire.hpp"

namespace agora {

// Wall-clock transport for live demos: each process hosts its services
// behind an HTTP listener and posts envelopes to its peers' /msg endpoints.
// Services are written against Context only, so the same code runs here and
// on the simulated bus; reproducibility guarantees stay with the simulated
// one.
class WallBus : public Context {
public:
    // peers: endpoint name -> "host:port" for everything not attached locally.
    WallBus(std::string listen_host, int listen_port, std::map<std::string, std::string> peers)
        : host_(std::move(listen_host)),
          peers_(std::move(peers)),
          epoch_(std::chrono::steady_clock::now()) {
        server_.Post("/msg", [this](const httplib::Request& req, httplib::Response& res) {
            {
                std::lock_guard<std::mutex> lk(mu_);
                inbound_.push_back(req.body);
            }
            wake_.notify_one();
            res.set_content("{\"ok\":true}", "application/json");
        });
        if (!server_.bind_to_port(host_, listen_port))
            fail("bind_failed", "cannot listen on " + host_ + ":" + std::to_string(listen_port));
        server_thread_ = std::thread([this]() { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~WallBus() override { stop(); }

    // Attach all local services before calling run().
    void attach(const std::string& endpoint, Service* svc) { locals_[endpoint] = svc; }

    double now() override {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - epoch_).count();
    }

    void schedule(double at, std::function<void()> fn) override {
        {
            std::lock_guard<std::mutex> lk(mu_);
            timers_.push(Timer{at, seq_++, std::move(fn)});
        }
        wake_.notify_one();
    }

    void post(Envelope env) override {
        env.sent_at = now();
        std::string line = env.line();
        if (locals_.count(env.recipient)) {
            {
                std::lock_guard<std::mutex> lk(mu_);
                inbound_.push_back(std::move(line));
            }
            wake_.notify_one();
            return;
        }
        auto it = peers_.find(env.recipient);
        if (it == peers_.end()) {
            std::cerr << "wallbus: no route to '" << env.recipient << "', dropping "
                      << env.msg_type << "\n";
            return;
        }
        size_t colon = it->second.rfind(':');
        std::string peer_host = it->second.substr(0, colon);
        int peer_port = std::stoi(it->second.substr(colon + 1));
        httplib::Client cli(peer_host, peer_port);
        cli.set_connection_timeout(2, 0);
        auto res = cli.Post("/msg", line, "application/json");
        if (!res)
            std::cerr << "wallbus: post to " << env.recipient << " failed: "
                      << httplib::to_string(res.error()) << "\n";
    }

    // Serves deliveries and timers until stop(), or for `until` wall-clock
    // seconds when until > 0.
    void run(double until = 0) {
        while (!stopping_) {
            std::vector<std::string> batch;
            std::vector<std::function<void()>> due;
            {
                std::unique_lock<std::mutex> lk(mu_);
                wake_.wait_for(lk, std::chrono::milliseconds(2));
                batch.assign(inbound_.begin(), inbound_.end());
                inbound_.clear();
                while (!timers_.empty() && timers_.top().at <= now()) {
                    due.push_back(timers_.top().fn);
                    timers_.pop();
                }
            }
            for (const auto& line : batch) {
                Envelope env;
                try {
                    env = Envelope::parse_line(line);
                } catch (const std::exception& e) {
                    std::cerr << "wallbus: dropping malformed envelope: " << e.what() << "\n";
                    continue;
                }
                auto it = locals_.find(env.recipient);
                if (it != locals_.end()) it->second->on_message(env);
            }
            for (auto& fn : due) fn();
            if (until > 0 && now() >= until) break;
        }
    }

    void stop() {
        stopping_ = true;
        wake_.notify_all();
        if (server_.is_running()) server_.stop();
        if (server_thread_.joinable()) server_thread_.join();
    }

private:
    struct Timer {
        double at;
        uint64_t seq;
        std::function<void()> fn;
        bool operator>(const Timer& o) const {
            return at != o.at ? at > o.at : seq > o.seq;
        }
    };

    std::string host_;
    std::map<std::string, std::string> peers_;
    std::map<std::string, Service*> locals_;
    std::chrono::steady_clock::time_point epoch_;

    httplib::Server server_;
    std::thread server_thread_;
    std::atomic<bool> stopping_{false};

    std::mutex mu_;
    std::condition_variable wake_;
    std::deque<std::string> inbound_;
    std::priority_queue<Timer, std::vector<Timer>, std::greater<Timer>> timers_;
    uint64_t seq_ = 0;
};

}  // namespace agora
