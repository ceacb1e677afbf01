#pragma once

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "agora/clock.hpp"
#include "agora/wire.hpp"

namespace agora {

// The environment a service runs in: a time source and a way to send
// messages. Services never touch the bus or the clock directly, so the
// simulated substrate can be swapped for a wall-clock one.
class Context {
public:
    virtual ~Context() = default;
    virtual double now() = 0;
    virtual void schedule(double at, std::function<void()> fn) = 0;
    virtual void post(Envelope env) = 0;

    void schedule_in(double delay, std::function<void()> fn) {
        schedule(now() + delay, std::move(fn));
    }
};

class Service {
public:
    virtual ~Service() = default;
    virtual void on_message(const Envelope& env) = 0;
};

// Deterministic in-memory message bus over the virtual clock. Every send is
// appended to the run's message log in canonical form before delivery.
class SimBus : public Context {
public:
    explicit SimBus(VirtualClock& clock) : clock_(clock) {}

    double now() override { return clock_.now(); }
    void schedule(double at, std::function<void()> fn) override {
        clock_.schedule(at, std::move(fn));
    }

    void attach(const std::string& endpoint, Service* svc) { endpoints_[endpoint] = svc; }
    void detach(const std::string& endpoint) { endpoints_.erase(endpoint); }
    bool attached(const std::string& endpoint) const { return endpoints_.count(endpoint) > 0; }

    void crash(const std::string& endpoint) { crashed_.insert(endpoint); }
    void restart(const std::string& endpoint) { crashed_.erase(endpoint); }
    bool crashed(const std::string& endpoint) const { return crashed_.count(endpoint) > 0; }

    double default_latency = 0.01;
    void set_latency(const std::string& sender, const std::string& recipient, double l) {
        link_latency_[{sender, recipient}] = l;
    }

    // Discard the next envelope whose msg_type starts with `type_prefix`
    // (and, if given, whose recipient matches).
    void arm_drop(const std::string& type_prefix, const std::string& recipient = "") {
        drops_.push_back({type_prefix, recipient});
    }

    void post(Envelope env) override {
        env.sent_at = clock_.now();
        log_.push_back(env.line());
        for (auto it = drops_.begin(); it != drops_.end(); ++it) {
            if (starts_with(env.msg_type, it->type_prefix) &&
                (it->recipient.empty() || it->recipient == env.recipient)) {
                drops_.erase(it);
                return;  // swallowed by the injected fault
            }
        }
        double latency = latency_for(env.sender, env.recipient);
        bool down = !endpoints_.count(env.recipient) || crashed_.count(env.recipient);
        if (down) {
            // Bounce a failure notice back to the sender so callers can
            // resolve their pending request.
            Envelope bounce;
            bounce.msg_type = "sim.error";
            bounce.request_id = env.request_id;
            bounce.sender = "sim";
            bounce.recipient = env.sender;
            bounce.body = error_body("unreachable", env.recipient + " is not answering");
            clock_.schedule(clock_.now() + latency, [this, bounce]() mutable { post(bounce); });
            return;
        }
        clock_.schedule(clock_.now() + latency, [this, env]() {
            auto it = endpoints_.find(env.recipient);
            if (it == endpoints_.end() || crashed_.count(env.recipient)) return;
            it->second->on_message(env);
        });
    }

    const std::vector<std::string>& log() const { return log_; }
    std::string log_text() const {
        std::string out;
        for (const auto& l : log_) {
            out += l;
            out += '\n';
        }
        return out;
    }

    size_t count_messages(const std::string& type_prefix, double from_t, double to_t) const {
        size_t n = 0;
        for (const auto& line : log_) {
            Envelope e = Envelope::parse_line(line);
            if (starts_with(e.msg_type, type_prefix) && e.sent_at >= from_t && e.sent_at <= to_t) ++n;
        }
        return n;
    }

private:
    struct DropMatch {
        std::string type_prefix;
        std::string recipient;
    };

    double latency_for(const std::string& sender, const std::string& recipient) const {
        if (auto it = link_latency_.find({sender, recipient}); it != link_latency_.end())
            return it->second;
        // The scenario runner and the trace sink are local introspection
        // endpoints, not network peers.
        if (sender == "run" || recipient == "run" || recipient == "trace") return 0;
        return default_latency;
    }

    VirtualClock& clock_;
    std::map<std::string, Service*> endpoints_;
    std::set<std::string> crashed_;
    std::map<std::pair<std::string, std::string>, double> link_latency_;
    std::deque<DropMatch> drops_;
    std::vector<std::string> log_;
};

// Request/reply plumbing shared by every service: outbound requests carry a
// generated request_id; inbound replies are routed to the stored
// continuation, everything else lands in handle().
class ServiceBase : public Service {
public:
    ServiceBase(Context& ctx, std::string name) : ctx_(ctx), name_(std::move(name)) {}

    const std::string& name() const { return name_; }

    void on_message(const Envelope& env) override {
        if (env.is_reply()) {
            auto it = pending_.find(env.request_id);
            if (it != pending_.end()) {
                auto cont = std::move(it->second);
                pending_.erase(it);
                cont(env);
            }
            return;
        }
        handle(env);
    }

protected:
    virtual void handle(const Envelope& env) = 0;

    void request(const std::string& to, const std::string& type, Json body,
                 std::function<void(const Envelope&)> cont) {
        Envelope env;
        env.msg_type = type;
        env.request_id = name_ + "#" + std::to_string(++req_seq_);
        env.sender = name_;
        env.recipient = to;
        env.body = std::move(body);
        pending_[env.request_id] = std::move(cont);
        ctx_.post(std::move(env));
    }

    void notify(const std::string& to, const std::string& type, Json body) {
        Envelope env;
        env.msg_type = type;
        env.request_id = name_ + "#" + std::to_string(++req_seq_);
        env.sender = name_;
        env.recipient = to;
        env.body = std::move(body);
        ctx_.post(std::move(env));
    }

    void reply(const Envelope& to, Json body) {
        Envelope env;
        env.msg_type = to.msg_type + ".reply";
        env.request_id = to.request_id;
        env.sender = name_;
        env.recipient = to.sender;
        env.body = std::move(body);
        ctx_.post(std::move(env));
    }

    void reply_error(const Envelope& to, const std::string& code, const std::string& message) {
        reply(to, error_body(code, message));
    }

    Context& ctx_;

private:
    std::string name_;
    uint64_t req_seq_ = 0;
    std::map<std::string, std::function<void(const Envelope&)>> pending_;
};

// Absorbs notifications that exist only to appear in the message log
// (telemetry, lifecycle transitions, assertion outcomes).
class TraceSink : public Service {
public:
    void on_message(const Envelope&) override {}
};

}  // namespace agora
