#pragma once

#include <map>
#include <string>
#include <vector>

#include "agora/bank.hpp"
#include "agora/bus.hpp"
#include "agora/directory.hpp"
#include "agora/market.hpp"
#include "agora/simhost.hpp"

namespace agora {

struct AuctioneerConfig {
    std::string provider_account;  // credited when a bid settles
    std::string bank = "bank";
    std::string sls = "sls";
    std::string trace = "trace";
    double heartbeat_interval = 10;
    double boot_delay = 5;
};

// Runs the proportional-share auction for one host. A bid buys a CPU share
// for its stated duration; the full amount settles up front, so expiry and
// adjustment involve no further bank traffic. Invariants: every active bid
// owns exactly one VM, and the sum of granted CPU rates equals the host
// capacity whenever any bid is active.
class Auctioneer : public ServiceBase {
public:
    struct ActiveBid {
        Bid bid;
        std::string vm_id;
    };

    Auctioneer(Context& ctx, SimHost& host, AuctioneerConfig cfg)
        : ServiceBase(ctx, "auc:" + host.id()), host_(host), cfg_(std::move(cfg)) {
        if (cfg_.provider_account.empty()) fail("bad_config", "provider account required");
        host_.observe([this](const VmInstance& vm, VmState old) { on_vm_event(vm, old); });
    }

    // Announces the host to the directory and starts the heartbeat loop.
    void start() {
        register_with_directory();
        arm_heartbeat();
    }

    double price() const { return host_price(bid_list(), host_.capacity()); }
    ShareVector shares() const { return compute_shares(bid_list()); }
    const std::map<std::string, ActiveBid>& active() const { return active_; }
    SimHost& host() { return host_; }

protected:
    void handle(const Envelope& env) override {
        try {
            if (env.msg_type == "auc.submit")
                do_submit(env);
            else if (env.msg_type == "auc.adjust")
                do_adjust(env);
            else if (env.msg_type == "auc.status")
                do_status(env);
            else
                reply_error(env, "bad_request", "unknown message type: " + env.msg_type);
        } catch (const Error& e) {
            reply_error(env, e.code(), e.what());
        } catch (const Json::exception& e) {
            reply_error(env, "bad_request", e.what());
        }
    }

private:
    // Grant pipeline: validate, reserve memory, settle payment, boot the VM,
    // reply once it is running. Nothing is charged if any step refuses.
    void do_submit(const Envelope& env) {
        Bid bid;
        bid.bid_id = env.body.at("bid_id").get<std::string>();
        bid.bidder = env.body.at("bidder").get<std::string>();
        bid.amount = Credit::parse(env.body.at("amount").get<std::string>());
        bid.duration = env.body.at("duration").get<double>();
        bid.rate();  // rejects non-positive amount or duration
        if (bid.bidder.empty()) fail("malformed_bid", "bidder required");
        if (active_.count(bid.bid_id)) fail("duplicate_bid", "bid already active: " + bid.bid_id);

        VmSpec spec;
        if (env.body.contains("spec")) spec = VmSpec::from_json(env.body.at("spec"));
        spec.validate();
        if (spec.memory > host_.memory_free() - pending_memory_)
            fail("insufficient_memory", host_.id() + ": not enough free memory");

        pending_memory_ += spec.memory;
        request(cfg_.bank, "bank.settle",
                Json{{"amount", bid.amount.str()},
                     {"bid_id", bid.bid_id},
                     {"bidder", bid.bidder},
                     {"provider", cfg_.provider_account}},
                [this, env, bid, spec](const Envelope& r) {
                    pending_memory_ -= spec.memory;
                    if (r.is_error()) {
                        reply_error(env, r.error_code(),
                                    r.body.at("error").value("message", "settlement failed"));
                        return;
                    }
                    Bid granted = bid;
                    granted.placed_at = ctx_.now();
                    std::string vm_id = host_.create_vm(spec, cfg_.boot_delay);
                    active_[granted.bid_id] = ActiveBid{granted, vm_id};
                    boot_waiters_[vm_id] = env;
                    ctx_.schedule(granted.expires_at(), [this]() { expire_due(); });
                    reallocate_and_publish();
                });
    }

    // Duration is the one knob a live bid has: rate = amount / duration, so
    // shrinking the lease raises the rate. No money moves.
    void do_adjust(const Envelope& env) {
        std::string bid_id = env.body.at("bid_id").get<std::string>();
        double new_duration = env.body.at("new_duration").get<double>();
        auto it = active_.find(bid_id);
        if (it == active_.end()) fail("unknown_bid", "no active bid: " + bid_id);
        if (!(new_duration > 0)) fail("bad_duration", "duration must be > 0");
        double new_end = it->second.bid.placed_at + new_duration;
        if (new_end <= ctx_.now()) fail("bad_duration", "new lease would already be over");
        it->second.bid.duration = new_duration;
        ctx_.schedule(new_end, [this]() { expire_due(); });
        reallocate_and_publish();
        ShareVector sh = shares();
        reply(env, Json{{"bid_id", bid_id},
                        {"duration", new_duration},
                        {"price", price()},
                        {"share", sh.at(bid_id)},
                        {"t_end", new_end}});
    }

    void do_status(const Envelope& env) {
        ShareVector sh = shares();
        Json bids = Json::array();
        for (const auto& [bid_id, ab] : active_) {
            const VmInstance* vm = host_.find_vm(ab.vm_id);
            bids.push_back(Json{{"accumulated", vm ? host_.accumulated(ab.vm_id) : 0.0},
                                {"amount", ab.bid.amount.str()},
                                {"bid_id", bid_id},
                                {"bidder", ab.bid.bidder},
                                {"duration", ab.bid.duration},
                                {"placed_at", ab.bid.placed_at},
                                {"rate", ab.bid.rate()},
                                {"share", sh.at(bid_id)},
                                {"t_end", ab.bid.expires_at()},
                                {"vm_id", ab.vm_id},
                                {"vm_state", vm ? to_string(vm->state) : "GONE"}});
        }
        reply(env, Json{{"bids", std::move(bids)},
                        {"cpu_capacity", host_.capacity().cpu_capacity},
                        {"host_id", host_.id()},
                        {"memory_free", host_.memory_free()},
                        {"memory_total", host_.capacity().memory_total},
                        {"price", price()}});
    }

    std::vector<Bid> bid_list() const {
        std::vector<Bid> bids;
        bids.reserve(active_.size());
        for (const auto& [id, ab] : active_) bids.push_back(ab.bid);
        return bids;
    }

    // Terminates every bid whose lease has run out. Paid-for time is spent,
    // never refunded.
    void expire_due() {
        Json expired = Json::array();
        for (auto it = active_.begin(); it != active_.end();) {
            if (it->second.bid.expires_at() > ctx_.now()) {
                ++it;
                continue;
            }
            std::string vm_id = it->second.vm_id;
            double acc = host_.has_vm(vm_id) ? host_.accumulated(vm_id) : 0.0;
            expired.push_back(Json{{"accumulated", acc},
                                   {"bid_id", it->first},
                                   {"vm_id", vm_id}});
            it = active_.erase(it);  // erase first so on_vm_event sees no owner
            host_.terminate_vm(vm_id);
        }
        if (expired.empty()) return;
        reallocate_and_publish();
        notify(cfg_.trace, "auc.expired", Json{{"expired", std::move(expired)}, {"host_id", host_.id()}});
    }

    void on_vm_event(const VmInstance& vm, VmState) {
        if (vm.state == VmState::Running) {
            auto it = find_by_vm(vm.vm_id);
            if (it == active_.end()) return;
            // CPU integration for the lease begins at this instant; put the
            // state change on the wire so the directory and the message log
            // see it at its exact time.
            publish_heartbeat();
            auto w = boot_waiters_.find(vm.vm_id);
            if (w == boot_waiters_.end()) return;
            Envelope req = w->second;
            boot_waiters_.erase(w);
            ShareVector sh = shares();
            reply(req, Json{{"bid_id", it->first},
                            {"placed_at", it->second.bid.placed_at},
                            {"price", price()},
                            {"share", sh.at(it->first)},
                            {"t_end", it->second.bid.expires_at()},
                            {"vm_id", vm.vm_id}});
        } else if (vm.state == VmState::Dead) {
            // Fault-injected death: the bid dies with its VM, unpaid time is
            // forfeit, the corpse is cleared so memory frees up.
            auto it = find_by_vm(vm.vm_id);
            if (it == active_.end()) return;
            std::string bid_id = it->first;
            double acc = vm.accumulated;
            active_.erase(it);
            auto w = boot_waiters_.find(vm.vm_id);
            if (w != boot_waiters_.end()) {
                reply_error(w->second, "vm_died", "vm died before running: " + vm.vm_id);
                boot_waiters_.erase(w);
            }
            std::string vm_id = vm.vm_id;
            ctx_.schedule(ctx_.now(), [this, vm_id, bid_id, acc]() {
                host_.remove_vm(vm_id);
                reallocate_and_publish();
                notify(cfg_.trace, "auc.bid_dropped",
                       Json{{"accumulated", acc},
                            {"bid_id", bid_id},
                            {"host_id", host_.id()},
                            {"vm_id", vm_id}});
            });
        }
    }

    std::map<std::string, ActiveBid>::iterator find_by_vm(const std::string& vm_id) {
        for (auto it = active_.begin(); it != active_.end(); ++it)
            if (it->second.vm_id == vm_id) return it;
        return active_.end();
    }

    void reallocate_and_publish() {
        ShareVector sh = shares();
        for (const auto& [bid_id, ab] : active_) {
            if (!host_.has_vm(ab.vm_id)) continue;
            host_.set_cpu_rate(ab.vm_id, sh.at(bid_id) * host_.capacity().cpu_capacity);
        }
        publish_heartbeat();
    }

    void register_with_directory() {
        request(cfg_.sls, "sls.register",
                Json{{"address", name()},
                     {"cpu_capacity", host_.capacity().cpu_capacity},
                     {"host_id", host_.id()},
                     {"memory_free", host_.memory_free()},
                     {"memory_total", host_.capacity().memory_total},
                     {"price", price()}},
                [](const Envelope&) {});
    }

    void publish_heartbeat() {
        Json vms = Json::array();
        ShareVector sh = shares();
        for (const auto& [bid_id, ab] : active_) {
            const VmInstance* vm = host_.find_vm(ab.vm_id);
            if (!vm) continue;
            vms.push_back(Json{{"accumulated", host_.accumulated(ab.vm_id)},
                               {"bid_id", bid_id},
                               {"bidder", ab.bid.bidder},
                               {"share", sh.at(bid_id)},
                               {"state", to_string(vm->state)},
                               {"vm_id", ab.vm_id}});
        }
        request(cfg_.sls, "sls.heartbeat",
                Json{{"host_id", host_.id()},
                     {"memory_free", host_.memory_free()},
                     {"price", price()},
                     {"vms", std::move(vms)}},
                [this](const Envelope& r) {
                    // A directory that evicted us asks for a fresh registration.
                    if (r.is_error() && r.error_code() == "unknown_host") register_with_directory();
                });
    }

    void arm_heartbeat() {
        ctx_.schedule_in(cfg_.heartbeat_interval, [this]() {
            publish_heartbeat();
            arm_heartbeat();
        });
    }

    SimHost& host_;
    AuctioneerConfig cfg_;
    std::map<std::string, ActiveBid> active_;
    std::map<std::string, Envelope> boot_waiters_;  // vm_id -> submit request
    int64_t pending_memory_ = 0;                    // reserved between check and settle
};

}  // namespace agora
