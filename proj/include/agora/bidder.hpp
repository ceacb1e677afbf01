#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "agora/bus.hpp"
#include "agora/directory.hpp"
#include "agora/fixed.hpp"
#include "agora/market.hpp"
#include "agora/simhost.hpp"

namespace agora {

// What a client wants and what it will pay for it.
struct BidPolicy {
    double target_share = 0.5;       // fraction of one host's CPU
    Credit budget;                   // cap on a single bid; zero = uncapped
    double planned_duration = 100;   // seconds of lease to buy
    double check_interval = 5;       // best-response poll period
    bool allow_extend = false;       // spend slack share on a longer lease

    bool over_budget(Credit amount) const { return !budget.is_zero() && amount > budget; }
};

// Slack below target tolerated before reacting; one adjustment message per
// repricing, not a stream of micro-corrections.
inline constexpr double kShareSlack = 0.01;
// Extra share above target required before an opt-in lease extension.
inline constexpr double kExtendSlack = 0.05;

// The bid amount that buys target_share against the competing rate, rounded
// up to a whole credit step so the share never lands below target.
inline Credit amount_for_target(double target_share, double competing_rate, double duration) {
    double rate = required_rate_for_share(target_share, competing_rate);
    return Credit::from_real_ceil(rate * duration);
}

// Picks the cheapest advertised host that fits the VM and the budget.
// Pure: same ranked list, policy and spec give the same answer.
inline std::optional<HostRecord> select_host(const std::vector<HostRecord>& ranked,
                                             const BidPolicy& policy, const VmSpec& spec) {
    for (const auto& rec : ranked) {
        if (rec.memory_free < spec.memory) continue;
        double competing = rec.price * rec.cpu_capacity;  // price is rate per CPU unit
        Credit amount;
        try {
            amount = amount_for_target(policy.target_share, competing, policy.planned_duration);
        } catch (const Error&) {
            continue;  // unsatisfiable target on this host
        }
        if (policy.over_budget(amount)) continue;
        return rec;
    }
    return std::nullopt;
}

enum class BrKind { None, Adjust, Exhausted };

struct BrAction {
    BrKind kind = BrKind::None;
    double new_duration = 0;
    std::string note;
};

// One best-response step for a live bid: if the share fell below target,
// shorten the lease until rate = amount / duration buys the target again.
// The committed amount is fixed, so a lease that would end in the past means
// the budget cannot reach the target at the current price.
inline BrAction best_response_step(const BidPolicy& policy, Credit amount, double placed_at,
                                   double duration, double competing_rate, double now) {
    double own_rate = amount.to_real() / duration;
    double share = competing_rate <= 0 ? 1.0 : own_rate / (own_rate + competing_rate);

    if (share + kShareSlack < policy.target_share) {
        double rate = required_rate_for_share(policy.target_share, competing_rate);
        double new_duration = amount.to_real() / rate;
        if (placed_at + new_duration <= now)
            return {BrKind::Exhausted, 0, "committed amount cannot buy the target share"};
        if (new_duration >= duration) return {};
        return {BrKind::Adjust, new_duration, "raise rate to reclaim target share"};
    }
    if (policy.allow_extend && competing_rate > 0 && share > policy.target_share + kExtendSlack) {
        double rate = required_rate_for_share(policy.target_share + kExtendSlack, competing_rate);
        double new_duration = amount.to_real() / rate;
        if (new_duration > duration) return {BrKind::Adjust, new_duration, "trade slack share for lease time"};
    }
    return {};
}

// A client: queries the directory, places one bid, and (in auto mode) keeps
// the bid best-responding until the lease runs out.
class BidderAgent : public ServiceBase {
public:
    struct Options {
        BidPolicy policy;
        VmSpec spec;
        std::string host;         // pin to one host, skip the directory
        Credit amount;            // fixed bid amount; zero means size from target
        double duration = 0;      // overrides policy.planned_duration when > 0
        bool auto_adjust = false; // keep best-responding after the grant
        std::string sls = "sls";
        std::string trace = "trace";
    };

    BidderAgent(Context& ctx, std::string account, Options opt)
        : ServiceBase(ctx, "client:" + account), account_(std::move(account)), opt_(std::move(opt)) {
        if (opt_.duration > 0) opt_.policy.planned_duration = opt_.duration;
    }

    // Kicks off the query/select/submit pipeline.
    void run() {
        if (!opt_.host.empty()) {
            submit_to("auc:" + opt_.host, Json::object());
            return;
        }
        request(opt_.sls, "sls.query", Json{{"limit", 100}}, [this](const Envelope& r) {
            if (r.is_error()) {
                finish_error(r.error_code(), "directory query failed");
                return;
            }
            std::vector<HostRecord> ranked;
            for (const auto& h : r.body.at("hosts")) ranked.push_back(HostRecord::from_json(h));
            auto chosen = select_host(ranked, opt_.policy, opt_.spec);
            if (!chosen) {
                finish_error("no_affordable_host", "no host fits the spec and budget");
                return;
            }
            Json market{{"competing_rate", chosen->price * chosen->cpu_capacity}};
            submit_to(chosen->address, market);
        });
    }

    bool done() const { return done_; }
    const std::string& bid_id() const { return bid_id_; }
    const std::string& vm_id() const { return vm_id_; }

protected:
    void handle(const Envelope& env) override {
        reply_error(env, "bad_request", "clients accept no requests");
    }

private:
    void submit_to(const std::string& auctioneer, const Json& market) {
        bid_id_ = "bid-" + account_ + "-" + std::to_string(++bid_seq_);
        auctioneer_ = auctioneer;
        Credit amount = opt_.amount;
        if (amount.is_zero()) {
            double competing = market.value("competing_rate", 0.0);
            amount = amount_for_target(opt_.policy.target_share, competing,
                                       opt_.policy.planned_duration);
        }
        if (opt_.policy.over_budget(amount)) {
            finish_error("over_budget", "target share costs " + amount.str() +
                                            ", budget is " + opt_.policy.budget.str());
            return;
        }
        amount_ = amount;
        request(auctioneer_, "auc.submit",
                Json{{"amount", amount.str()},
                     {"bid_id", bid_id_},
                     {"bidder", account_},
                     {"duration", opt_.policy.planned_duration},
                     {"spec", opt_.spec.to_json()}},
                [this](const Envelope& r) {
                    if (r.is_error()) {
                        finish_error(r.error_code(), "bid refused");
                        return;
                    }
                    vm_id_ = r.body.at("vm_id").get<std::string>();
                    placed_at_ = r.body.at("placed_at").get<double>();
                    notify(opt_.trace, "client.granted",
                           Json{{"account", account_},
                                {"amount", amount_.str()},
                                {"bid_id", bid_id_},
                                {"share", r.body.at("share")},
                                {"t_end", r.body.at("t_end")},
                                {"vm_id", vm_id_}});
                    if (opt_.auto_adjust)
                        arm_check();
                    else
                        done_ = true;
                });
    }

    void arm_check() {
        ctx_.schedule_in(opt_.policy.check_interval, [this]() {
            if (done_) return;
            check_once();
        });
    }

    void check_once() {
        request(auctioneer_, "auc.status", Json(), [this](const Envelope& r) {
            if (r.is_error()) {
                finish_error(r.error_code(), "host unreachable");
                return;
            }
            const Json* own = nullptr;
            double competing = 0;
            for (const auto& b : r.body.at("bids")) {
                if (b.at("bid_id") == bid_id_)
                    own = &b;
                else
                    competing += b.at("rate").get<double>();
            }
            if (!own) {
                // Lease expired (or the bid died); either way this client is done.
                notify(opt_.trace, "client.finished",
                       Json{{"account", account_}, {"bid_id", bid_id_}});
                done_ = true;
                return;
            }
            BrAction act = best_response_step(opt_.policy, amount_, placed_at_,
                                              own->at("duration").get<double>(), competing,
                                              ctx_.now());
            if (act.kind == BrKind::Adjust) {
                request(auctioneer_, "auc.adjust",
                        Json{{"bid_id", bid_id_}, {"new_duration", act.new_duration}},
                        [this](const Envelope& ar) {
                            if (ar.is_error()) finish_error(ar.error_code(), "adjust refused");
                            arm_check();
                        });
                return;
            }
            if (act.kind == BrKind::Exhausted)
                notify(opt_.trace, "client.notice",
                       Json{{"account", account_}, {"bid_id", bid_id_}, {"note", act.note}});
            arm_check();
        });
    }

    void finish_error(const std::string& code, const std::string& message) {
        done_ = true;
        notify(opt_.trace, "client.error",
               Json{{"account", account_}, {"code", code}, {"message", message}});
    }

    std::string account_;
    Options opt_;
    std::string auctioneer_;
    std::string bid_id_;
    std::string vm_id_;
    Credit amount_;
    double placed_at_ = 0;
    bool done_ = false;
    uint64_t bid_seq_ = 0;
};

}  // namespace agora
