#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "agora/auctioneer.hpp"
#include "agora/bank.hpp"
#include "agora/bidder.hpp"
#include "agora/bus.hpp"
#include "agora/clock.hpp"
#include "agora/desc/parse.hpp"
#include "agora/desc/resolve.hpp"
#include "agora/directory.hpp"
#include "agora/lifecycle.hpp"
#include "agora/report.hpp"
#include "agora/simhost.hpp"

namespace agora {

struct ScenarioOutcome {
    std::string name;
    uint64_t seed = 0;
    size_t checks = 0;
    size_t failures = 0;
    std::string log_text;
    std::string report_text;
    std::string trace_text;

    bool all_passed() const { return failures == 0; }
};

// Executes one scripted run: a line-oriented file of directives over the
// simulated substrate. Directives run in file order at the current virtual
// time; `advance` moves time forward and `at` defers a directive. Every
// run-level event (begin, spawn, assertion outcome, end) is posted onto the
// bus, so the message log alone carries everything the report needs.
//
//   spawn bank|sls|host|auctioneer|bidder|deployment {json-config}
//   call <endpoint> <msg_type> {json-body}
//   deploy|start|terminate|status <deployment-id>
//   inject kill <host> <vm> | drop <type-prefix> [recipient]
//          | crash <endpoint> | restart <endpoint>
//   snapshot <host>
//   advance <t>
//   at <t> <directive...>
//   assert cpu <host> <vm> <value>         (tolerance 1e-3)
//   assert share <host> <bid> <value>      (tolerance 1e-9)
//   assert price <host> <value>            (tolerance 1e-9)
//   assert balance <account> <credits>     (exact)
//   assert state <deployment> <path> <STATE>
//   assert placed <deployment> <path> <host>
//   assert vm <host> <vm> <STATE|GONE>
//   assert msgs <type-prefix> <t0> <t1> <count>   (exact count)
//   assert restored <host>                 (vs the last `snapshot`)
class ScenarioRunner {
public:
    ScenarioRunner(std::string name, uint64_t seed, std::filesystem::path base_dir)
        : name_(std::move(name)), seed_(seed), base_dir_(std::move(base_dir)), rng_(seed) {
        bus_.attach("trace", &trace_);
        port_.attach();
    }

    ScenarioOutcome run(const std::string& text, double until) {
        port_.send("trace", "scn.begin",
                   Json{{"name", name_}, {"seed", seed_}, {"until", until}});
        size_t lineno = 0;
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            ++lineno;
            exec(line, lineno);
        }
        if (until > clock_.now()) clock_.advance_to(until);
        port_.send("trace", "scn.end", Json{{"at", clock_.now()}});

        ScenarioOutcome out;
        out.name = name_;
        out.seed = seed_;
        out.checks = checks_;
        out.failures = failures_;
        out.log_text = bus_.log_text();
        RunReport rep = report_from_log(out.log_text);
        out.report_text = rep.text;
        for (const auto& l : bus_.log()) {
            Envelope e = Envelope::parse_line(l);
            if (e.msg_type == "lc.transition") out.trace_text += l + "\n";
        }
        return out;
    }

private:
    struct Port : ServiceBase {
        Port(Context& ctx, SimBus& bus) : ServiceBase(ctx, "run"), bus_(bus) {}
        void attach() { bus_.attach("run", this); }
        void send(const std::string& to, const std::string& type, Json body) {
            notify(to, type, std::move(body));
        }
        void ask(const std::string& to, const std::string& type, Json body,
                 std::function<void(const Envelope&)> cb) {
            request(to, type, std::move(body), std::move(cb));
        }
        void handle(const Envelope&) override {}
        SimBus& bus_;
    };

    [[noreturn]] void bad(size_t lineno, const std::string& what) {
        fail("scenario_parse", "line " + std::to_string(lineno) + ": " + what);
    }

    static std::vector<std::string> words(const std::string& s) {
        std::vector<std::string> out;
        std::istringstream in(s);
        std::string w;
        while (in >> w) out.push_back(w);
        return out;
    }

    Json json_tail(const std::string& line, size_t lineno) {
        size_t brace = line.find('{');
        if (brace == std::string::npos) return Json::object();
        try {
            return Json::parse(line.substr(brace));
        } catch (const std::exception& e) {
            bad(lineno, std::string("bad config: ") + e.what());
        }
    }

    double num(const std::string& w, size_t lineno) {
        try {
            size_t used = 0;
            double v = std::stod(w, &used);
            if (used != w.size()) throw std::invalid_argument(w);
            return v;
        } catch (const std::exception&) {
            bad(lineno, "expected a number, got '" + w + "'");
        }
    }

    void exec(const std::string& raw, size_t lineno) {
        std::string line = raw;
        size_t first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') return;
        std::vector<std::string> w = words(line);
        const std::string& d = w[0];

        if (d == "spawn") {
            if (w.size() < 2) bad(lineno, "spawn needs a service kind");
            spawn(w[1], json_tail(line, lineno), lineno);
        } else if (d == "call") {
            if (w.size() < 3) bad(lineno, "call needs: endpoint msg_type {body}");
            port_.ask(w[1], w[2], json_tail(line, lineno), [](const Envelope&) {});
        } else if (d == "deploy" || d == "start" || d == "terminate" || d == "status") {
            if (w.size() < 2) bad(lineno, d + " needs a deployment id");
            lifecycle_op(d, w[1], lineno);
        } else if (d == "inject") {
            inject(w, lineno);
        } else if (d == "snapshot") {
            if (w.size() < 2) bad(lineno, "snapshot needs a host id");
            clock_.drain();
            baselines_[w[1]] = hosts_.require(w[1]).snapshot();
        } else if (d == "advance") {
            if (w.size() < 2) bad(lineno, "advance needs a time");
            double to = num(w[1], lineno);
            if (to < clock_.now()) bad(lineno, "cannot advance backwards");
            clock_.advance_to(to);
        } else if (d == "at") {
            if (w.size() < 3) bad(lineno, "at needs: time directive...");
            double t = num(w[1], lineno);
            if (t < clock_.now()) bad(lineno, "'at' time already passed");
            size_t cut = line.find(w[1]) + w[1].size();
            std::string rest = line.substr(cut);
            clock_.schedule(t, [this, rest, lineno]() { exec(rest, lineno); });
        } else if (d == "assert") {
            if (w.size() < 2) bad(lineno, "assert needs a probe");
            clock_.drain();
            probe(line, w, lineno);
        } else {
            bad(lineno, "unknown directive '" + d + "'");
        }
    }

    void spawn(const std::string& kind, const Json& cfg, size_t lineno) {
        if (kind == "bank") {
            if (bank_) bad(lineno, "bank already spawned");
            bank_ = std::make_unique<Bank>(
                bus_, Credit::parse(cfg.value("endowment", std::string("1000000.00"))));
            bus_.attach("bank", bank_.get());
            if (cfg.contains("accounts"))
                for (const auto& [account, grant] : cfg.at("accounts").items())
                    port_.ask("bank", "bank.open",
                              Json{{"account", account}, {"grant", grant.get<std::string>()}},
                              [](const Envelope&) {});
        } else if (kind == "sls") {
            if (dir_) bad(lineno, "sls already spawned");
            dir_ = std::make_unique<Directory>(bus_, cfg.value("liveness", 30.0));
            bus_.attach("sls", dir_.get());
        } else if (kind == "host") {
            hosts_.add(bus_, cfg.at("host").get<std::string>(),
                       HostCapacity{cfg.value("cpu", 1.0), cfg.value("mem", int64_t(4096))});
        } else if (kind == "auctioneer") {
            std::string host_id = cfg.at("host").get<std::string>();
            SimHost& host = hosts_.add(
                bus_, host_id,
                HostCapacity{cfg.value("cpu", 1.0), cfg.value("mem", int64_t(4096))});
            AuctioneerConfig ac;
            ac.provider_account = cfg.value("provider", std::string("provider"));
            ac.boot_delay = cfg.value("boot_delay", 0.0);
            ac.heartbeat_interval = cfg.value("heartbeat", 10.0);
            auto auc = std::make_unique<Auctioneer>(bus_, host, ac);
            bus_.attach(auc->name(), auc.get());
            auc->start();
            aucs_[host_id] = std::move(auc);
        } else if (kind == "bidder") {
            BidderAgent::Options opt;
            opt.policy.target_share = cfg.value("target", 0.5);
            if (cfg.contains("budget"))
                opt.policy.budget = Credit::parse(cfg.at("budget").get<std::string>());
            opt.policy.planned_duration = cfg.value("duration", 100.0);
            opt.policy.check_interval = cfg.value("interval", 5.0);
            opt.policy.allow_extend = cfg.value("extend", false);
            opt.auto_adjust = cfg.value("auto", false);
            opt.host = cfg.value("host", std::string());
            if (cfg.contains("amount"))
                opt.amount = Credit::parse(cfg.at("amount").get<std::string>());
            opt.spec.vcpus = cfg.value("vcpus", 1);
            opt.spec.memory = cfg.value("memory", int64_t(64));
            auto agent = std::make_unique<BidderAgent>(
                bus_, cfg.at("account").get<std::string>(), std::move(opt));
            bus_.attach(agent->name(), agent.get());
            agent->run();
            bidders_.push_back(std::move(agent));
        } else if (kind == "deployment") {
            std::string id = cfg.at("id").get<std::string>();
            if (engines_.count(id)) bad(lineno, "deployment '" + id + "' already spawned");
            std::string text;
            if (cfg.contains("text")) {
                text = cfg.at("text").get<std::string>();
            } else {
                std::filesystem::path p = cfg.at("file").get<std::string>();
                if (p.is_relative()) p = base_dir_ / p;
                std::ifstream in(p, std::ios::binary);
                if (!in.good()) bad(lineno, "cannot read descriptor file " + p.string());
                std::ostringstream ss;
                ss << in.rdbuf();
                text = ss.str();
            }
            EngineConfig ec;
            ec.prepare_delay = cfg.value("prepare_delay", ec.prepare_delay);
            ec.cleanup_delay = cfg.value("cleanup_delay", ec.cleanup_delay);
            ec.boot_delay = cfg.value("boot_delay", ec.boot_delay);
            ec.ping_interval = cfg.value("ping_interval", ec.ping_interval);
            ec.boot_timeout = cfg.value("boot_timeout", ec.boot_timeout);
            auto engine = std::make_unique<Deployment>(
                bus_, hosts_, id, desc::resolve_document(desc::parse(text)), ec);
            bus_.attach(engine->name(), engine.get());
            engines_[id] = std::move(engine);
        } else {
            bad(lineno, "unknown service kind '" + kind + "'");
        }
    }

    Deployment& engine(const std::string& id, size_t lineno) {
        auto it = engines_.find(id);
        if (it == engines_.end()) bad(lineno, "no deployment '" + id + "'");
        return *it->second;
    }

    void lifecycle_op(const std::string& op, const std::string& id, size_t lineno) {
        Deployment& d = engine(id, lineno);
        if (op == "status") {
            port_.ask(d.name(), "lc.status", Json::object(), [](const Envelope&) {});
            return;
        }
        auto done = [this, op, id](bool ok) {
            port_.send("trace", "scn.op", Json{{"id", id}, {"ok", ok}, {"op", op}});
        };
        if (op == "deploy")
            d.deploy(done);
        else if (op == "start")
            d.start(done);
        else
            d.terminate(done);
    }

    void inject(const std::vector<std::string>& w, size_t lineno) {
        if (w.size() < 3) bad(lineno, "inject needs: kill|drop|crash|restart args...");
        const std::string& kind = w[1];
        if (kind == "kill") {
            if (w.size() < 4) bad(lineno, "inject kill needs: host vm");
            hosts_.require(w[2]).kill_vm(w[3]);
        } else if (kind == "drop") {
            bus_.arm_drop(w[2], w.size() > 3 ? w[3] : "");
        } else if (kind == "crash") {
            bus_.crash(w[2]);
        } else if (kind == "restart") {
            bus_.restart(w[2]);
        } else {
            bad(lineno, "unknown fault '" + kind + "'");
        }
    }

    void probe(const std::string& line, const std::vector<std::string>& w, size_t lineno) {
        const std::string& kind = w[1];
        std::string expected;
        std::string actual;
        bool pass = false;

        auto tol = [&](double exp, double act, double eps) {
            expected = fmt6(exp);
            actual = fmt6(act);
            pass = std::fabs(exp - act) <= eps;
        };

        if (kind == "cpu") {
            if (w.size() != 5) bad(lineno, "assert cpu needs: host vm value");
            tol(num(w[4], lineno), cpu_of(w[2], w[3]), 1e-3);
        } else if (kind == "share") {
            if (w.size() != 5) bad(lineno, "assert share needs: host bid value");
            ShareVector sh = auc_of(w[2], lineno).shares();
            auto it = sh.find(w[3]);
            tol(num(w[4], lineno), it == sh.end() ? 0.0 : it->second, 1e-9);
        } else if (kind == "price") {
            if (w.size() != 4) bad(lineno, "assert price needs: host value");
            tol(num(w[3], lineno), auc_of(w[2], lineno).price(), 1e-9);
        } else if (kind == "balance") {
            if (w.size() != 4) bad(lineno, "assert balance needs: account credits");
            if (!bank_) bad(lineno, "no bank spawned");
            expected = w[3];
            try {
                actual = bank_->balance(w[2]).str();
            } catch (const Error&) {
                actual = "unknown-account";
            }
            pass = actual == expected;
        } else if (kind == "state") {
            if (w.size() != 5) bad(lineno, "assert state needs: deployment path STATE");
            expected = w[4];
            LifecycleNode* n = engine(w[2], lineno).find(w[3]);
            actual = n ? to_string(n->state) : "missing";
            pass = actual == expected;
        } else if (kind == "placed") {
            if (w.size() != 5) bad(lineno, "assert placed needs: deployment path host");
            expected = w[4];
            LifecycleNode* n = engine(w[2], lineno).find(w[3]);
            actual = n ? (n->host_id.empty() ? "unplaced" : n->host_id) : "missing";
            pass = actual == expected;
        } else if (kind == "vm") {
            if (w.size() != 5) bad(lineno, "assert vm needs: host vm STATE");
            expected = w[4];
            const VmInstance* vm = hosts_.require(w[2]).find_vm(w[3]);
            actual = vm ? to_string(vm->state) : "GONE";
            pass = actual == expected;
        } else if (kind == "msgs") {
            if (w.size() != 6) bad(lineno, "assert msgs needs: prefix t0 t1 count");
            size_t n = bus_.count_messages(w[2], num(w[3], lineno), num(w[4], lineno));
            expected = w[5];
            actual = std::to_string(n);
            pass = actual == expected;
        } else if (kind == "restored") {
            if (w.size() != 3) bad(lineno, "assert restored needs: host");
            auto it = baselines_.find(w[2]);
            if (it == baselines_.end()) bad(lineno, "no snapshot taken for " + w[2]);
            expected = "restored";
            actual = hosts_.require(w[2]).snapshot() == it->second ? "restored" : "dirty";
            pass = actual == expected;
        } else {
            bad(lineno, "unknown probe '" + kind + "'");
        }

        ++checks_;
        if (!pass) ++failures_;
        size_t first = line.find_first_not_of(" \t");
        port_.send("trace", "scn.assert",
                   Json{{"actual", actual},
                        {"expected", expected},
                        {"pass", pass},
                        {"probe", line.substr(first)}});
    }

    // Accumulated CPU-seconds for a vm: read live from the host, or, once
    // the lease is over and the record gone, from the auctioneer's expiry
    // and forfeiture notices in the log.
    double cpu_of(const std::string& host_id, const std::string& vm_id) {
        SimHost* h = hosts_.find(host_id);
        if (h && h->has_vm(vm_id)) return h->accumulated(vm_id);
        const auto& log = bus_.log();
        for (auto it = log.rbegin(); it != log.rend(); ++it) {
            Envelope e = Envelope::parse_line(*it);
            if (e.msg_type == "auc.bid_dropped" && e.body.value("vm_id", "") == vm_id)
                return e.body.at("accumulated").get<double>();
            if (e.msg_type == "auc.expired")
                for (const auto& x : e.body.at("expired"))
                    if (x.value("vm_id", "") == vm_id) return x.at("accumulated").get<double>();
        }
        return -1;
    }

    Auctioneer& auc_of(const std::string& host_id, size_t lineno) {
        auto it = aucs_.find(host_id);
        if (it == aucs_.end()) bad(lineno, "no auctioneer on host '" + host_id + "'");
        return *it->second;
    }

    std::string name_;
    uint64_t seed_;
    std::filesystem::path base_dir_;
    std::mt19937_64 rng_;

    VirtualClock clock_;
    SimBus bus_{clock_};
    TraceSink trace_;
    Port port_{bus_, bus_};
    HostRegistry hosts_;
    std::unique_ptr<Bank> bank_;
    std::unique_ptr<Directory> dir_;
    std::map<std::string, std::unique_ptr<Auctioneer>> aucs_;
    std::map<std::string, std::unique_ptr<Deployment>> engines_;
    std::vector<std::unique_ptr<BidderAgent>> bidders_;
    std::map<std::string, std::string> baselines_;
    size_t checks_ = 0;
    size_t failures_ = 0;
};

inline ScenarioOutcome run_scenario_text(const std::string& text, const std::string& name,
                                         uint64_t seed, double until,
                                         const std::filesystem::path& base_dir = ".") {
    ScenarioRunner runner(name, seed, base_dir);
    return runner.run(text, until);
}

inline ScenarioOutcome run_scenario_file(const std::filesystem::path& path, uint64_t seed,
                                         double until) {
    std::ifstream in(path, std::ios::binary);
    if (!in.good()) fail("scenario_parse", "cannot read scenario file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return run_scenario_text(ss.str(), path.stem().string(), seed, until,
                             path.has_parent_path() ? path.parent_path() : ".");
}

}  // namespace agora
