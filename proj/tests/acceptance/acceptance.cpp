// Integration gate: one check per shipped guarantee, each verified against an
// independent oracle or a brute-force recomputation, printing one PASS/FAIL
// line per item. Exit status is nonzero if anything fails.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
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
#include "agora/desc/print.hpp"
#include "agora/desc/resolve.hpp"
#include "agora/directory.hpp"
#include "agora/lifecycle.hpp"
#include "agora/market.hpp"
#include "agora/scenario.hpp"
#include "agora/simhost.hpp"

namespace fs = std::filesystem;
using namespace agora;

namespace {

const fs::path kRepo = AGORA_REPO_ROOT;

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in.good()) fail("unreadable", "cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CheckFailure {
    std::string what;
};

void expect(bool cond, const std::string& what) {
    if (!cond) throw CheckFailure{what};
}

// ---------------------------------------------------------------------------
// Shared in-process market rig: virtual clock, bus, bank, directory, hosts.

struct Caller : ServiceBase {
    using ServiceBase::ServiceBase;
    Json last;
    int replies = 0;
    int errors = 0;
    void call(const std::string& to, const std::string& type, Json body) {
        request(to, type, std::move(body), [this](const Envelope& r) {
            last = r.body;
            ++replies;
            if (r.is_error()) ++errors;
        });
    }
    void handle(const Envelope&) override {}
};

struct Rig {
    VirtualClock clock;
    SimBus bus{clock};
    TraceSink trace;
    Caller caller{bus, "rig"};
    HostRegistry hosts;
    std::unique_ptr<Bank> bank;
    std::unique_ptr<Directory> dir;
    std::vector<std::unique_ptr<Auctioneer>> aucs;

    Rig() {
        // zero link latency keeps drain() sufficient to settle an exchange
        bus.default_latency = 0;
        bus.attach("trace", &trace);
        bus.attach("rig", &caller);
    }

    void add_market(std::vector<std::pair<std::string, Credit>> accounts) {
        bank = std::make_unique<Bank>(bus, Credit::parse("1000000.00"));
        bus.attach("bank", bank.get());
        bank->open_account("provider", Credit{});
        for (auto& [name, grant] : accounts) bank->open_account(name, grant);
        dir = std::make_unique<Directory>(bus);
        bus.attach("sls", dir.get());
    }

    Auctioneer& add_host(const std::string& id, double cpu, int64_t mem,
                         double boot_delay = 0) {
        SimHost& h = hosts.add(bus, id, {cpu, mem});
        AuctioneerConfig cfg;
        cfg.provider_account = "provider";
        cfg.boot_delay = boot_delay;
        auto auc = std::make_unique<Auctioneer>(bus, h, cfg);
        bus.attach("auc:" + id, auc.get());
        auc->start();
        clock.drain();
        aucs.push_back(std::move(auc));
        return *aucs.back();
    }

    // Places a bid directly and drains; the seed account must exist.
    void seed_bid(const std::string& host, const std::string& bid_id,
                  const std::string& bidder, const std::string& amount, double duration,
                  int64_t mem = 16) {
        caller.call("auc:" + host, "auc.submit",
                    Json{{"bid_id", bid_id},
                         {"bidder", bidder},
                         {"amount", amount},
                         {"duration", duration},
                         {"spec", Json{{"memory", mem}}}});
        clock.drain();
    }

    // Runs one async lifecycle op to completion, stepping event by event so
    // the clock stops at the instant the op finishes.
    template <typename Op>
    bool drive(Op op) {
        bool ok = false;
        bool fired = false;
        op([&](bool r) { ok = r; fired = true; });
        clock.drain();
        size_t guard = 0;
        while (!fired) {
            double next = clock.next_event_at();
            expect(next >= 0, "lifecycle op never completed");
            expect(++guard < 200000, "lifecycle op did not settle");
            clock.advance_to(next);
        }
        return ok;
    }

    Deployment& engine_for(const std::string& id, const std::string& descriptor_file) {
        desc::Component root =
            desc::resolve_document(desc::parse(slurp(kRepo / "descriptors" / descriptor_file)));
        engines.push_back(std::make_unique<Deployment>(bus, hosts, id, std::move(root)));
        bus.attach("lc:" + id, engines.back().get());
        return *engines.back();
    }

    std::vector<std::unique_ptr<Deployment>> engines;
};

std::vector<Envelope> parse_log(const std::string& log_text) {
    std::vector<Envelope> out;
    std::istringstream in(log_text);
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) out.push_back(Envelope::parse_line(line));
    return out;
}

// Pre-order walk of a resolved tree, yielding "sfConfig/..." paths.
void preorder(const desc::Component& c, const std::string& path,
              std::vector<std::string>& out) {
    out.push_back(path);
    for (const auto& e : c.entries)
        if (e.value.is_component()) preorder(*e.value.as_component(), path + "/" + e.name, out);
}

// ---------------------------------------------------------------------------
// Independent flattening oracle for descriptors without references: resolve
// prototype chains and merge overrides by the written semantics, sharing only
// the parser with the implementation under test.

desc::Component oracle_flatten(const desc::Document& doc, const desc::Component& c);

void oracle_merge(const desc::Document& doc, desc::Component& base,
                  const desc::Component& overlay) {
    for (const auto& e : overlay.entries) {
        desc::Value v = e.value.is_component()
                            ? desc::Value(std::make_shared<desc::Component>(
                                  oracle_flatten(doc, *e.value.as_component())))
                            : e.value.clone();
        desc::Entry* existing = base.find(e.name);
        if (!existing) {
            base.entries.push_back({e.name, std::move(v)});
        } else if (existing->value.is_component() && v.is_component()) {
            // both sides are components: merge the override into the base copy
            oracle_merge(doc, *existing->value.as_component(), *v.as_component());
        } else {
            existing->value = std::move(v);
        }
    }
}

desc::Component oracle_flatten(const desc::Document& doc, const desc::Component& c) {
    desc::Component out;
    if (!c.extends.empty()) {
        const desc::Component* proto = doc.top(c.extends);
        expect(proto != nullptr, "oracle: unknown prototype " + c.extends);
        out = oracle_flatten(doc, *proto);
    }
    oracle_merge(doc, out, c);
    return out;
}

// ---------------------------------------------------------------------------
// The checks, in shipped-guarantee order.

// 1: two bids at a 3:1 rate ratio on a one-core host split the CPU 75/25
//    over a 100 second lease, and the integrated CPU-seconds say so.
void check_proportional_accounting() {
    auto out = run_scenario_file(kRepo / "scenarios" / "two_bidders.scn", 42, 200);
    expect(out.failures == 0, "two_bidders scenario reported failures");

    // read the integrals straight out of the rendered report
    auto grab = [&](const std::string& vm) {
        std::string key = "h1 " + vm + " ";
        size_t at = out.report_text.find(key);
        expect(at != std::string::npos, "report lacks cpu line for " + vm);
        return std::stod(out.report_text.substr(at + key.size()));
    };
    double a = grab("vm-h1-1");
    double b = grab("vm-h1-2");
    expect(std::fabs(a - 75.0) <= 1e-3, "vm-h1-1 accumulated " + std::to_string(a));
    expect(std::fabs(b - 25.0) <= 1e-3, "vm-h1-2 accumulated " + std::to_string(b));
}

// 2: share vectors sum to one, order with rate, and ignore uniform scaling.
void check_share_vector_law() {
    std::mt19937_64 rng(7);
    for (int iter = 0; iter < 10000; ++iter) {
        size_t n = 1 + rng() % 20;
        std::vector<Bid> bids;
        for (size_t i = 0; i < n; ++i) {
            Bid b;
            b.bid_id = "b" + std::to_string(i);
            b.bidder = "acc" + std::to_string(i);
            b.amount = Credit::from_cents(1 + int64_t(rng() % 10000000));
            b.duration = double(1 + rng() % 100000) / 100.0;
            bids.push_back(b);
        }
        ShareVector shares = compute_shares(bids);
        double sum = 0;
        for (const auto& [id, s] : shares) sum += s;
        expect(std::fabs(sum - 1.0) <= 1e-9, "share sum " + std::to_string(sum));

        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j)
                if (bids[i].rate() > bids[j].rate())
                    expect(shares[bids[i].bid_id] >= shares[bids[j].bid_id] - 1e-12,
                           "shares not monotone in rate");

        int64_t k = (iter % 2) ? 2 : 7;
        std::vector<Bid> scaled = bids;
        for (auto& b : scaled) b.amount = Credit::from_cents(b.amount.cents() * k);
        ShareVector shares2 = compute_shares(scaled);
        for (const auto& [id, s] : shares)
            expect(std::fabs(shares2[id] - s) <= 1e-9, "shares not scale invariant");
    }
}

// 3: currency is conserved exactly across ten thousand random operations,
//    and a refused settlement changes no balance.
void check_bank_conservation() {
    VirtualClock clock;
    SimBus bus{clock};
    const int64_t endow_cents = 1000000000;
    Bank bank(bus, Credit::from_cents(endow_cents));
    std::vector<std::string> accounts;
    std::mt19937_64 rng(11);

    auto total = [&]() {
        int64_t sum = bank.balance(Bank::kReserve).cents();
        for (const auto& a : accounts) sum += bank.balance(a).cents();
        return sum;
    };

    for (int iter = 0; iter < 10000; ++iter) {
        int action = rng() % 3;
        if (action == 0 || accounts.size() < 2) {
            std::string name = "acct" + std::to_string(accounts.size());
            int64_t reserve = bank.balance(Bank::kReserve).cents();
            int64_t grant = reserve > 0 ? int64_t(rng() % (reserve / 2 + 1)) : 0;
            try {
                bank.open_account(name, Credit::from_cents(grant));
                accounts.push_back(name);
            } catch (const Error&) {
            }
        } else {
            Bid bid;
            bid.bid_id = "b" + std::to_string(iter);
            bid.bidder = accounts[rng() % accounts.size()];
            bid.duration = 100;
            std::string provider = accounts[rng() % accounts.size()];
            // a third of attempts are deliberately unpayable or malformed
            int64_t balance = bank.balance(bid.bidder).cents();
            int64_t amount;
            switch (rng() % 3) {
                case 0: amount = balance + 1 + int64_t(rng() % 1000); break;
                case 1: amount = 0; break;
                default: amount = balance > 0 ? 1 + int64_t(rng() % balance) : 1; break;
            }
            bid.amount = Credit::from_cents(amount);

            std::vector<int64_t> before;
            for (const auto& a : accounts) before.push_back(bank.balance(a).cents());
            try {
                bank.settle_bid(bid, provider);
            } catch (const Error&) {
                for (size_t i = 0; i < accounts.size(); ++i)
                    expect(bank.balance(accounts[i]).cents() == before[i],
                           "failed settlement moved money");
            }
        }
        expect(total() == endow_cents, "currency not conserved at op " +
                                           std::to_string(iter));
    }
}

// 4: after the up-front settlement a lease generates no further bank
//    traffic, even across a mid-lease adjustment.
void check_lease_settles_once() {
    auto out = run_scenario_file(kRepo / "scenarios" / "adjust_nobank.scn", 42, 200);
    expect(out.failures == 0, "adjust_nobank scenario reported failures");

    bool settled = false;
    bool adjusted = false;
    for (const auto& env : parse_log(out.log_text)) {
        if (env.msg_type.rfind("bank.", 0) == 0) {
            expect(env.sent_at <= 1.0, "bank traffic at t=" + std::to_string(env.sent_at));
            if (env.msg_type == "bank.settle") settled = true;
        }
        if (env.msg_type == "auc.adjust" && env.sent_at > 1.0) adjusted = true;
    }
    expect(settled, "no settlement found in the log");
    expect(adjusted, "no mid-lease adjustment found in the log");
}

// 5: ranked directory queries match a brute-force sort by (price, host id)
//    across a thousand random directories.
void check_directory_ranking() {
    VirtualClock clock;
    SimBus bus{clock};
    std::mt19937_64 rng(13);

    for (int iter = 0; iter < 1000; ++iter) {
        Directory dir(bus, 1e9);
        size_t n = 1 + rng() % 100;
        std::vector<std::pair<double, std::string>> oracle;
        for (size_t i = 0; i < n; ++i) {
            HostRecord rec;
            rec.host_id = "host-" + std::to_string(rng() % 1000);
            if (std::any_of(oracle.begin(), oracle.end(),
                            [&](const auto& p) { return p.second == rec.host_id; }))
                continue;
            rec.address = "auc:" + rec.host_id;
            rec.cpu_capacity = 1.0;
            rec.memory_total = 1024;
            rec.memory_free = int64_t(rng() % 1024);
            rec.price = double(rng() % 7) * 0.25;  // a coarse grid forces ties
            dir.register_host(rec);
            oracle.push_back({rec.price, rec.host_id});
        }
        std::sort(oracle.begin(), oracle.end());

        size_t limit = (iter % 2) ? oracle.size() : oracle.size() / 2 + 1;
        auto ranked = dir.query_ranked(limit);
        expect(ranked.size() == std::min(limit, oracle.size()), "ranked size wrong");
        for (size_t i = 0; i < ranked.size(); ++i) {
            expect(ranked[i].host_id == oracle[i].second,
                   "rank " + std::to_string(i) + ": got " + ranked[i].host_id +
                       ", want " + oracle[i].second);
            expect(ranked[i].price == oracle[i].first, "price mismatch in ranking");
        }
    }
}

// 6: a single best-response step reaches the target share, and competing
//    self-steering bidders go quiet instead of oscillating.
void check_best_response() {
    {
        Rig rig;
        rig.add_market({{"alice", Credit::parse("1000.00")},
                        {"bob", Credit::parse("1000.00")}});
        Auctioneer& auc = rig.add_host("h1", 1.0, 4096);
        rig.seed_bid("h1", "b-bob", "bob", "100.00", 100, 64);

        BidderAgent::Options opt;
        opt.policy.target_share = 0.6;
        opt.spec.memory = 64;
        opt.duration = 100;
        BidderAgent agent(rig.bus, "alice", opt);
        rig.bus.attach("client:alice", &agent);
        agent.run();
        rig.clock.drain();

        expect(agent.done() && !agent.bid_id().empty(), "single-step bid not granted");
        std::vector<Bid> bids;
        for (const auto& [id, rec] : auc.active()) bids.push_back(rec.bid);
        ShareVector shares = compute_shares(bids);
        expect(shares[agent.bid_id()] >= 0.6 - 0.01 - 1e-9,
               "one step reached only " + std::to_string(shares[agent.bid_id()]));
    }
    {
        auto out = run_scenario_file(kRepo / "scenarios" / "best_response.scn", 42, 200);
        expect(out.failures == 0, "best_response scenario reported failures");
        double last_alice = 0, last_bob = 0;
        for (const auto& env : parse_log(out.log_text)) {
            if ((env.msg_type == "auc.submit" || env.msg_type == "auc.adjust") &&
                env.sent_at > 50.0)
                throw CheckFailure{"market mutation after t=50 at t=" +
                                   std::to_string(env.sent_at)};
            if (env.msg_type == "sls.heartbeat")
                for (const auto& vm : env.body.at("vms")) {
                    if (vm.at("bidder") == "alice") last_alice = vm.at("share").get<double>();
                    if (vm.at("bidder") == "bob") last_bob = vm.at("share").get<double>();
                }
        }
        expect(last_alice >= 0.6 - 0.01, "alice settled below target");
        expect(last_bob >= 0.3 - 0.01, "bob settled below target");
    }
}

// 7: the descriptor corpus round-trips through the canonical printer, the
//    flattener agrees with an independent oracle, and every reference form
//    resolves to its frozen expected value.
void check_descriptor_corpus() {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(kRepo / "descriptors"))
        if (e.path().extension() == ".sd") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    expect(files.size() >= 20, "corpus has only " + std::to_string(files.size()) + " files");

    size_t oracle_checked = 0;
    for (const auto& f : files) {
        std::string text = slurp(f);
        desc::Document doc = desc::parse(text);
        std::string p1 = desc::print(doc);
        std::string p2 = desc::print(desc::parse(p1));
        expect(p1 == p2, f.filename().string() + ": canonical print is not a fixed point");

        // prototype-only libraries have nothing to resolve
        const desc::Component* top = doc.top(desc::kRootName);
        if (!top) continue;

        desc::Component r1 = desc::resolve_document(doc);
        desc::Component r2 = desc::resolve_document(desc::parse(text));
        expect(desc::print(r1) == desc::print(r2),
               f.filename().string() + ": resolve is not deterministic");

        if (text.find("REF") == std::string::npos) {
            desc::Component want = oracle_flatten(doc, *top);
            expect(desc::print(r1) == desc::print(want),
                   f.filename().string() + ": flattening disagrees with the oracle");
            ++oracle_checked;
        }
    }
    expect(oracle_checked >= 12, "too few oracle-checked files");

    auto resolved = [&](const char* name) {
        return desc::resolve_document(desc::parse(slurp(kRepo / "descriptors" / name)));
    };
    {
        desc::Component c = resolved("parent_ref.sd");
        const desc::Component* node = c.child("cluster")->child("node");
        expect(node->get_string("my_rack") == "r7", "parent_ref my_rack");
        expect(node->get_string("my_zone") == "eu", "parent_ref my_zone");
        expect(node->get_int("sibling_depth") == 2, "parent_ref sibling_depth");
    }
    {
        desc::Component c = resolved("deep_nesting.sd");
        const desc::Component* d = c.child("a")->child("b")->child("c")->child("d");
        expect(d->get_string("leaf") == "bottom", "deep_nesting leaf");
        expect(d->get_string("up") == "level-b", "deep_nesting up");
    }
    {
        desc::Component c = resolved("attrib_ref.sd");
        const desc::Component* front = c.child("web")->child("front");
        expect(front->get_int("p") == 80, "attrib_ref inherits the outer port");
        expect(front->get_string("c") == "green", "attrib_ref nearest scope wins");
    }
    {
        desc::Component c = resolved("path_ref.sd");
        const desc::Component* probe = c.child("probe");
        expect(probe->get_int("target") == 8080, "path_ref target");
        expect(probe->get_bool("secure", false), "path_ref secure");
    }
    {
        desc::Component c = resolved("ref_to_component.sd");
        desc::Component* policy = c.child("worker")->child("policy");
        expect(policy != nullptr && policy->get_int("retries") == 3, "component ref copy");
        policy->set("retries", desc::Value(int64_t{99}));
        expect(c.child("template")->get_int("retries") == 3, "component ref copy is deep");
    }
}

// 8: deployment walks the tree in declaration order, teardown retraces it
//    exactly backwards, and a dead VM is noticed within two ping periods.
void check_lifecycle_order() {
    {
        Rig rig;
        rig.add_host("h1", 4.0, 8192);
        rig.add_host("h2", 4.0, 8192);
        Deployment& eng = rig.engine_for("order", "two_compounds.sd");

        expect(rig.drive([&](auto done) { eng.deploy(done); }), "deploy failed");
        expect(rig.drive([&](auto done) { eng.start(done); }), "start failed");
        rig.clock.advance_to(rig.clock.now() + 30);
        double term_begin = rig.clock.now();
        rig.drive([&](auto done) { eng.terminate([done](bool) { done(true); }); });
        expect(rig.clock.now() - term_begin <= 30.0, "teardown not bounded");

        std::vector<std::string> want;
        preorder(desc::resolve_document(
                     desc::parse(slurp(kRepo / "descriptors" / "two_compounds.sd"))),
                 "sfConfig", want);

        std::vector<std::string> deployed, started, terminated;
        for (const auto& r : eng.trace()) {
            if (r.to == NodeState::Deployed) deployed.push_back(r.path);
            if (r.to == NodeState::Started) started.push_back(r.path);
            if (r.to == NodeState::Terminated) terminated.push_back(r.path);
        }
        expect(deployed == want, "deploy order is not the declaration pre-order");
        expect(started.size() == want.size(), "not every node started");
        std::vector<std::string> reversed(deployed.rbegin(), deployed.rend());
        expect(terminated == reversed, "teardown is not the exact reverse of rollout");

        for (const auto& path : want) {
            double t_dep = -1, t_start = -1, t_term = -1;
            for (const auto& r : eng.trace()) {
                if (r.path != path) continue;
                if (r.to == NodeState::Deployed) t_dep = r.at;
                if (r.to == NodeState::Started) t_start = r.at;
                if (r.to == NodeState::Terminated) t_term = r.at;
            }
            expect(t_dep >= 0 && t_dep <= t_start && t_start <= t_term,
                   path + ": lifecycle edges out of order");
        }
    }
    {
        Rig rig;
        rig.add_host("h1", 4.0, 8192);
        Deployment& eng = rig.engine_for("death", "web_stack.sd");
        expect(rig.drive([&](auto done) { eng.deploy(done); }), "deploy failed");
        expect(rig.drive([&](auto done) { eng.start(done); }), "start failed");
        rig.clock.advance_to(rig.clock.now() + 10);

        double killed_at = rig.clock.now();
        // the stack's one VM; the watchdog domain is monitoring it
        rig.hosts.require("h1").kill_vm("vm-h1-1");
        rig.clock.advance_to(killed_at + 10);

        double death_seen = -1;
        for (const auto& env : parse_log(rig.bus.log_text()))
            if (env.msg_type == "lc.vm_death" && death_seen < 0) death_seen = env.sent_at;
        expect(death_seen >= killed_at, "no death notice in the log");
        // the domain pings every 2 seconds; detection within two periods
        expect(death_seen <= killed_at + 4.0 + 1e-9,
               "death noticed only after " + std::to_string(death_seen - killed_at) + "s");
    }
}

// 9: a host's ledger is byte-identical after a full cycle, whether the
//    deployment ended cleanly or by a mid-run VM crash.
void check_host_ledger_restore() {
    {
        Rig rig;
        rig.add_host("h1", 4.0, 8192);
        std::string before = rig.hosts.require("h1").snapshot();
        Deployment& eng = rig.engine_for("clean", "web_stack.sd");
        expect(rig.drive([&](auto done) { eng.deploy(done); }), "deploy failed");
        expect(rig.drive([&](auto done) { eng.start(done); }), "start failed");
        rig.clock.advance_to(rig.clock.now() + 25);
        rig.drive([&](auto done) { eng.terminate([done](bool) { done(true); }); });
        rig.clock.advance_to(rig.clock.now() + 10);
        expect(rig.hosts.require("h1").snapshot() == before,
               "clean cycle left the host ledger dirty");
    }
    {
        Rig rig;
        rig.add_host("h1", 4.0, 8192);
        std::string before = rig.hosts.require("h1").snapshot();
        Deployment& eng = rig.engine_for("crashy", "web_stack.sd");
        expect(rig.drive([&](auto done) { eng.deploy(done); }), "deploy failed");
        expect(rig.drive([&](auto done) { eng.start(done); }), "start failed");
        rig.clock.advance_to(rig.clock.now() + 15);
        rig.hosts.require("h1").kill_vm("vm-h1-1");  // storage VM: tears it all down
        rig.clock.advance_to(rig.clock.now() + 30);
        expect(rig.hosts.require("h1").snapshot() == before,
               "fault cycle left the host ledger dirty");
    }
}

// 10: a market lease lands on the cheapest host with enough memory; once
//     that host fills up, the next lease spills to the next-cheapest.
void check_market_placement() {
    Rig rig;
    rig.add_market({{"alice", Credit::parse("1000.00")},
                    {"bob", Credit::parse("1000.00")},
                    {"seed", Credit::parse("10000.00")}});
    rig.add_host("h0", 1.0, 1024);
    rig.add_host("h1", 1.0, 1024);
    rig.add_host("h2", 1.0, 128);
    // price ladder: h2 cheapest but too small, h1 cheap, h0 dear
    rig.seed_bid("h0", "seed-0", "seed", "2000.00", 10000);
    rig.seed_bid("h1", "seed-1", "seed", "1000.00", 10000);
    rig.seed_bid("h2", "seed-2", "seed", "500.00", 10000);

    Deployment& eng = rig.engine_for("pair", "market_pair.sd");
    expect(rig.drive([&](auto done) { eng.deploy(done); }), "market deploy failed");

    Json status = eng.status();
    std::string first_host, second_host;
    for (const auto& n : status.at("nodes")) {
        if (n.at("path") == "sfConfig/first") first_host = n.value("host", "");
        if (n.at("path") == "sfConfig/second") second_host = n.value("host", "");
    }
    expect(first_host == "h1",
           "first lease landed on '" + first_host + "', want cheapest-with-memory h1");
    expect(second_host == "h0",
           "second lease landed on '" + second_host + "', want spill to h0");
}

// 11: every bundled scenario is a pure function of its seed: two runs give
//     byte-identical logs, traces, and reports.
void check_determinism() {
    const char* scenarios[] = {"two_bidders.scn",    "adjust_nobank.scn",
                               "best_response.scn",  "market_deploy.scn",
                               "lifecycle_fault.scn", "faults_bus.scn"};
    for (const char* name : scenarios) {
        auto a = run_scenario_file(kRepo / "scenarios" / name, 42, 200);
        auto b = run_scenario_file(kRepo / "scenarios" / name, 42, 200);
        expect(a.failures == 0, std::string(name) + " reported failures");
        expect(a.log_text == b.log_text, std::string(name) + ": logs differ across runs");
        expect(a.report_text == b.report_text,
               std::string(name) + ": reports differ across runs");
        expect(a.trace_text == b.trace_text,
               std::string(name) + ": traces differ across runs");
    }
}

}  // namespace

int main() {
    struct Item {
        int num;
        const char* name;
        void (*fn)();
    };
    const Item items[] = {
        {1, "proportional-shares-and-cpu-accounting", check_proportional_accounting},
        {2, "share-vector-law", check_share_vector_law},
        {3, "bank-conservation", check_bank_conservation},
        {4, "lease-settles-once", check_lease_settles_once},
        {5, "directory-ranking", check_directory_ranking},
        {6, "best-response", check_best_response},
        {7, "descriptor-corpus", check_descriptor_corpus},
        {8, "lifecycle-order-and-death-detection", check_lifecycle_order},
        {9, "host-ledger-restore", check_host_ledger_restore},
        {10, "market-placement", check_market_placement},
        {11, "scenario-determinism", check_determinism},
    };

    int failures = 0;
    for (const auto& item : items) {
        std::string note;
        try {
            item.fn();
        } catch (const CheckFailure& f) {
            note = f.what;
        } catch (const Error& e) {
            note = e.code() + ": " + e.what();
        } catch (const std::exception& e) {
            note = e.what();
        }
        if (note.empty()) {
            std::printf("PASS %2d %s\n", item.num, item.name);
        } else {
            std::printf("FAIL %2d %s: %s\n", item.num, item.name, note.c_str());
            ++failures;
        }
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
