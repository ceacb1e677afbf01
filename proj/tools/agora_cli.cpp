// Command-line front end for the compute market and lifecycle engine.
//
// Deterministic subcommands (scenario, deploy/status/terminate, report,
// descriptor) run entirely in-process on the virtual clock; live subcommands
// (daemon, bid) join a wall-clock HTTP mesh. Settings resolve in order:
// command-line flag, AGORA_* environment variable, --config file, default.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
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
#include "agora/report.hpp"
#include "agora/scenario.hpp"
#include "agora/simhost.hpp"
#include "agora/wallbus.hpp"

namespace fs = std::filesystem;
using agora::Credit;
using agora::Json;

namespace {

constexpr int kOk = 0;        // command ran, outcome positive
constexpr int kRefused = 1;   // ran, but a check/diagnostic/request failed
constexpr int kUnusable = 2;  // bad usage, unreadable input, internal error

// ---------------------------------------------------------------------------
// Layered settings: flag > environment > config file > default.

struct Settings {
    Json file = Json::object();

    static std::string env_name(const std::string& key) {
        std::string n = "AGORA_";
        for (char c : key) n += (c == '-') ? '_' : char(std::toupper((unsigned char)c));
        return n;
    }

    std::string str(const CLI::Option* opt, const std::string& flag_value,
                    const std::string& key, const std::string& def) const {
        if (opt && opt->count() > 0) return flag_value;
        if (const char* e = std::getenv(env_name(key).c_str())) return e;
        if (file.contains(key) && file[key].is_string()) return file[key].get<std::string>();
        return def;
    }

    double num(const CLI::Option* opt, double flag_value, const std::string& key,
               double def) const {
        if (opt && opt->count() > 0) return flag_value;
        if (const char* e = std::getenv(env_name(key).c_str())) return std::stod(e);
        if (file.contains(key) && file[key].is_number()) return file[key].get<double>();
        return def;
    }

    uint64_t u64(const CLI::Option* opt, uint64_t flag_value, const std::string& key,
                 uint64_t def) const {
        if (opt && opt->count() > 0) return flag_value;
        if (const char* e = std::getenv(env_name(key).c_str())) return std::stoull(e);
        if (file.contains(key) && file[key].is_number_unsigned())
            return file[key].get<uint64_t>();
        return def;
    }
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.good()) agora::fail("unreadable", "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spill(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out.good()) agora::fail("unwritable", "cannot write " + path.string());
    out << text;
}

// ---------------------------------------------------------------------------
// Deterministic in-process session shared by deploy / status / terminate.
//
// A session file records everything needed to rebuild the run: descriptor
// text, host fleet, market services, and the op list already applied. The
// simulation is deterministic, so replaying the ops reproduces the exact
// state the previous command left behind, and a later command can extend it.

struct HostSpec {
    std::string id;
    double cpu = 1.0;
    int64_t mem = 4096;
};

HostSpec parse_host_spec(const std::string& s) {
    HostSpec h;
    std::istringstream ss(s);
    std::string part;
    if (!std::getline(ss, h.id, ':') || h.id.empty())
        agora::fail("bad_host_spec", "expected id[:cpu[:mem]], got '" + s + "'");
    if (std::getline(ss, part, ':')) h.cpu = std::stod(part);
    if (std::getline(ss, part, ':')) h.mem = std::stoll(part);
    return h;
}

// Collects every "account" attribute in a resolved tree so a market session
// can fund the tenants the descriptor names.
void collect_accounts(const agora::desc::Component& c, std::vector<std::string>& out) {
    for (const auto& e : c.entries) {
        if (e.value.is_string() && e.name == "account") {
            const std::string& a = e.value.as_string();
            if (std::find(out.begin(), out.end(), a) == out.end()) out.push_back(a);
        }
        if (e.value.is_component())
            collect_accounts(*e.value.as_component(), out);
    }
}

class Session {
public:
    Session(std::string id, std::string descriptor_text, std::vector<HostSpec> hosts,
            bool market, double run_for)
        : id_(std::move(id)),
          descriptor_text_(std::move(descriptor_text)),
          host_specs_(std::move(hosts)),
          market_(market),
          run_for_(run_for) {
        build();
    }

    static Session load(const fs::path& session_file) {
        Json j = Json::parse(slurp(session_file));
        std::vector<HostSpec> hosts;
        for (const auto& h : j.at("hosts"))
            hosts.push_back({h.at("id").get<std::string>(), h.at("cpu").get<double>(),
                             h.at("mem").get<int64_t>()});
        Session s(j.at("id").get<std::string>(), j.at("descriptor").get<std::string>(),
                  std::move(hosts), j.value("market", false), j.value("run_for", 30.0));
        for (const auto& op : j.at("ops")) s.apply(op.at("op").get<std::string>(),
                                                   op.value("arg", 0.0));
        return s;
    }

    // Applies one op and appends it to the recorded list.
    bool apply(const std::string& op, double arg = 0) {
        bool ok = true;
        if (op == "deploy") ok = drive([&](auto done) { engine_->deploy(done); });
        else if (op == "start") ok = drive([&](auto done) { engine_->start(done); });
        else if (op == "terminate") {
            drive([&](auto done) { engine_->terminate([done](bool) { done(true); }); });
        } else if (op == "advance") {
            clock_.advance_to(clock_.now() + arg);
        } else {
            agora::fail("bad_session", "unknown op '" + op + "' in session file");
        }
        ops_.push_back(Json{{"op", op}, {"arg", arg}});
        return ok;
    }

    Json session_json() const {
        Json hosts = Json::array();
        for (const auto& h : host_specs_)
            hosts.push_back(Json{{"id", h.id}, {"cpu", h.cpu}, {"mem", h.mem}});
        return Json{{"id", id_},          {"descriptor", descriptor_text_},
                    {"hosts", hosts},     {"market", market_},
                    {"run_for", run_for_}, {"ops", ops_}};
    }

    std::string trace_text() const {
        std::string out;
        for (const auto& r : engine_->trace()) out += r.to_json().dump() + "\n";
        return out;
    }

    Json status() { return engine_->status(); }
    std::string log_text() const { return bus_.log_text(); }
    const std::string& id() const { return id_; }
    double run_for() const { return run_for_; }

    void write_artifacts(const fs::path& dir) {
        spill(dir / (id_ + ".session.json"), session_json().dump(2) + "\n");
        spill(dir / (id_ + ".trace"), trace_text());
        spill(dir / (id_ + ".status.json"), status().dump(2) + "\n");
        spill(dir / (id_ + ".log"), log_text());
    }

private:
    void build() {
        bus_.attach("trace", &trace_sink_);
        for (const auto& h : host_specs_) registry_.add(bus_, h.id, {h.cpu, h.mem});
        agora::desc::Document doc = agora::desc::parse(descriptor_text_);
        agora::desc::Component resolved = agora::desc::resolve_document(doc);
        if (market_) {
            bank_ = std::make_unique<agora::Bank>(bus_, Credit::parse("1000000.00"));
            bus_.attach("bank", bank_.get());
            bank_->open_account("provider", Credit{});
            std::vector<std::string> accounts;
            collect_accounts(resolved, accounts);
            for (const auto& a : accounts)
                bank_->open_account(a, Credit::parse("10000.00"));
            dir_ = std::make_unique<agora::Directory>(bus_);
            bus_.attach("sls", dir_.get());
            for (const auto& h : host_specs_) {
                agora::AuctioneerConfig cfg;
                cfg.provider_account = "provider";
                cfg.boot_delay = 0;
                auto auc = std::make_unique<agora::Auctioneer>(
                    bus_, registry_.require(h.id), cfg);
                bus_.attach("auc:" + h.id, auc.get());
                auc->start();
                aucs_.push_back(std::move(auc));
            }
            clock_.drain();
        }
        engine_ = std::make_unique<agora::Deployment>(bus_, registry_, id_,
                                                      std::move(resolved));
        bus_.attach("lc:" + id_, engine_.get());
    }

    // Runs one async engine op to completion, event by event, leaving the
    // clock at the instant the op finished.
    template <typename Op>
    bool drive(Op op) {
        bool ok = false;
        bool fired = false;
        op([&](bool r) { ok = r; fired = true; });
        clock_.drain();
        size_t guard = 0;
        while (!fired) {
            double next = clock_.next_event_at();
            if (next < 0) break;
            if (++guard > 200000)
                agora::fail("stuck", "lifecycle op did not settle");
            clock_.advance_to(next);
        }
        if (!fired) agora::fail("stuck", "lifecycle op never completed");
        return ok;
    }

    std::string id_;
    std::string descriptor_text_;
    std::vector<HostSpec> host_specs_;
    bool market_ = false;
    double run_for_ = 30;
    Json ops_ = Json::array();

    agora::VirtualClock clock_;
    agora::SimBus bus_{clock_};
    agora::TraceSink trace_sink_;
    agora::HostRegistry registry_;
    std::unique_ptr<agora::Bank> bank_;
    std::unique_ptr<agora::Directory> dir_;
    std::vector<std::unique_ptr<agora::Auctioneer>> aucs_;
    std::unique_ptr<agora::Deployment> engine_;
};

// ---------------------------------------------------------------------------
// Wall-clock mesh helpers.

std::map<std::string, std::string> peer_map(const std::vector<std::string>& peer_flags,
                                            const Json& config) {
    std::map<std::string, std::string> peers;
    if (config.contains("peers") && config["peers"].is_object())
        for (auto it = config["peers"].begin(); it != config["peers"].end(); ++it)
            peers[it.key()] = it.value().get<std::string>();
    for (const auto& p : peer_flags) {
        auto eq = p.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == p.size())
            agora::fail("bad_peer", "expected endpoint=host:port, got '" + p + "'");
        peers[p.substr(0, eq)] = p.substr(eq + 1);
    }
    return peers;
}

std::pair<std::string, int> split_listen(const std::string& listen) {
    auto colon = listen.rfind(':');
    if (colon == std::string::npos || colon + 1 == listen.size())
        agora::fail("bad_listen", "expected host:port, got '" + listen + "'");
    return {listen.substr(0, colon), std::stoi(listen.substr(colon + 1))};
}

// Prints every notice addressed to the local trace endpoint; live sessions
// have no report, so this is the operator's view of the run.
class ConsoleTrace : public agora::Service {
public:
    void on_message(const agora::Envelope& env) override {
        std::cout << "[" << env.msg_type << "] " << env.body.dump() << "\n";
        std::cout.flush();
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"agora: a compute market with a declarative deployment engine"};
    app.require_subcommand(1);

    std::string config_path;
    uint64_t seed_flag = 42;
    double until_flag = 200;
    std::string log_dir_flag = ".";
    auto* config_opt = app.add_option("--config", config_path, "JSON settings file");
    auto* seed_opt = app.add_option("--seed", seed_flag, "deterministic run seed");
    auto* until_opt = app.add_option("--until", until_flag, "virtual/wall end time");
    auto* log_dir_opt = app.add_option("--log-dir", log_dir_flag, "artifact directory");

    // scenario run <file.scn>
    auto* scenario = app.add_subcommand("scenario", "run scripted market scenarios");
    std::string scn_file;
    auto* scn_run = scenario->add_subcommand("run", "execute one scenario file");
    scn_run->add_option("file", scn_file, "scenario script")->required();

    // report <logfile>
    auto* report_cmd = app.add_subcommand("report", "render a report from a message log");
    std::string report_log;
    report_cmd->add_option("log", report_log, "message log file")->required();

    // descriptor parse|fmt|resolve|lint <file.sd>
    auto* descriptor = app.add_subcommand("descriptor", "work with deployment descriptors");
    std::string desc_file;
    auto* d_parse = descriptor->add_subcommand("parse", "syntax-check a descriptor");
    auto* d_fmt = descriptor->add_subcommand("fmt", "print canonical descriptor text");
    auto* d_resolve = descriptor->add_subcommand("resolve",
                                                 "print the flattened, resolved tree");
    auto* d_lint = descriptor->add_subcommand("lint", "parse, resolve and validate");
    for (auto* sc : {d_parse, d_fmt, d_resolve, d_lint})
        sc->add_option("file", desc_file, "descriptor file")->required();

    // deploy <file.sd>
    auto* deploy = app.add_subcommand("deploy", "deploy and start a descriptor in-process");
    std::string deploy_file, deploy_id;
    std::vector<std::string> deploy_hosts;
    bool deploy_market = false;
    double run_for = 30;
    deploy->add_option("file", deploy_file, "descriptor file")->required();
    deploy->add_option("--id", deploy_id, "deployment id (default: file stem)");
    deploy->add_option("--host", deploy_hosts, "simulated host as id[:cpu[:mem]]");
    deploy->add_flag("--market", deploy_market, "run bank, directory and auctioneers");
    auto* run_for_opt = deploy->add_option("--run-for", run_for,
                                           "virtual seconds to run after start");

    // status <id> / terminate <id>
    auto* status_cmd = app.add_subcommand("status", "show a deployment's node states");
    auto* term_cmd = app.add_subcommand("terminate", "tear a deployment down");
    std::string session_id;
    status_cmd->add_option("id", session_id, "deployment id")->required();
    term_cmd->add_option("id", session_id, "deployment id")->required();

    // bid once|auto
    auto* bid = app.add_subcommand("bid", "buy CPU share on the live mesh");
    auto* bid_once = bid->add_subcommand("once", "place one bid and report the grant");
    auto* bid_auto = bid->add_subcommand("auto", "keep best-responding to the price");
    std::string bid_account, bid_listen = "127.0.0.1:18750", bid_host, bid_amount = "0",
                bid_budget = "0";
    std::vector<std::string> bid_peers;
    double bid_target = 0.5, bid_duration = 100, bid_interval = 5;
    int64_t bid_memory = 256;
    bool bid_extend = false;
    for (auto* sc : {bid_once, bid_auto}) {
        sc->add_option("--account", bid_account, "bank account to bid from")->required();
        sc->add_option("--listen", bid_listen, "local host:port for replies");
        sc->add_option("--peer", bid_peers, "route as endpoint=host:port");
        sc->add_option("--host", bid_host, "pin to one host, skip the directory");
        sc->add_option("--amount", bid_amount, "fixed bid amount (credits)");
        sc->add_option("--budget", bid_budget, "spend ceiling (0 = uncapped)");
        sc->add_option("--target", bid_target, "CPU share to aim for");
        sc->add_option("--duration", bid_duration, "lease length in seconds");
        sc->add_option("--interval", bid_interval, "best-response poll period");
        sc->add_option("--memory", bid_memory, "VM memory in MiB");
        sc->add_flag("--extend", bid_extend, "spend surplus share on a longer lease");
    }

    // daemon bank|sls|auctioneer
    auto* daemon = app.add_subcommand("daemon", "host one service on the live mesh");
    std::string dm_listen, dm_endowment = "1000000.00", dm_host_id, dm_provider = "provider";
    std::vector<std::string> dm_peers;
    double dm_liveness = 30, dm_cpu = 0, dm_heartbeat = 10, dm_boot_delay = 1;
    int64_t dm_mem = 0;
    auto* dm_bank = daemon->add_subcommand("bank", "accounts and settlement");
    auto* dm_sls = daemon->add_subcommand("sls", "service location directory");
    auto* dm_auc = daemon->add_subcommand("auctioneer", "one host's market");
    for (auto* sc : {dm_bank, dm_sls, dm_auc}) {
        sc->add_option("--listen", dm_listen, "local host:port")->required();
        sc->add_option("--peer", dm_peers, "route as endpoint=host:port");
    }
    std::vector<std::string> dm_accounts;
    dm_bank->add_option("--endowment", dm_endowment, "currency issued at start");
    dm_bank->add_option("--account", dm_accounts, "open account as name=grant");
    dm_sls->add_option("--liveness", dm_liveness, "seconds before a host is dropped");
    dm_auc->add_option("--host-id", dm_host_id, "host name to register")->required();
    dm_auc->add_option("--cpu", dm_cpu, "CPU capacity (1.0 = one core)")->required();
    dm_auc->add_option("--mem", dm_mem, "memory capacity in MiB")->required();
    dm_auc->add_option("--provider", dm_provider, "account credited on settlement");
    dm_auc->add_option("--heartbeat", dm_heartbeat, "directory refresh period");
    dm_auc->add_option("--boot-delay", dm_boot_delay, "granted VM boot time");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUnusable;
    }

    try {
        Settings conf;
        std::string cfile = conf.str(config_opt, config_path, "config", "");
        if (!cfile.empty()) conf.file = Json::parse(slurp(cfile));
        uint64_t seed = conf.u64(seed_opt, seed_flag, "seed", 42);
        double until = conf.num(until_opt, until_flag, "until", 200);
        fs::path log_dir = conf.str(log_dir_opt, log_dir_flag, "log-dir", ".");

        if (scn_run->parsed()) {
            agora::ScenarioOutcome out;
            try {
                out = agora::run_scenario_file(scn_file, seed, until);
            } catch (const agora::Error& e) {
                std::cerr << "error: " << e.code() << ": " << e.what() << "\n";
                return kUnusable;
            }
            fs::create_directories(log_dir);
            spill(log_dir / (out.name + ".log"), out.log_text);
            spill(log_dir / (out.name + ".trace"), out.trace_text);
            spill(log_dir / (out.name + ".report"), out.report_text);
            std::cout << out.report_text;
            return out.all_passed() ? kOk : kRefused;
        }

        if (report_cmd->parsed()) {
            agora::RunReport rep;
            try {
                rep = agora::report_from_log(slurp(report_log));
            } catch (const agora::Error& e) {
                std::cerr << "error: " << e.code() << ": " << e.what() << "\n";
                return kUnusable;
            }
            std::cout << rep.text;
            return rep.failures == 0 ? kOk : kRefused;
        }

        if (descriptor->parsed()) {
            std::string text;
            try {
                text = slurp(desc_file);
            } catch (const agora::Error& e) {
                std::cerr << "error: " << e.code() << ": " << e.what() << "\n";
                return kUnusable;
            }
            try {
                agora::desc::Document doc = agora::desc::parse(text);
                if (d_parse->parsed()) {
                    std::cout << "ok: " << doc.tops.size() << " top-level entr"
                              << (doc.tops.size() == 1 ? "y" : "ies") << "\n";
                    return kOk;
                }
                if (d_fmt->parsed()) {
                    std::cout << agora::desc::print(doc);
                    return kOk;
                }
                agora::desc::Component resolved = agora::desc::resolve_document(doc);
                if (d_resolve->parsed()) {
                    std::cout << agora::desc::print(resolved);
                    return kOk;
                }
                // lint: every node must carry a known lifecycle class
                size_t nodes = 0;
                std::function<void(const agora::desc::Component&, std::string)> walk =
                    [&](const agora::desc::Component& c, std::string path) {
                        ++nodes;
                        agora::node_kind_of(c);
                        for (const auto& e : c.entries)
                            if (e.value.is_component())
                                walk(*e.value.as_component(), path + "/" + e.name);
                    };
                walk(resolved, "sfConfig");
                std::cout << "ok: " << nodes << " nodes, all classes valid\n";
                return kOk;
            } catch (const agora::Error& e) {
                std::cerr << desc_file << ": " << e.code() << ": " << e.what() << "\n";
                return kRefused;
            }
        }

        if (deploy->parsed()) {
            std::string text;
            try {
                text = slurp(deploy_file);
            } catch (const agora::Error& e) {
                std::cerr << "error: " << e.code() << ": " << e.what() << "\n";
                return kUnusable;
            }
            if (deploy_id.empty()) deploy_id = fs::path(deploy_file).stem().string();
            std::vector<HostSpec> hosts;
            for (const auto& h : deploy_hosts) hosts.push_back(parse_host_spec(h));
            if (hosts.empty()) hosts.push_back({"h1", 1.0, 4096});
            double rf = conf.num(run_for_opt, run_for, "run-for", 30);

            Session session(deploy_id, text, hosts, deploy_market, rf);
            bool deployed = session.apply("deploy");
            bool started = deployed && session.apply("start");
            if (started) session.apply("advance", rf);
            fs::create_directories(log_dir);
            session.write_artifacts(log_dir);
            std::cout << session.status().dump(2) << "\n";
            if (!deployed) std::cerr << "deploy failed; see " << deploy_id << ".trace\n";
            else if (!started) std::cerr << "start failed; see " << deploy_id << ".trace\n";
            return started ? kOk : kRefused;
        }

        if (status_cmd->parsed() || term_cmd->parsed()) {
            fs::path sfile = log_dir / (session_id + ".session.json");
            if (!fs::exists(sfile)) {
                std::cerr << "error: no session file " << sfile.string() << "\n";
                return kUnusable;
            }
            Session session = Session::load(sfile);
            if (term_cmd->parsed()) {
                session.apply("terminate");
                session.apply("advance", 5.0);
                session.write_artifacts(log_dir);
            }
            std::cout << session.status().dump(2) << "\n";
            return kOk;
        }

        if (bid_once->parsed() || bid_auto->parsed()) {
            auto [host, port] = split_listen(bid_listen);
            agora::WallBus wall(host, port, peer_map(bid_peers, conf.file));
            ConsoleTrace trace;
            wall.attach("trace", &trace);
            agora::BidderAgent::Options opt;
            opt.policy.target_share = bid_target;
            opt.policy.budget = Credit::parse(bid_budget);
            opt.policy.planned_duration = bid_duration;
            opt.policy.check_interval = bid_interval;
            opt.policy.allow_extend = bid_extend;
            opt.spec.memory = bid_memory;
            opt.host = bid_host;
            opt.amount = Credit::parse(bid_amount);
            opt.duration = bid_duration;
            opt.auto_adjust = bid_auto->parsed();
            agora::BidderAgent agent(wall, bid_account, opt);
            wall.attach("client:" + bid_account, &agent);
            agent.run();
            // Poll for completion so `once` exits as soon as the grant or
            // refusal lands instead of waiting out the whole window.
            std::function<void()> watch = [&]() {
                if (agent.done() && !bid_auto->parsed()) wall.stop();
                else wall.schedule_in(0.05, watch);
            };
            wall.schedule_in(0.05, watch);
            double window = (until_opt->count() || !bid_auto->parsed())
                                ? (until_opt->count() ? until : 30.0)
                                : 0.0;
            wall.run(window);
            if (!agent.vm_id().empty()) {
                std::cout << "granted bid " << agent.bid_id() << " vm " << agent.vm_id()
                          << "\n";
                return kOk;
            }
            std::cerr << "no grant for account " << bid_account << "\n";
            return kRefused;
        }

        if (daemon->parsed()) {
            auto [host, port] = split_listen(dm_listen);
            agora::WallBus wall(host, port, peer_map(dm_peers, conf.file));
            double window = until_opt->count() ? until : 0.0;
            if (dm_bank->parsed()) {
                agora::Bank bank(wall, Credit::parse(dm_endowment));
                if (conf.file.contains("accounts"))
                    for (auto it = conf.file["accounts"].begin();
                         it != conf.file["accounts"].end(); ++it)
                        bank.open_account(it.key(),
                                          Credit::parse(it.value().get<std::string>()));
                for (const auto& a : dm_accounts) {
                    auto eq = a.find('=');
                    if (eq == std::string::npos)
                        agora::fail("bad_account", "expected name=grant, got '" + a + "'");
                    bank.open_account(a.substr(0, eq), Credit::parse(a.substr(eq + 1)));
                }
                wall.attach("bank", &bank);
                std::cout << "bank listening on " << dm_listen << "\n";
                wall.run(window);
            } else if (dm_sls->parsed()) {
                agora::Directory dir(wall, dm_liveness);
                wall.attach("sls", &dir);
                std::cout << "directory listening on " << dm_listen << "\n";
                wall.run(window);
            } else if (dm_auc->parsed()) {
                agora::SimHost sim(wall, dm_host_id, {dm_cpu, dm_mem});
                agora::AuctioneerConfig cfg;
                cfg.provider_account = dm_provider;
                cfg.heartbeat_interval = dm_heartbeat;
                cfg.boot_delay = dm_boot_delay;
                agora::Auctioneer auc(wall, sim, cfg);
                wall.attach("auc:" + dm_host_id, &auc);
                auc.start();
                std::cout << "auctioneer for " << dm_host_id << " listening on "
                          << dm_listen << "\n";
                wall.run(window);
            }
            return kOk;
        }

        std::cerr << "error: no subcommand\n";
        return kUnusable;
    } catch (const agora::Error& e) {
        std::cerr << "error: " << e.code() << ": " << e.what() << "\n";
        return kUnusable;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kUnusable;
    }
}
