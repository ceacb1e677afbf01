// End-to-end checks of the command-line front end: subprocess invocations of
// every deterministic subcommand, exit-code contract, settings precedence,
// and an in-process wall-clock mesh exercising the HTTP transport.

#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <thread>

#include "agora/auctioneer.hpp"
#include "agora/bank.hpp"
#include "agora/bidder.hpp"
#include "agora/directory.hpp"
#include "agora/simhost.hpp"
#include "agora/wallbus.hpp"

namespace fs = std::filesystem;
using agora::Credit;

namespace {

const std::string kBin = AGORA_CLI_BIN;
const fs::path kRepo = AGORA_REPO_ROOT;

struct CmdResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Runs one CLI invocation through the shell, capturing both streams. The
// env prefix lets precedence tests inject AGORA_* variables.
CmdResult run_cli(const std::string& args, const std::string& env_prefix = "") {
    static int serial = 0;
    fs::path out = fs::temp_directory_path() / ("agora_cli_out_" + std::to_string(++serial));
    fs::path err = fs::temp_directory_path() / ("agora_cli_err_" + std::to_string(serial));
    std::string cmd = env_prefix + kBin + " " + args + " > " + out.string() + " 2> " +
                      err.string();
    int rc = std::system(cmd.c_str());
    CmdResult r;
    r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    fs::remove(out);
    fs::remove(err);
    return r;
}

// Fresh artifact directory per test case.
struct TempDir {
    fs::path path;
    TempDir() {
        static int serial = 0;
        path = fs::temp_directory_path() /
               ("agora_cli_case_" + std::to_string(::getpid()) + "_" +
                std::to_string(++serial));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

}  // namespace

TEST_CASE("scenario run writes artifacts and repeats byte for byte") {
    TempDir dir1, dir2;
    std::string scn = (kRepo / "scenarios" / "two_bidders.scn").string();

    auto r1 = run_cli("--log-dir " + dir1.str() + " --seed 42 scenario run " + scn);
    INFO(r1.err);
    REQUIRE(r1.exit_code == 0);
    CHECK(r1.out.find("checks") != std::string::npos);
    CHECK(fs::exists(dir1.path / "two_bidders.log"));
    CHECK(fs::exists(dir1.path / "two_bidders.trace"));
    CHECK(fs::exists(dir1.path / "two_bidders.report"));

    // stdout carries the same report that lands on disk
    CHECK(r1.out == slurp(dir1.path / "two_bidders.report"));

    auto r2 = run_cli("--log-dir " + dir2.str() + " --seed 42 scenario run " + scn);
    REQUIRE(r2.exit_code == 0);
    CHECK(slurp(dir1.path / "two_bidders.log") == slurp(dir2.path / "two_bidders.log"));
    CHECK(slurp(dir1.path / "two_bidders.report") ==
          slurp(dir2.path / "two_bidders.report"));
    CHECK(slurp(dir1.path / "two_bidders.trace") == slurp(dir2.path / "two_bidders.trace"));
}

TEST_CASE("report subcommand reproduces a run's report from its log alone") {
    TempDir dir;
    std::string scn = (kRepo / "scenarios" / "adjust_nobank.scn").string();
    auto run = run_cli("--log-dir " + dir.str() + " scenario run " + scn);
    REQUIRE(run.exit_code == 0);

    auto rep = run_cli("report " + (dir.path / "adjust_nobank.log").string());
    REQUIRE(rep.exit_code == 0);
    CHECK(rep.out == slurp(dir.path / "adjust_nobank.report"));
}

TEST_CASE("failing scenario exits 1 and reports the failure") {
    TempDir dir;
    std::ofstream scn(dir.path / "fail.scn");
    scn << "spawn host {\"host\": \"h1\", \"cpu\": 1.0, \"mem\": 1024}\n"
        << "assert vm h1 vm-h1-1 RUNNING\n";
    scn.close();

    auto r = run_cli("--log-dir " + dir.str() + " --until 10 scenario run " +
                     (dir.path / "fail.scn").string());
    CHECK(r.exit_code == 1);
    CHECK(r.out.find("FAIL") != std::string::npos);
}

TEST_CASE("unparseable scenario exits 2 with a line diagnostic") {
    TempDir dir;
    std::ofstream scn(dir.path / "bad.scn");
    scn << "frobnicate all the things\n";
    scn.close();

    auto r = run_cli("--log-dir " + dir.str() + " scenario run " +
                     (dir.path / "bad.scn").string());
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("line 1") != std::string::npos);
}

TEST_CASE("report of a corrupt log exits 2 naming the bad line") {
    TempDir dir;
    std::ofstream log(dir.path / "corrupt.log");
    log << "this is not an envelope\n";
    log.close();

    auto r = run_cli("report " + (dir.path / "corrupt.log").string());
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("bad_log") != std::string::npos);
    CHECK(r.err.find("line 1") != std::string::npos);
}

TEST_CASE("descriptor fmt emits a fixed point of itself") {
    TempDir dir;
    std::string f = (kRepo / "descriptors" / "web_stack.sd").string();
    auto once = run_cli("descriptor fmt " + f);
    REQUIRE(once.exit_code == 0);
    REQUIRE(!once.out.empty());

    std::ofstream tmp(dir.path / "canon.sd");
    tmp << once.out;
    tmp.close();
    auto twice = run_cli("descriptor fmt " + (dir.path / "canon.sd").string());
    REQUIRE(twice.exit_code == 0);
    CHECK(once.out == twice.out);
}

TEST_CASE("descriptor parse distinguishes good, broken, and missing input") {
    auto good = run_cli("descriptor parse " +
                        (kRepo / "descriptors" / "market_single.sd").string());
    CHECK(good.exit_code == 0);
    CHECK(good.out.find("ok") == 0);

    TempDir dir;
    std::ofstream bad(dir.path / "bad.sd");
    bad << "sfConfig extends {\n";
    bad.close();
    auto broken = run_cli("descriptor parse " + (dir.path / "bad.sd").string());
    CHECK(broken.exit_code == 1);
    CHECK(broken.err.find("parse_error") != std::string::npos);

    auto missing = run_cli("descriptor parse " + (dir.path / "nosuch.sd").string());
    CHECK(missing.exit_code == 2);
}

TEST_CASE("descriptor resolve flattens prototypes into one tree") {
    auto r = run_cli("descriptor resolve " +
                     (kRepo / "descriptors" / "market_single.sd").string());
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("sfConfig {") == 0);
    // the lease inherits the prototype body with its override applied
    CHECK(r.out.find("target_share 0.6;") != std::string::npos);
    CHECK(r.out.find("extends") == std::string::npos);
}

TEST_CASE("descriptor lint rejects an unknown lifecycle class") {
    TempDir dir;
    std::ofstream bad(dir.path / "odd.sd");
    bad << "sfConfig {\n  sfClass \"Zeppelin\";\n}\n";
    bad.close();
    auto r = run_cli("descriptor lint " + (dir.path / "odd.sd").string());
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("Zeppelin") != std::string::npos);

    auto ok = run_cli("descriptor lint " +
                      (kRepo / "descriptors" / "two_compounds.sd").string());
    CHECK(ok.exit_code == 0);
}

TEST_CASE("deploy, status, terminate share one deterministic session") {
    TempDir dir;
    std::string f = (kRepo / "descriptors" / "web_stack.sd").string();

    auto dep = run_cli("--log-dir " + dir.str() + " deploy " + f + " --id web");
    INFO(dep.err);
    REQUIRE(dep.exit_code == 0);
    CHECK(dep.out.find("\"STARTED\"") != std::string::npos);
    REQUIRE(fs::exists(dir.path / "web.session.json"));
    REQUIRE(fs::exists(dir.path / "web.trace"));

    std::string trace_after_deploy = slurp(dir.path / "web.trace");

    // status replays the recorded ops without changing the session
    auto st = run_cli("--log-dir " + dir.str() + " status web");
    REQUIRE(st.exit_code == 0);
    CHECK(st.out.find("\"STARTED\"") != std::string::npos);
    CHECK(slurp(dir.path / "web.trace") == trace_after_deploy);

    auto term = run_cli("--log-dir " + dir.str() + " terminate web");
    REQUIRE(term.exit_code == 0);
    CHECK(term.out.find("\"TERMINATED\"") != std::string::npos);
    CHECK(term.out.find("\"STARTED\"") == std::string::npos);

    // the trace now extends the deploy-time trace with teardown records
    std::string trace_after_term = slurp(dir.path / "web.trace");
    CHECK(trace_after_term.find(trace_after_deploy.substr(0, trace_after_deploy.size() - 1))
          == 0);
    CHECK(trace_after_term.size() > trace_after_deploy.size());
    CHECK(trace_after_term.find("\"to\":\"TERMINATED\"") != std::string::npos);

    // status after terminate reports the torn-down tree
    auto st2 = run_cli("--log-dir " + dir.str() + " status web");
    REQUIRE(st2.exit_code == 0);
    CHECK(st2.out.find("\"TERMINATED\"") != std::string::npos);
}

TEST_CASE("deploy with a market fleet places the lease and pays the provider") {
    TempDir dir;
    std::string f = (kRepo / "descriptors" / "market_single.sd").string();
    auto dep = run_cli("--log-dir " + dir.str() + " deploy " + f +
                       " --id mkt --market --host h1:1:4096 --run-for 5");
    INFO(dep.err);
    REQUIRE(dep.exit_code == 0);
    CHECK(dep.out.find("\"host\": \"h1\"") != std::string::npos);

    // the session log carries the settlement for the lease
    std::string log = slurp(dir.path / "mkt.log");
    CHECK(log.find("bank.settle") != std::string::npos);
    CHECK(log.find("\"bidder\":\"alice\"") != std::string::npos);

    auto term = run_cli("--log-dir " + dir.str() + " terminate mkt");
    REQUIRE(term.exit_code == 0);
    CHECK(term.out.find("\"TERMINATED\"") != std::string::npos);
}

TEST_CASE("deploy of a failing descriptor exits 1 and leaves the trace") {
    TempDir dir;
    std::string f = (kRepo / "descriptors" / "failing_deploy.sd").string();
    auto dep = run_cli("--log-dir " + dir.str() + " deploy " + f + " --id doomed");
    CHECK(dep.exit_code == 1);
    CHECK(dep.out.find("\"FAILED\"") != std::string::npos);
    CHECK(fs::exists(dir.path / "doomed.trace"));
    std::string trace = slurp(dir.path / "doomed.trace");
    CHECK(trace.find("\"to\":\"FAILED\"") != std::string::npos);
}

TEST_CASE("status of an unknown deployment exits 2") {
    TempDir dir;
    auto r = run_cli("--log-dir " + dir.str() + " status ghost");
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("ghost") != std::string::npos);
}

TEST_CASE("daemon auctioneer without capacity flags exits 2 with usage text") {
    auto r = run_cli("daemon auctioneer --listen 127.0.0.1:19999");
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("required") != std::string::npos);
}

TEST_CASE("unknown subcommand exits 2") {
    auto r = run_cli("conquer");
    CHECK(r.exit_code == 2);
}

TEST_CASE("settings resolve flag over environment over config file") {
    TempDir dir;
    std::string scn = (kRepo / "scenarios" / "adjust_nobank.scn").string();

    // environment beats the default
    auto env_run = run_cli("--log-dir " + dir.str() + " scenario run " + scn,
                           "AGORA_SEED=7 ");
    REQUIRE(env_run.exit_code == 0);
    CHECK(env_run.out.find("seed 7") != std::string::npos);

    // flag beats the environment
    auto flag_run = run_cli("--log-dir " + dir.str() + " --seed 9 scenario run " + scn,
                            "AGORA_SEED=7 ");
    REQUIRE(flag_run.exit_code == 0);
    CHECK(flag_run.out.find("seed 9") != std::string::npos);

    // config file beats the default and is itself beaten by the environment
    std::ofstream cfg(dir.path / "conf.json");
    cfg << "{\"seed\": 5}\n";
    cfg.close();
    auto cfg_run = run_cli("--log-dir " + dir.str() + " --config " +
                           (dir.path / "conf.json").string() + " scenario run " + scn);
    REQUIRE(cfg_run.exit_code == 0);
    CHECK(cfg_run.out.find("seed 5") != std::string::npos);

    auto env_over_cfg = run_cli("--log-dir " + dir.str() + " --config " +
                                    (dir.path / "conf.json").string() + " scenario run " +
                                    scn,
                                "AGORA_SEED=7 ");
    REQUIRE(env_over_cfg.exit_code == 0);
    CHECK(env_over_cfg.out.find("seed 7") != std::string::npos);
}

// ---------------------------------------------------------------------------
// Wall-clock transport: three services and a client in one process, each on
// its own HTTP endpoint, no virtual clock anywhere.

TEST_CASE("wall-clock mesh grants a bid across HTTP endpoints") {
    std::map<std::string, std::string> routes{
        {"bank", "127.0.0.1:18761"},
        {"sls", "127.0.0.1:18762"},
        {"auc:h1", "127.0.0.1:18763"},
        {"client:alice", "127.0.0.1:18764"},
        {"trace", "127.0.0.1:18764"},
    };

    agora::WallBus bank_bus("127.0.0.1", 18761, routes);
    agora::Bank bank(bank_bus, Credit::parse("100000.00"));
    bank.open_account("alice", Credit::parse("1000.00"));
    bank.open_account("provider", Credit{});
    bank_bus.attach("bank", &bank);

    agora::WallBus sls_bus("127.0.0.1", 18762, routes);
    agora::Directory dir(sls_bus, 30.0);
    sls_bus.attach("sls", &dir);

    agora::WallBus auc_bus("127.0.0.1", 18763, routes);
    agora::SimHost host(auc_bus, "h1", {1.0, 4096});
    agora::AuctioneerConfig cfg;
    cfg.provider_account = "provider";
    cfg.heartbeat_interval = 0.5;
    cfg.boot_delay = 0.1;
    agora::Auctioneer auc(auc_bus, host, cfg);
    auc_bus.attach("auc:h1", &auc);

    agora::WallBus client_bus("127.0.0.1", 18764, routes);
    struct CaptureTrace : agora::Service {
        std::mutex mu;
        std::vector<std::string> notices;
        void on_message(const agora::Envelope& env) override {
            std::lock_guard<std::mutex> lk(mu);
            notices.push_back(env.msg_type + " " + env.body.dump());
        }
    } trace;
    client_bus.attach("trace", &trace);
    agora::BidderAgent::Options opt;
    opt.amount = Credit::parse("50.00");
    opt.duration = 30;
    opt.spec.memory = 256;
    agora::BidderAgent agent(client_bus, "alice", opt);
    client_bus.attach("client:alice", &agent);

    // All service work must happen on the owning bus thread; the main thread
    // only schedules the kickoffs and waits on an atomic completion flag.
    std::atomic<bool> finished{false};
    auc_bus.schedule_in(0, [&] { auc.start(); });
    // let the first heartbeat populate the directory before the query
    client_bus.schedule_in(0.8, [&] { agent.run(); });
    std::function<void()> watch = [&] {
        if (agent.done()) finished = true;
        else client_bus.schedule_in(0.05, watch);
    };
    client_bus.schedule_in(0.9, watch);

    std::thread tb([&] { bank_bus.run(); });
    std::thread ts([&] { sls_bus.run(); });
    std::thread ta([&] { auc_bus.run(); });
    std::thread tc([&] { client_bus.run(); });

    for (int i = 0; i < 100 && !finished; ++i)
        std::this_thread::sleep_for(std::chrono::milliseconds(50));

    std::string noticed;
    {
        std::lock_guard<std::mutex> lk(trace.mu);
        for (const auto& n : trace.notices) noticed += n + "\n";
    }
    INFO(noticed);
    CHECK(finished);
    CHECK(agent.vm_id() == "vm-h1-1");
    CHECK(noticed.find("client.granted") != std::string::npos);
    CHECK(!agent.bid_id().empty());
    CHECK(bank.balance("alice") == Credit::parse("950.00"));
    CHECK(bank.balance("provider") == Credit::parse("50.00"));

    bank_bus.stop();
    sls_bus.stop();
    auc_bus.stop();
    client_bus.stop();
    tb.join();
    ts.join();
    ta.join();
    tc.join();
}
