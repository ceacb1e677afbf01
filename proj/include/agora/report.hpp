#pragma once

#include <cstdio>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "agora/wire.hpp"

namespace agora {

inline std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

struct RunReport {
    std::string scenario;
    std::string seed;
    double end_at = 0;
    size_t checks = 0;
    size_t failures = 0;
    std::string text;

    bool all_passed() const { return failures == 0; }
};

// Rebuilds a run's report from the canonical message log alone. Everything
// the report states (share timelines, cpu integrals, balances, assertion
// outcomes) is recomputed from log lines, so replaying a log anywhere
// reproduces the report byte for byte.
inline RunReport report_from_log(const std::string& log_text) {
    RunReport rep;
    if (log_text.empty()) return rep;  // empty log, empty report

    struct VmPoint {
        std::string bid_id;
        double share = 0;
        std::string state;
    };
    struct TimelinePoint {
        double at = 0;
        double price = 0;
        std::map<std::string, VmPoint> vms;  // keyed by vm_id
    };
    struct HostAgg {
        double capacity = 1.0;
        std::vector<TimelinePoint> points;
    };

    std::map<std::string, HostAgg> hosts;
    std::map<std::string, std::vector<std::pair<double, std::string>>> balances;
    std::vector<std::string> assert_lines;
    std::map<std::string, std::string> open_req;  // request_id -> account
    std::map<std::string, std::pair<std::string, std::string>> settle_req;

    size_t lineno = 0;
    size_t start = 0;
    while (start < log_text.size()) {
        size_t nl = log_text.find('\n', start);
        if (nl == std::string::npos) nl = log_text.size();
        std::string line = log_text.substr(start, nl - start);
        start = nl + 1;
        ++lineno;
        if (line.empty()) continue;

        Envelope e;
        try {
            e = Envelope::parse_line(line);
        } catch (const std::exception& ex) {
            fail("bad_log", "line " + std::to_string(lineno) + ": " + ex.what());
        }

        if (e.msg_type == "scn.begin") {
            rep.scenario = e.body.value("name", "");
            rep.seed = std::to_string(e.body.value("seed", uint64_t(0)));
        } else if (e.msg_type == "scn.end") {
            rep.end_at = e.body.value("at", e.sent_at);
        } else if (e.msg_type == "scn.assert") {
            bool pass = e.body.value("pass", false);
            ++rep.checks;
            if (!pass) ++rep.failures;
            std::string l = pass ? "PASS " : "FAIL ";
            l += e.body.value("probe", "");
            if (!pass) l += " expected " + e.body.value("expected", "");
            l += " actual " + e.body.value("actual", "");
            assert_lines.push_back(std::move(l));
        } else if (e.msg_type == "sls.register") {
            hosts[e.body.at("host_id").get<std::string>()].capacity =
                e.body.at("cpu_capacity").get<double>();
        } else if (e.msg_type == "sls.heartbeat") {
            TimelinePoint p;
            p.at = e.sent_at;
            p.price = e.body.at("price").get<double>();
            for (const auto& v : e.body.at("vms")) {
                VmPoint vp;
                vp.bid_id = v.at("bid_id").get<std::string>();
                vp.share = v.at("share").get<double>();
                vp.state = v.at("state").get<std::string>();
                p.vms[v.at("vm_id").get<std::string>()] = std::move(vp);
            }
            hosts[e.body.at("host_id").get<std::string>()].points.push_back(std::move(p));
        } else if (e.msg_type == "bank.open") {
            open_req[e.request_id] = e.body.at("account").get<std::string>();
        } else if (e.msg_type == "bank.open.reply" && !e.is_error()) {
            auto it = open_req.find(e.request_id);
            if (it != open_req.end())
                balances[it->second].push_back({e.sent_at, e.body.at("balance").get<std::string>()});
        } else if (e.msg_type == "bank.settle") {
            settle_req[e.request_id] = {e.body.at("bidder").get<std::string>(),
                                        e.body.at("provider").get<std::string>()};
        } else if (e.msg_type == "bank.settle.reply" && !e.is_error()) {
            auto it = settle_req.find(e.request_id);
            if (it != settle_req.end()) {
                balances[it->second.first].push_back(
                    {e.sent_at, e.body.at("bidder_balance").get<std::string>()});
                balances[it->second.second].push_back(
                    {e.sent_at, e.body.at("provider_balance").get<std::string>()});
            }
        }
    }

    // CPU-seconds per vm: share x capacity integrated piecewise-constant
    // between heartbeats, counting only segments that begin RUNNING. Hosts
    // heartbeat at every share change and every vm state change, so the
    // integral is exact, not sampled.
    std::map<std::string, std::map<std::string, double>> cpu;
    for (const auto& [host_id, agg] : hosts) {
        for (size_t i = 0; i < agg.points.size(); ++i) {
            const TimelinePoint& p = agg.points[i];
            double t1 = (i + 1 < agg.points.size()) ? agg.points[i + 1].at : rep.end_at;
            if (t1 > rep.end_at) t1 = rep.end_at;
            for (const auto& [vm_id, vp] : p.vms) {
                double& acc = cpu[host_id][vm_id];
                if (vp.state == "RUNNING" && t1 > p.at) acc += vp.share * agg.capacity * (t1 - p.at);
            }
        }
    }

    std::string out;
    out += "scenario " + rep.scenario + "\n";
    out += "seed " + rep.seed + "\n";
    out += "end " + fmt6(rep.end_at) + "\n";
    out += "checks " + std::to_string(rep.checks) + " failures " + std::to_string(rep.failures) +
           "\n";

    out += "\n[asserts]\n";
    for (const auto& l : assert_lines) out += l + "\n";

    out += "\n[hosts]\n";
    for (const auto& [host_id, agg] : hosts) {
        out += host_id + " capacity " + fmt6(agg.capacity) + "\n";
        for (const auto& p : agg.points) {
            out += "  t " + fmt6(p.at) + " price " + fmt6(p.price);
            for (const auto& [vm_id, vp] : p.vms)
                out += " " + vp.bid_id + "=" + fmt6(vp.share) + ":" + vm_id + ":" + vp.state;
            out += "\n";
        }
    }

    out += "\n[cpu]\n";
    for (const auto& [host_id, vms] : cpu)
        for (const auto& [vm_id, acc] : vms) out += host_id + " " + vm_id + " " + fmt6(acc) + "\n";

    out += "\n[balances]\n";
    for (const auto& [account, points] : balances) {
        for (const auto& [t, bal] : points)
            out += account + " t " + fmt6(t) + " " + bal + "\n";
        out += account + " final " + points.back().second + "\n";
    }

    rep.text = std::move(out);
    return rep;
}

}  // namespace agora
