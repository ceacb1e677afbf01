#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "agora/bidder.hpp"
#include "agora/bus.hpp"
#include "agora/common.hpp"
#include "agora/desc/ast.hpp"
#include "agora/desc/resolve.hpp"
#include "agora/directory.hpp"
#include "agora/simhost.hpp"

namespace agora {

// ---------------------------------------------------------------------------
// Node model
// ---------------------------------------------------------------------------

enum class NodeKind { Compound, StorageBackend, Domain, MarketDomain };
enum class NodeState { Init, Deployed, Started, Terminated, Failed };

inline const char* to_string(NodeKind k) {
    switch (k) {
        case NodeKind::Compound: return "COMPOUND";
        case NodeKind::StorageBackend: return "STORAGE_BACKEND";
        case NodeKind::Domain: return "DOMAIN";
        case NodeKind::MarketDomain: return "MARKET_DOMAIN";
    }
    return "?";
}

inline const char* to_string(NodeState s) {
    switch (s) {
        case NodeState::Init: return "INIT";
        case NodeState::Deployed: return "DEPLOYED";
        case NodeState::Started: return "STARTED";
        case NodeState::Terminated: return "TERMINATED";
        case NodeState::Failed: return "FAILED";
    }
    return "?";
}

inline NodeKind node_kind_of(const desc::Component& c) {
    std::string cls = c.get_string(desc::kClassAttr, "Compound");
    if (cls == "Compound") return NodeKind::Compound;
    if (cls == "StorageBackend") return NodeKind::StorageBackend;
    if (cls == "Domain") return NodeKind::Domain;
    if (cls == "MarketDomain") return NodeKind::MarketDomain;
    fail("bad_descriptor", "unknown sfClass: " + cls);
}

// The only legal edges: INIT->DEPLOYED->STARTED->TERMINATED along the happy
// path, any live state may FAIL, and FAILED is cleaned up by termination.
inline bool legal_transition(NodeState from, NodeState to) {
    switch (to) {
        case NodeState::Init: return false;
        case NodeState::Deployed: return from == NodeState::Init;
        case NodeState::Started: return from == NodeState::Deployed;
        case NodeState::Terminated:
            return from == NodeState::Deployed || from == NodeState::Started ||
                   from == NodeState::Failed;
        case NodeState::Failed:
            return from == NodeState::Init || from == NodeState::Deployed ||
                   from == NodeState::Started;
    }
    return false;
}

struct TransitionRecord {
    double at = 0;
    std::string path;
    NodeState from = NodeState::Init;
    NodeState to = NodeState::Init;

    Json to_json() const {
        return Json{{"at", at}, {"from", to_string(from)}, {"path", path}, {"to", to_string(to)}};
    }
};

struct LifecycleNode {
    std::string name;
    std::string path;                // "sfConfig/store"
    std::vector<std::string> down;   // child names below the root
    NodeKind kind = NodeKind::Compound;
    NodeState state = NodeState::Init;
    desc::Component* desc = nullptr;
    LifecycleNode* parent = nullptr;
    std::vector<std::unique_ptr<LifecycleNode>> children;

    // Runtime bindings.
    std::string host_id;
    std::string vm_id;
    std::string image_token;
    std::string pre_deploy_snapshot;
    std::string bid_id;
    double lease_placed_at = 0;
    double ping_wait_begin = 0;
    bool monitoring = false;   // a ping loop is armed
    bool tearing = false;      // a teardown sweep covers this subtree
    bool finishing = false;    // this node's terminate step already ran
    uint64_t ping_epoch = 0;   // invalidates stale scheduled pings
    std::string note;          // last error or info, for status output
};

// ---------------------------------------------------------------------------
// Engine configuration
// ---------------------------------------------------------------------------

struct EngineConfig {
    double prepare_delay = 1.0;   // backend image preparation time
    double cleanup_delay = 0.5;   // backend restore time
    double boot_delay = 5.0;      // boot time for engine-created VMs
    double ping_interval = 2.0;   // default, per-node attribute override
    double boot_timeout = 60.0;   // default, per-node attribute override
    std::string sls = "sls";
    std::string trace = "trace";
};

// ---------------------------------------------------------------------------
// Deployment: the lifecycle engine for one resolved descriptor tree.
//
// deploy   — sequential pre-order; storage back-ends snapshot the host and
//            prepare an image token; market leases are bought here so the
//            vm is bound before any domain starts watching it.
// start    — pre-order initiation; parents gate children, siblings run
//            concurrently; domains ping their VM until it runs.
// terminate— reverse deploy order (children before parents); back-ends
//            restore the host to its recorded snapshot.
//
// Keep the instance alive until the clock drains: scheduled pings and
// delays capture `this`.
// ---------------------------------------------------------------------------

class Deployment : public ServiceBase {
public:
    using Done = std::function<void(bool)>;

    Deployment(Context& ctx, HostRegistry& hosts, std::string id, desc::Component root,
               EngineConfig cfg = {})
        : ServiceBase(ctx, "lc:" + id),
          hosts_(hosts),
          id_(std::move(id)),
          root_desc_(std::make_unique<desc::Component>(std::move(root))),
          cfg_(cfg) {
        root_ = build(nullptr, desc::kRootName, *root_desc_, {});
    }

    LifecycleNode* root() { return root_.get(); }
    const std::string& id() const { return id_; }
    const std::vector<TransitionRecord>& trace() const { return trace_; }

    LifecycleNode* find(const std::string& path) {
        LifecycleNode* out = nullptr;
        walk(root_.get(), [&](LifecycleNode* n) {
            if (n->path == path) out = n;
        });
        return out;
    }

    Json status() {
        Json nodes = Json::array();
        walk(root_.get(), [&](LifecycleNode* n) {
            Json j{{"kind", to_string(n->kind)},
                   {"path", n->path},
                   {"state", to_string(n->state)}};
            if (!n->host_id.empty()) j["host"] = n->host_id;
            if (!n->vm_id.empty()) j["vm"] = n->vm_id;
            if (!n->bid_id.empty()) j["bid"] = n->bid_id;
            if (!n->note.empty()) j["note"] = n->note;
            nodes.push_back(std::move(j));
        });
        return Json{{"id", id_}, {"nodes", std::move(nodes)}};
    }

    // Deploys the whole tree, parents before children. On the first failure
    // the failing node and its ancestors are FAILED and every node already
    // deployed is terminated in reverse order.
    void deploy(Done done) {
        if (op_active_) {
            done(false);
            return;
        }
        if (root_->state != NodeState::Init) {
            root_->note = "already deployed";
            done(false);
            return;
        }
        op_active_ = true;
        auto order = std::make_shared<std::vector<LifecycleNode*>>(preorder(root_.get()));
        deploy_step(order, 0, std::move(done));
    }

    // Starts the whole tree. Parents start before their children; sibling
    // subtrees proceed concurrently, so two compounds' starts interleave
    // while each keeps its internal order.
    void start(Done done) {
        if (op_active_) {
            done(false);
            return;
        }
        bool all_deployed = true;
        walk(root_.get(), [&](LifecycleNode* n) {
            if (n->state != NodeState::Deployed) all_deployed = false;
        });
        if (!all_deployed) {
            root_->note = "start requires a fully deployed tree";
            done(false);
            return;
        }
        op_active_ = true;
        start_done_ = std::move(done);
        launching_ = true;
        launch_start(root_.get());
        launching_ = false;
        check_start_done();
    }

    // Terminates the whole tree, children before parents (reverse deploy
    // order). Valid from any state; INIT nodes are left untouched and a
    // fully-INIT tree is a no-op. Individual failures are noted and do not
    // halt the sweep.
    void terminate(Done done) {
        if (op_active_) {
            done(false);
            return;
        }
        op_active_ = true;
        teardown(root_.get(), [this, done = std::move(done)]() {
            op_active_ = false;
            done(true);
        });
    }

protected:
    void handle(const Envelope& env) override {
        try {
            if (env.msg_type == "lc.status") {
                reply(env, status());
            } else if (env.msg_type == "lc.terminate") {
                Envelope req = env;
                terminate([this, req](bool ok) { reply(req, Json{{"ok", ok}}); });
            } else {
                reply_error(env, "bad_request", "unknown message type: " + env.msg_type);
            }
        } catch (const Error& e) {
            reply_error(env, e.code(), e.what());
        }
    }

private:
    // -- tree construction --------------------------------------------------

    std::unique_ptr<LifecycleNode> build(LifecycleNode* parent, const std::string& name,
                                         desc::Component& c, std::vector<std::string> down) {
        auto n = std::make_unique<LifecycleNode>();
        n->name = name;
        n->path = parent ? parent->path + "/" + name : name;
        n->down = down;
        n->kind = node_kind_of(c);
        n->desc = &c;
        n->parent = parent;
        for (auto& e : c.entries) {
            if (!e.value.is_component()) continue;
            auto child_down = down;
            child_down.push_back(e.name);
            n->children.push_back(
                build(n.get(), e.name, *e.value.as_component(), std::move(child_down)));
        }
        return n;
    }

    void walk(LifecycleNode* n, const std::function<void(LifecycleNode*)>& fn) {
        fn(n);
        for (auto& c : n->children) walk(c.get(), fn);
    }

    std::vector<LifecycleNode*> preorder(LifecycleNode* top) {
        std::vector<LifecycleNode*> out;
        walk(top, [&](LifecycleNode* n) { out.push_back(n); });
        return out;
    }

    // -- transitions ---------------------------------------------------------

    void transition(LifecycleNode& n, NodeState to) {
        NodeState from = n.state;
        if (!legal_transition(from, to))
            fail("bad_transition",
                 n.path + ": illegal transition " + std::string(to_string(from)) + " -> " +
                     to_string(to));
        n.state = to;
        trace_.push_back(TransitionRecord{ctx_.now(), n.path, from, to});
        notify(cfg_.trace, "lc.transition",
               Json{{"deployment", id_},
                    {"from", to_string(from)},
                    {"path", n.path},
                    {"to", to_string(to)}});
    }

    // -- deploy --------------------------------------------------------------

    void deploy_step(std::shared_ptr<std::vector<LifecycleNode*>> order, size_t i, Done done) {
        if (i == order->size()) {
            op_active_ = false;
            done(true);
            return;
        }
        LifecycleNode* n = (*order)[i];
        auto next = [this, order, i, done](bool ok) {
            if (ok)
                deploy_step(order, i + 1, done);
            else
                deploy_abort(order, i, done);
        };
        try {
            // Bind this node's symbolic values against the live tree: lazy
            // references see everything earlier deploys have written.
            desc::resolve_lazy_node(*root_desc_, n->down);
            switch (n->kind) {
                case NodeKind::Compound:
                    transition(*n, NodeState::Deployed);
                    next(true);
                    return;
                case NodeKind::Domain:
                    if (n->desc->get_number("ping_interval", cfg_.ping_interval) <= 0)
                        fail("bad_descriptor", n->path + ": ping_interval must be > 0");
                    if (n->desc->get_number("boot_timeout", cfg_.boot_timeout) <= 0)
                        fail("bad_descriptor", n->path + ": boot_timeout must be > 0");
                    transition(*n, NodeState::Deployed);
                    next(true);
                    return;
                case NodeKind::StorageBackend:
                    deploy_backend(n, next);
                    return;
                case NodeKind::MarketDomain:
                    deploy_market(n, next);
                    return;
            }
        } catch (const Error& e) {
            n->note = e.what();
            next(false);
        }
    }

    // Snapshot first, then prepare the backing image: the snapshot is the
    // restoration oracle for terminate.
    void deploy_backend(LifecycleNode* n, std::function<void(bool)> next) {
        std::string host_id = n->desc->get_string("host");
        SimHost* host = hosts_.find(host_id);
        if (!host) {
            n->note = "unknown host: " + host_id;
            next(false);
            return;
        }
        n->host_id = host_id;
        n->pre_deploy_snapshot = host->snapshot();
        n->image_token = n->desc->get_string("image") + "@" + n->path;
        host->add_image(n->image_token);
        ctx_.schedule_in(cfg_.prepare_delay, [this, n, next]() {
            transition(*n, NodeState::Deployed);
            next(true);
        });
    }

    // Market placement: pick the cheapest affordable host from the ranked
    // directory answer, then buy the lease. The granted vm is bound onto
    // this node so descendant domains can watch it.
    void deploy_market(LifecycleNode* n, std::function<void(bool)> next) {
        BidPolicy policy;
        policy.target_share = n->desc->get_number("target_share", 0.5);
        policy.planned_duration = n->desc->get_number("duration", 100.0);
        std::string budget = n->desc->get_string("budget", "");
        if (!budget.empty()) policy.budget = Credit::parse(budget);
        std::string account = n->desc->get_string("account");
        VmSpec spec = vm_spec_of(*n->desc);

        request(cfg_.sls, "sls.query", Json{{"limit", 100}},
                [this, n, next, policy, account, spec](const Envelope& r) {
                    try {
                        if (r.is_error()) {
                            n->note = "directory query failed: " + r.error_code();
                            next(false);
                            return;
                        }
                        std::vector<HostRecord> ranked;
                        for (const auto& h : r.body.at("hosts"))
                            ranked.push_back(HostRecord::from_json(h));
                        auto chosen = select_host(ranked, policy, spec);
                        if (!chosen) {
                            n->note = "no affordable host";
                            next(false);
                            return;
                        }
                        double competing = chosen->price * chosen->cpu_capacity;
                        Credit amount = amount_for_target(policy.target_share, competing,
                                                          policy.planned_duration);
                        std::string bid_id = "bid-" + id_ + "-" + std::to_string(++bid_seq_);
                        Json body{{"amount", amount.str()},
                                  {"bid_id", bid_id},
                                  {"bidder", account},
                                  {"duration", policy.planned_duration},
                                  {"spec", spec.to_json()}};
                        std::string host_id = chosen->host_id;
                        request(chosen->address, "auc.submit", std::move(body),
                                [this, n, next, host_id, bid_id](const Envelope& g) {
                                    try {
                                        if (g.is_error()) {
                                            n->note = "bid refused: " + g.error_code();
                                            next(false);
                                            return;
                                        }
                                        n->host_id = host_id;
                                        n->bid_id = bid_id;
                                        n->vm_id = g.body.at("vm_id").get<std::string>();
                                        n->lease_placed_at =
                                            g.body.at("placed_at").get<double>();
                                        n->desc->set("vm", desc::Value(n->vm_id));
                                        n->desc->set("vm_host", desc::Value(host_id));
                                        transition(*n, NodeState::Deployed);
                                        next(true);
                                    } catch (const std::exception& e) {
                                        n->note = e.what();
                                        next(false);
                                    }
                                });
                    } catch (const std::exception& e) {
                        n->note = e.what();
                        next(false);
                    }
                });
    }

    // First failure wins: the failing node and its ancestors are FAILED,
    // everything already deployed is terminated in reverse deploy order,
    // and untouched nodes stay INIT.
    void deploy_abort(std::shared_ptr<std::vector<LifecycleNode*>> order, size_t failed_idx,
                      Done done) {
        LifecycleNode* failed = (*order)[failed_idx];
        transition(*failed, NodeState::Failed);
        notify(cfg_.trace, "lc.deploy_failed",
               Json{{"deployment", id_}, {"note", failed->note}, {"path", failed->path}});
        for (LifecycleNode* a = failed->parent; a; a = a->parent)
            if (a->state == NodeState::Deployed) transition(*a, NodeState::Failed);

        auto deployed = std::make_shared<std::vector<LifecycleNode*>>();
        for (size_t j = failed_idx; j-- > 0;)
            if ((*order)[j]->state == NodeState::Deployed) deployed->push_back((*order)[j]);
        terminate_list(deployed, 0, [this, done]() {
            op_active_ = false;
            done(false);
        });
    }

    // -- start ---------------------------------------------------------------

    void launch_start(LifecycleNode* n) {
        if (n->state != NodeState::Deployed) return;  // torn down mid-cascade
        try {
            switch (n->kind) {
                case NodeKind::Compound:
                case NodeKind::MarketDomain:
                    // A market lease is already running: deploy bought it.
                    transition(*n, NodeState::Started);
                    node_started(n);
                    return;
                case NodeKind::StorageBackend:
                    start_backend(n);
                    return;
                case NodeKind::Domain:
                    start_domain(n);
                    return;
            }
        } catch (const Error& e) {
            n->note = e.what();
            start_failure(n);
        }
    }

    void node_started(LifecycleNode* n) {
        for (auto& c : n->children) launch_start(c.get());
        check_start_done();
    }

    // Boots the VM and binds it where descendants expect it: on the parent
    // when the back-end serves a surrounding compound, on itself when it is
    // the root.
    void start_backend(LifecycleNode* n) {
        SimHost& host = hosts_.require(n->host_id);
        VmSpec spec = vm_spec_of(*n->desc);
        double boot = n->desc->get_number("boot_delay", cfg_.boot_delay);
        n->vm_id = host.create_vm(spec, boot);
        LifecycleNode* carrier = n->parent ? n->parent : n;
        carrier->desc->set("vm", desc::Value(n->vm_id));
        carrier->desc->set("vm_host", desc::Value(n->host_id));
        transition(*n, NodeState::Started);
        node_started(n);
    }

    // The domain pings its VM until it runs (then keeps watching liveness).
    // STARTED lands on the first ping at or after the boot completes.
    void start_domain(LifecycleNode* n) {
        n->ping_wait_begin = ctx_.now();
        n->monitoring = true;
        ping(n, ++n->ping_epoch);
    }

    void ping(LifecycleNode* n, uint64_t epoch) {
        if (epoch != n->ping_epoch) return;
        if (n->state != NodeState::Deployed && n->state != NodeState::Started) return;

        VmBinding b = find_binding(n);
        SimHost* host = b.host_id.empty() ? nullptr : hosts_.find(b.host_id);
        const VmInstance* vm =
            (host && !b.vm_id.empty()) ? host->find_vm(b.vm_id) : nullptr;
        double interval = n->desc->get_number("ping_interval", cfg_.ping_interval);

        if (n->state == NodeState::Deployed) {
            // Waiting for boot: a live answer wins over a simultaneous
            // timeout; silence past boot_timeout fails the start.
            if (vm && vm->state == VmState::Running) {
                transition(*n, NodeState::Started);
                node_started(n);
            } else if (ctx_.now() - n->ping_wait_begin >=
                       n->desc->get_number("boot_timeout", cfg_.boot_timeout)) {
                n->note = "boot timeout";
                start_failure(n);
                return;
            }
        } else {
            if (!vm || vm->state == VmState::Dead) {
                on_vm_death(n, b);
                return;
            }
        }
        ctx_.schedule_in(interval, [this, n, epoch]() { ping(n, epoch); });
    }

    // A start failure fails the node, then tears down the enclosing
    // compound (or just this subtree when the parent is not a compound).
    void start_failure(LifecycleNode* n) {
        n->monitoring = false;
        n->ping_epoch++;
        transition(*n, NodeState::Failed);
        notify(cfg_.trace, "lc.start_failed",
               Json{{"deployment", id_}, {"note", n->note}, {"path", n->path}});
        LifecycleNode* target =
            (n->parent && n->parent->kind == NodeKind::Compound) ? n->parent : n;
        teardown(target, [this]() { check_start_done(); });
    }

    void check_start_done() {
        if (launching_ || !start_done_ || teardowns_ > 0) return;
        bool waiting = false;
        bool all_started = true;
        walk(root_.get(), [&](LifecycleNode* n) {
            if (n->state == NodeState::Deployed && n->monitoring) waiting = true;
            if (n->state != NodeState::Started) all_started = false;
        });
        if (waiting) return;
        auto done = std::move(start_done_);
        start_done_ = nullptr;
        op_active_ = false;
        done(all_started);
    }

    // -- liveness and death --------------------------------------------------

    struct VmBinding {
        std::string vm_id;
        std::string host_id;
    };

    // The VM a domain watches: its own `vm` attribute or the nearest
    // ancestor's (back-ends and market leases bind theirs at deploy/start).
    VmBinding find_binding(LifecycleNode* n) {
        for (LifecycleNode* c = n; c; c = c->parent) {
            std::string vm = c->desc->get_string("vm", "");
            if (!vm.empty())
                return {vm, c->desc->get_string("vm_host", c->desc->get_string("host", ""))};
        }
        return {};
    }

    // Death path: remove the corpse, notify upward, then tear down the
    // enclosing compound — a dead member means the whole group is replaced,
    // and the back-end restore brings the host back to its clean state.
    // A non-compound parent only loses the domain subtree.
    void on_vm_death(LifecycleNode* n, const VmBinding& b) {
        if (n->state != NodeState::Started) return;
        n->monitoring = false;
        n->ping_epoch++;
        if (SimHost* host = hosts_.find(b.host_id))
            if (host->has_vm(b.vm_id)) host->remove_vm(b.vm_id);
        transition(*n, NodeState::Failed);
        n->note = "vm died: " + b.vm_id;
        notify(cfg_.trace, "lc.vm_death",
               Json{{"deployment", id_},
                    {"parent", n->parent ? n->parent->path : ""},
                    {"path", n->path},
                    {"vm_id", b.vm_id}});
        LifecycleNode* target =
            (n->parent && n->parent->kind == NodeKind::Compound) ? n->parent : n;
        teardown(target, [this]() { check_start_done(); });
    }

    // -- terminate -----------------------------------------------------------

    // Tears down `top`'s subtree in reverse deploy order. Re-entry while a
    // sweep already covers the subtree is a no-op (death during teardown).
    void teardown(LifecycleNode* top, std::function<void()> after) {
        if (top->tearing) {
            after();
            return;
        }
        top->tearing = true;
        ++teardowns_;
        auto order = preorder(top);
        auto list = std::make_shared<std::vector<LifecycleNode*>>(order.rbegin(), order.rend());
        terminate_list(list, 0, [this, top, after = std::move(after)]() {
            top->tearing = false;
            --teardowns_;
            notify(cfg_.trace, "lc.teardown_complete",
                   Json{{"deployment", id_}, {"path", top->path}});
            after();
        });
    }

    void terminate_list(std::shared_ptr<std::vector<LifecycleNode*>> list, size_t i,
                        std::function<void()> after) {
        if (i == list->size()) {
            after();
            return;
        }
        LifecycleNode* n = (*list)[i];
        auto next = [this, list, i, after]() { terminate_list(list, i + 1, after); };
        try {
            terminate_node(n, next);
        } catch (const Error& e) {
            // Individual terminate failures are noted, never fatal.
            n->note = e.what();
            notify(cfg_.trace, "lc.terminate_error",
                   Json{{"deployment", id_}, {"note", n->note}, {"path", n->path}});
            next();
        }
    }

    void terminate_node(LifecycleNode* n, std::function<void()> next) {
        // Untouched nodes stay INIT; overlapping sweeps (a death teardown
        // racing a scripted terminate) run each node's step exactly once.
        if (n->state == NodeState::Init || n->state == NodeState::Terminated || n->finishing) {
            next();
            return;
        }
        n->finishing = true;
        n->monitoring = false;
        n->ping_epoch++;
        switch (n->kind) {
            case NodeKind::Compound:
            case NodeKind::Domain:
                transition(*n, NodeState::Terminated);
                next();
                return;
            case NodeKind::StorageBackend:
                terminate_backend(n, std::move(next));
                return;
            case NodeKind::MarketDomain:
                terminate_market(n, std::move(next));
                return;
        }
    }

    // Restores the host: the VM goes away, the image token is released, and
    // after the cleanup delay the ledger matches the pre-deploy snapshot.
    void terminate_backend(LifecycleNode* n, std::function<void()> next) {
        SimHost* host = hosts_.find(n->host_id);
        if (host) {
            if (!n->vm_id.empty()) host->terminate_vm(n->vm_id);
            if (!n->image_token.empty()) host->remove_image(n->image_token);
        }
        LifecycleNode* carrier = n->parent ? n->parent : n;
        if (carrier->desc->get_string("vm", "") == n->vm_id && !n->vm_id.empty())
            carrier->desc->set("vm", desc::Value(std::string()));
        ctx_.schedule_in(cfg_.cleanup_delay, [this, n, next]() {
            transition(*n, NodeState::Terminated);
            next();
        });
    }

    // Cancels the lease by shrinking it to nearly over: the auctioneer's
    // own expiry terminates the VM and frees the memory shortly after. The
    // second of slack must exceed the link latency, or the adjustment
    // arrives for a lease that is already finished and is refused.
    void terminate_market(LifecycleNode* n, std::function<void()> next) {
        if (n->bid_id.empty()) {
            transition(*n, NodeState::Terminated);
            next();
            return;
        }
        double elapsed = ctx_.now() - n->lease_placed_at;
        Json body{{"bid_id", n->bid_id}, {"new_duration", elapsed + 1.0}};
        request("auc:" + n->host_id, "auc.adjust", std::move(body),
                [this, n, next](const Envelope& r) {
                    // An unknown bid just means the lease already expired.
                    if (r.is_error() && r.error_code() != "unknown_bid")
                        n->note = "lease cancel failed: " + r.error_code();
                    transition(*n, NodeState::Terminated);
                    next();
                });
    }

    // -- shared helpers --------------------------------------------------------

    static VmSpec vm_spec_of(const desc::Component& c) {
        VmSpec spec;
        spec.vcpus = c.get_int("vcpus", 1);
        spec.memory = c.get_int("memory", 0);
        spec.image = c.get_string("image", "default");
        spec.disk = c.get_int("disk", 1024);
        spec.swap = c.get_int("swap", 0);
        spec.validate();
        return spec;
    }

    HostRegistry& hosts_;
    std::string id_;
    std::unique_ptr<desc::Component> root_desc_;
    EngineConfig cfg_;
    std::unique_ptr<LifecycleNode> root_;
    std::vector<TransitionRecord> trace_;

    bool op_active_ = false;
    bool launching_ = false;
    Done start_done_;
    int teardowns_ = 0;
    uint64_t bid_seq_ = 0;
};

}  // namespace agora
