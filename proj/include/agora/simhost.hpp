#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "agora/bus.hpp"
#include "agora/market.hpp"
#include "agora/wire.hpp"

namespace agora {

struct VmSpec {
    int vcpus = 1;
    int64_t memory = 0;  // MiB
    std::string image = "default";
    int64_t disk = 1024;  // MiB
    int64_t swap = 0;     // MiB

    void validate() const {
        if (vcpus <= 0) fail("bad_vm_spec", "vcpus must be positive");
        if (memory <= 0) fail("bad_vm_spec", "memory must be positive");
        if (disk <= 0) fail("bad_vm_spec", "disk must be positive");
        if (swap < 0) fail("bad_vm_spec", "swap must be >= 0");
        if (image.empty()) fail("bad_vm_spec", "image name required");
    }

    Json to_json() const {
        return Json{{"vcpus", vcpus}, {"memory", memory}, {"image", image},
                    {"disk", disk},   {"swap", swap}};
    }

    static VmSpec from_json(const Json& j) {
        VmSpec s;
        s.vcpus = j.value("vcpus", 1);
        s.memory = j.value("memory", int64_t{0});
        s.image = j.value("image", std::string("default"));
        s.disk = j.value("disk", int64_t{1024});
        s.swap = j.value("swap", int64_t{0});
        return s;
    }
};

enum class VmState { Provisioning, Booting, Running, Terminating, Dead };

inline const char* to_string(VmState s) {
    switch (s) {
        case VmState::Provisioning: return "PROVISIONING";
        case VmState::Booting: return "BOOTING";
        case VmState::Running: return "RUNNING";
        case VmState::Terminating: return "TERMINATING";
        case VmState::Dead: return "DEAD";
    }
    return "?";
}

struct VmInstance {
    std::string vm_id;
    std::string host_id;
    VmSpec spec;
    VmState state = VmState::Provisioning;
    double cpu_rate = 0;       // CPU units currently granted
    double accumulated = 0;    // integrated CPU-seconds while RUNNING
    double last_sync = 0;
    uint64_t epoch = 0;        // guards stale boot events
};

// A simulated machine: a memory ledger, an image-token store standing in
// for prepared filesystems, and a VM table whose CPU work is integrated
// piecewise-constant over virtual time.
class SimHost {
public:
    using VmEventFn = std::function<void(const VmInstance&, VmState old_state)>;

    SimHost(Context& ctx, std::string host_id, HostCapacity capacity)
        : ctx_(ctx), host_id_(std::move(host_id)), capacity_(capacity) {
        if (!(capacity_.cpu_capacity > 0)) fail("bad_capacity", "cpu capacity must be > 0");
        if (capacity_.memory_total <= 0) fail("bad_capacity", "memory must be > 0");
    }

    const std::string& id() const { return host_id_; }
    const HostCapacity& capacity() const { return capacity_; }

    int64_t memory_reserved() const {
        int64_t total = 0;
        for (auto& [id, vm] : vms_) total += vm.spec.memory;
        return total;
    }
    int64_t memory_free() const { return capacity_.memory_total - memory_reserved(); }

    // Boots a VM: memory is reserved whole for the VM's lifetime; the VM
    // reaches RUNNING after boot_delay virtual seconds.
    std::string create_vm(const VmSpec& spec, double boot_delay) {
        spec.validate();
        if (spec.memory > memory_free())
            fail("insufficient_memory", host_id_ + ": not enough free memory");
        std::string vm_id = "vm-" + host_id_ + "-" + std::to_string(++vm_seq_);
        VmInstance vm;
        vm.vm_id = vm_id;
        vm.host_id = host_id_;
        vm.spec = spec;
        vm.state = VmState::Provisioning;
        vm.last_sync = ctx_.now();
        vms_[vm_id] = vm;
        transition(vms_[vm_id], VmState::Booting);
        uint64_t epoch = vms_[vm_id].epoch;
        ctx_.schedule_in(boot_delay, [this, vm_id, epoch]() {
            auto it = vms_.find(vm_id);
            if (it == vms_.end() || it->second.epoch != epoch) return;
            if (it->second.state == VmState::Booting) transition(it->second, VmState::Running);
        });
        return vm_id;
    }

    void set_cpu_rate(const std::string& vm_id, double rate) {
        VmInstance& vm = require(vm_id);
        sync(vm);
        vm.cpu_rate = rate;
    }

    // Fault-injected death: the VM stops accumulating but its record stays
    // until whoever owns it cleans up.
    void kill_vm(const std::string& vm_id) {
        auto it = vms_.find(vm_id);
        if (it == vms_.end()) fail("unknown_vm", "no such vm: " + vm_id);
        if (it->second.state == VmState::Dead) return;
        sync(it->second);
        it->second.cpu_rate = 0;
        transition(it->second, VmState::Dead);
    }

    // Clean termination: record removed, memory released.
    void terminate_vm(const std::string& vm_id) {
        auto it = vms_.find(vm_id);
        if (it == vms_.end()) return;  // idempotent
        sync(it->second);
        it->second.cpu_rate = 0;
        if (it->second.state != VmState::Dead) {
            transition(it->second, VmState::Terminating);
            transition(it->second, VmState::Dead);
        }
        vms_.erase(it);
    }

    // Removes a dead VM's record without the terminate transitions.
    void remove_vm(const std::string& vm_id) { vms_.erase(vm_id); }

    bool has_vm(const std::string& vm_id) const { return vms_.count(vm_id) > 0; }
    const VmInstance* find_vm(const std::string& vm_id) const {
        auto it = vms_.find(vm_id);
        return it == vms_.end() ? nullptr : &it->second;
    }
    const std::map<std::string, VmInstance>& vms() const { return vms_; }

    double accumulated(const std::string& vm_id) const {
        const VmInstance* vm = find_vm(vm_id);
        if (!vm) fail("unknown_vm", "no such vm: " + vm_id);
        double acc = vm->accumulated;
        if (vm->state == VmState::Running) acc += vm->cpu_rate * (ctx_.now() - vm->last_sync);
        return acc;
    }

    void add_image(const std::string& token) { images_.insert(token); }
    void remove_image(const std::string& token) { images_.erase(token); }
    bool has_image(const std::string& token) const { return images_.count(token) > 0; }

    // Brings every VM's integral up to the current instant.
    void sync_all() {
        for (auto& [id, vm] : vms_) sync(vm);
    }

    // Canonical serialization of the resource ledger; byte-equality of two
    // snapshots is the host-restoration oracle.
    std::string snapshot() {
        sync_all();
        Json vms = Json::object();
        for (auto& [id, vm] : vms_)
            vms[id] = Json{{"memory", vm.spec.memory}, {"state", to_string(vm.state)}};
        Json j{{"cpu_capacity", capacity_.cpu_capacity},
               {"host_id", host_id_},
               {"images", std::vector<std::string>(images_.begin(), images_.end())},
               {"memory_reserved", memory_reserved()},
               {"memory_total", capacity_.memory_total},
               {"vms", vms}};
        return j.dump();
    }

    void observe(VmEventFn fn) { observers_.push_back(std::move(fn)); }

private:
    VmInstance& require(const std::string& vm_id) {
        auto it = vms_.find(vm_id);
        if (it == vms_.end()) fail("unknown_vm", "no such vm: " + vm_id);
        return it->second;
    }

    void sync(VmInstance& vm) {
        double t = ctx_.now();
        if (vm.state == VmState::Running) vm.accumulated += vm.cpu_rate * (t - vm.last_sync);
        vm.last_sync = t;
    }

    void transition(VmInstance& vm, VmState next) {
        sync(vm);
        VmState old = vm.state;
        vm.state = next;
        vm.epoch++;  // invalidates any scheduled boot event for the old state
        for (auto& fn : observers_) fn(vm, old);
    }

    Context& ctx_;
    std::string host_id_;
    HostCapacity capacity_;
    std::map<std::string, VmInstance> vms_;
    std::set<std::string> images_;
    std::vector<VmEventFn> observers_;
    uint64_t vm_seq_ = 0;
};

class HostRegistry {
public:
    SimHost& add(Context& ctx, const std::string& host_id, HostCapacity cap) {
        if (hosts_.count(host_id)) fail("duplicate_host", "host already exists: " + host_id);
        auto host = std::make_unique<SimHost>(ctx, host_id, cap);
        SimHost& ref = *host;
        hosts_[host_id] = std::move(host);
        return ref;
    }

    SimHost* find(const std::string& host_id) {
        auto it = hosts_.find(host_id);
        return it == hosts_.end() ? nullptr : it->second.get();
    }

    SimHost& require(const std::string& host_id) {
        SimHost* h = find(host_id);
        if (!h) fail("unknown_host", "no such host: " + host_id);
        return *h;
    }

    const std::map<std::string, std::unique_ptr<SimHost>>& all() const { return hosts_; }

    void sync_all() {
        for (auto& [id, h] : hosts_) h->sync_all();
    }

private:
    std::map<std::string, std::unique_ptr<SimHost>> hosts_;
};

}  // namespace agora
