#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <vector>

#include "agora/common.hpp"

namespace agora {

// Deterministic virtual time. Events fire in (time, insertion order); time
// never goes backward. Everything in scenario mode hangs off this queue.
class VirtualClock {
public:
    double now() const { return now_; }

    void schedule(double at, std::function<void()> fn) {
        if (at < now_) fail("time_travel", "cannot schedule an event in the past");
        queue_.push(Event{at, next_seq_++, std::move(fn)});
    }

    void schedule_in(double delay, std::function<void()> fn) {
        schedule(now_ + delay, std::move(fn));
    }

    // Fires every event due at or before `to`, in order, then rests at `to`.
    // Returns the number of events fired.
    size_t advance_to(double to) {
        if (to < now_) fail("time_travel", "cannot advance the clock backward");
        size_t fired = 0;
        while (!queue_.empty() && queue_.top().at <= to) {
            Event ev = queue_.top();
            queue_.pop();
            now_ = ev.at;
            ev.fn();
            ++fired;
        }
        now_ = to;
        return fired;
    }

    // Flushes events due at the current instant (e.g. zero-latency probes).
    size_t drain() { return advance_to(now_); }

    bool pending() const { return !queue_.empty(); }
    double next_event_at() const { return queue_.empty() ? -1 : queue_.top().at; }

private:
    struct Event {
        double at;
        uint64_t seq;
        std::function<void()> fn;
        bool operator>(const Event& o) const {
            if (at != o.at) return at > o.at;
            return seq > o.seq;
        }
    };

    double now_ = 0;
    uint64_t next_seq_ = 0;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
};

}  // namespace agora
