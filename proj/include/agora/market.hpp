#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "agora/fixed.hpp"

namespace agora {

// A bid commits `amount` credits for `duration` virtual seconds of use.
// The quantity that matters to the auction is the rate amount/duration:
// each bidder's CPU share is its rate over the sum of rates on the host.
struct Bid {
    std::string bid_id;
    std::string bidder;
    Credit amount;
    double duration = 0;   // planned virtual seconds, > 0
    double placed_at = 0;  // virtual timestamp

    double rate() const {
        if (!(duration > 0))
            fail("malformed_bid", "bid " + bid_id + ": duration must be > 0");
        if (amount.is_zero())
            fail("malformed_bid", "bid " + bid_id + ": amount must be > 0");
        return amount.to_real() / duration;
    }

    double expires_at() const { return placed_at + duration; }
};

struct HostCapacity {
    double cpu_capacity = 0;    // abstract CPU units, 1.0 == one core
    int64_t memory_total = 0;   // MiB
};

// bid_id -> share in (0,1]; shares of a non-empty vector sum to 1.
using ShareVector = std::map<std::string, double>;

// A sole bidder against an empty host still has to spend something; this
// is the cheapest expressible rate (one cent per hundred seconds).
inline constexpr double kFloorRate = 0.01;

inline ShareVector compute_shares(const std::vector<Bid>& bids) {
    ShareVector shares;
    double total = 0;
    for (const Bid& b : bids) total += b.rate();
    for (const Bid& b : bids) shares[b.bid_id] = b.rate() / total;
    return shares;
}

// Price of a host: sum of active bid rates per CPU unit. An idle host
// prices at 0 and therefore sorts first in ranked queries.
inline double host_price(const std::vector<Bid>& bids, const HostCapacity& capacity) {
    if (!(capacity.cpu_capacity > 0))
        fail("bad_capacity", "cpu capacity must be > 0");
    double total = 0;
    for (const Bid& b : bids) total += b.rate();
    return total / capacity.cpu_capacity;
}

// Algebraic inverse of compute_shares: the minimal rate r such that
// r / (r + competing_rate) >= target_share.
inline double required_rate_for_share(double target_share, double competing_rate) {
    if (!(competing_rate >= 0))
        fail("bad_rate", "competing rate must be >= 0");
    if (!(target_share > 0))
        fail("bad_share", "target share must be > 0");
    if (competing_rate == 0) return kFloorRate;
    if (target_share >= 1)
        fail("unsatisfiable_share", "no finite rate reaches a full share against competition");
    return target_share * competing_rate / (1.0 - target_share);
}

}  // namespace agora
