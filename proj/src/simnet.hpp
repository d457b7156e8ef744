#pragma once

#include <cstdint>
#include <queue>
#include <vector>

#include "chain.hpp"
#include "config.hpp"
#include "difficulty.hpp"
#include "energy.hpp"
#include "protocol.hpp"
#include "report.hpp"
#include "rng.hpp"
#include "stochastic.hpp"

namespace greenpow {

enum class EventKind : uint8_t {
    kNonceFound,
    kBlockDelivery,
    kRunnerupDelivery,
    kTimeoutExpiry,
    kEtaExpiry,
    kRetarget,
};

enum class NonceRole : uint8_t {
    kFirstRace,         // rho^1 winner solve
    kRunnerupCandidate, // continuation solve claiming second place
    kSecondSolve,       // rho^2 solve by a runner-up
    kTimeoutSolve,      // solve after timing out rho^2
    kPowRace,           // baseline PoW solve
};

// Timestamped event; the queue pops in (at, seq) order, seq assigned at
// scheduling time, so processing order is total and deterministic.
struct SimEvent {
    SimTime at = 0.0;
    uint64_t seq = 0;
    EventKind kind = EventKind::kNonceFound;
    NonceRole role = NonceRole::kFirstRace;
    MinerId miner = -1;
    BlockId block = kNoBlock;
    uint64_t token = 0;  // staleness guard (epoch or membership generation)
    SimTime sent_at = 0.0;
};

struct EventAfter {
    bool operator()(const SimEvent& a, const SimEvent& b) const {
        if (a.at != b.at) return a.at > b.at;
        return a.seq > b.seq;
    }
};

// Propagation topology: zero or constant pairwise delay plus at most one
// active partition (scenario injected). Partitioned miners exchange no
// messages while the partition holds; messages sent during it are dropped,
// not replayed.
struct TopologyModel {
    DelayModel model = DelayModel::kZero;
    double delay_s = 0.0;
    std::vector<char> isolated;
    bool partition_active = false;
    SimTime partition_end = -1.0;

    double delay(MinerId from, MinerId to) const {
        return from == to || model == DelayModel::kZero ? 0.0 : delay_s;
    }
    bool separated(MinerId a, MinerId b, SimTime at) const {
        if (!partition_active || at >= partition_end) return false;
        return isolated[static_cast<size_t>(a)] != isolated[static_cast<size_t>(b)];
    }
};

class Simulation {
public:
    explicit Simulation(SimConfig cfg);

    // Runs every replication and pools the results. Replication r uses
    // substreams keyed by (seed, r, purpose); reports are merged in
    // replication order so the output is schedule-independent.
    SimReport run();

private:
    SimConfig cfg_;
};

}  // namespace greenpow
