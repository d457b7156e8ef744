#include "protocol.hpp"

#include <cassert>

namespace greenpow {

const char* to_string(RoundTag tag) {
    switch (tag) {
        case RoundTag::kFirst: return "FIRST";
        case RoundTag::kSecond: return "SECOND";
        case RoundTag::kSecondAfterTimeout: return "SECOND_AFTER_TIMEOUT";
    }
    return "?";
}

const char* to_string(Target t) { return t == Target::kD1 ? "D1" : "D2"; }

const char* to_string(Phase p) {
    switch (p) {
        case Phase::kMiningR1: return "MINING_R1";
        case Phase::kContinueForRunnerup: return "CONTINUE_FOR_RUNNERUP";
        case Phase::kMiningR2: return "MINING_R2";
        case Phase::kPowerSave: return "POWER_SAVE";
    }
    return "?";
}

NonceAction on_nonce_found(MinerState& st, const ProtocolParams& params, SimTime now) {
    switch (st.phase) {
        case Phase::kMiningR1:
            // First-round winner: append, announce, and sit out rho^2. The
            // winner arms its own timeout so it can rejoin if M^2 stalls.
            st.current_height += 1;
            st.phase = Phase::kPowerSave;
            st.is_runner_up = false;
            if (params.timeout_enabled) st.timeout_deadline = now + params.timeout_s;
            return NonceAction::kAnnounceFirstBlock;
        case Phase::kContinueForRunnerup:
            st.is_runner_up = true;
            st.phase = Phase::kMiningR2;
            st.eta_deadline = kNoDeadline;
            return NonceAction::kAnnounceRunnerUp;
        case Phase::kMiningR2: {
            bool timed_out = st.after_timeout;
            st.current_height += 1;
            st.phase = Phase::kMiningR1;
            st.is_runner_up = false;
            st.after_timeout = false;
            st.timeout_deadline = kNoDeadline;
            return timed_out ? NonceAction::kAnnounceTimeoutBlock : NonceAction::kAnnounceSecondBlock;
        }
        case Phase::kPowerSave:
            assert(false && "nonce event delivered to a power-saving miner");
            return NonceAction::kAnnounceFirstBlock;
    }
    assert(false);
    return NonceAction::kAnnounceFirstBlock;
}

BlockVerdict on_block_received(MinerState& st, const Block& block, const RunnerUpSet& runners,
                               const ProtocolParams& params, SimTime now) {
    if (block.height < st.current_height) return BlockVerdict::kIgnoredStale;

    if (block.round_tag == RoundTag::kFirst) {
        if (st.phase != Phase::kMiningR1) return BlockVerdict::kIgnoredStale;
        // Keep working the same puzzle to claim second place.
        st.chain_head = block.id;
        st.current_height = block.height + 1;
        st.phase = Phase::kContinueForRunnerup;
        st.is_runner_up = false;
        st.seen_runnerup_announce = false;
        st.eta_deadline = kNoDeadline;
        if (params.timeout_enabled) st.timeout_deadline = now + params.timeout_s;
        return BlockVerdict::kAccepted;
    }

    // Second-round block while mining rho^2, continuing, or power saving.
    bool eligible = runners.contains(block.producer);
    if (block.round_tag == RoundTag::kSecondAfterTimeout) {
        // Valid for anyone once this miner's own deadline has passed. Nodes
        // whose timer is still running reject it and converge later through
        // the longest chain.
        eligible = st.timeout_deadline != kNoDeadline && now >= st.timeout_deadline;
    }
    if (!eligible) return BlockVerdict::kRejectedIneligible;

    st.chain_head = block.id;
    st.current_height = block.height + 1;
    st.phase = Phase::kMiningR1;
    st.is_runner_up = false;
    st.after_timeout = false;
    st.timeout_deadline = kNoDeadline;
    st.eta_deadline = kNoDeadline;
    st.seen_runnerup_announce = false;
    return BlockVerdict::kAccepted;
}

bool on_runnerup_received(MinerState& st, const ProtocolParams& params, SimTime now,
                          int set_size) {
    if (st.phase != Phase::kContinueForRunnerup) return false;
    switch (params.selection) {
        case ProtocolParams::Selection::kTimeWindow:
            if (!st.seen_runnerup_announce) {
                st.seen_runnerup_announce = true;
                st.eta_deadline = now + params.eta_s;
                if (params.eta_s > 0.0) return false;
                on_eta_expired(st, now);  // eta = 0 aborts immediately
                return true;
            }
            return false;
        case ProtocolParams::Selection::kCount:
            st.seen_runnerup_announce = true;
            if (set_size >= params.count_k) {
                st.phase = Phase::kPowerSave;
                st.eta_deadline = kNoDeadline;
                return true;
            }
            return false;
        case ProtocolParams::Selection::kAll:
            st.seen_runnerup_announce = true;
            return false;
    }
    return false;
}

void on_eta_expired(MinerState& st, SimTime now) {
    (void)now;
    if (st.phase != Phase::kContinueForRunnerup) return;  // stale window
    st.phase = Phase::kPowerSave;
    st.eta_deadline = kNoDeadline;
}

bool on_timeout(MinerState& st, SimTime now) {
    if (st.phase != Phase::kPowerSave) return false;  // stale timer
    if (st.timeout_deadline == kNoDeadline || now < st.timeout_deadline) return false;
    st.phase = Phase::kMiningR2;
    st.after_timeout = true;
    return true;
}

void baseline_pow_step(MinerState& st, PowEvent ev, int64_t block_height) {
    assert(st.phase == Phase::kMiningR1);
    switch (ev) {
        case PowEvent::kNonceFound:
            st.current_height += 1;
            break;
        case PowEvent::kBlockReceived:
            // Abort mining, restart on the next height.
            if (block_height >= st.current_height) st.current_height = block_height + 1;
            break;
    }
}

}  // namespace greenpow
