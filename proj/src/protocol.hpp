#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace greenpow {

using BlockId = uint64_t;
using MinerId = int32_t;
using SimTime = double;

constexpr BlockId kNoBlock = std::numeric_limits<BlockId>::max();
constexpr SimTime kNoDeadline = -1.0;

enum class RoundTag : uint8_t { kFirst, kSecond, kSecondAfterTimeout };
enum class Target : uint8_t { kD1, kD2 };

const char* to_string(RoundTag tag);
const char* to_string(Target t);

// Round parity: blocks at even height are first-round blocks, odd heights
// carry SECOND or SECOND_AFTER_TIMEOUT.
inline RoundTag expected_parity(int64_t height) {
    return height % 2 == 0 ? RoundTag::kFirst : RoundTag::kSecond;
}

struct Block {
    BlockId id = kNoBlock;
    int64_t height = 0;
    BlockId parent = kNoBlock;  // kNoBlock anchors the block to genesis
    RoundTag round_tag = RoundTag::kFirst;
    MinerId producer = -1;
    SimTime found_at = 0.0;
    Target target_used = Target::kD1;
    double difficulty = 1.0;  // work units contributed to cumulative chain work
};

// Runner-up set M^2 of one epoch: eligible second-round miners together with
// the times their qualifying solutions were announced. The first-round winner
// is never a member.
struct RunnerUpSet {
    int64_t epoch = -1;
    std::vector<MinerId> members;
    std::vector<SimTime> announce_times;
    bool closed = false;

    bool contains(MinerId m) const {
        for (MinerId x : members)
            if (x == m) return true;
        return false;
    }
    int size() const { return static_cast<int>(members.size()); }
};

enum class Phase : uint8_t { kMiningR1, kContinueForRunnerup, kMiningR2, kPowerSave };

const char* to_string(Phase p);

struct ProtocolParams {
    enum class Selection : uint8_t { kTimeWindow, kCount, kAll };
    Selection selection = Selection::kCount;
    double eta_s = 30.0;      // continuation window after the first announcement
    int count_k = 1;          // set size closing the election in COUNT mode
    double timeout_s = 6000.0;
    bool timeout_enabled = true;
};

// Per-miner protocol state. Exactly one phase at any instant; POWER_SAVE
// consumes zero mining power (the energy ledger integrates nothing for it).
struct MinerState {
    Phase phase = Phase::kMiningR1;
    bool is_runner_up = false;
    bool after_timeout = false;  // second round re-entered via timeout
    int64_t current_height = 0;
    BlockId chain_head = kNoBlock;
    SimTime timeout_deadline = kNoDeadline;
    SimTime eta_deadline = kNoDeadline;
    bool seen_runnerup_announce = false;
};

enum class NonceAction : uint8_t {
    kAnnounceFirstBlock,    // MINING_R1 solve: append + announce, enter power save
    kAnnounceRunnerUp,      // CONTINUE_FOR_RUNNERUP solve: claim second place
    kAnnounceSecondBlock,   // MINING_R2 solve: append + announce, next epoch
    kAnnounceTimeoutBlock,  // MINING_R2 solve after timing out rho^2
};

// Nonce event in an active mining phase. A nonce in POWER_SAVE is a scheduler
// bug and asserts.
NonceAction on_nonce_found(MinerState& st, const ProtocolParams& params, SimTime now);

enum class BlockVerdict : uint8_t {
    kAccepted,
    kIgnoredStale,         // duplicate or behind the miner's head
    kRejectedIneligible,   // SECOND block from outside M^2 before the deadline
};

// Block at the miner's current height. Fork bookkeeping lives in the chain
// view; this handles only the state transition and the eligibility rule.
BlockVerdict on_block_received(MinerState& st, const Block& block, const RunnerUpSet& runners,
                               const ProtocolParams& params, SimTime now);

// Runner-up announcement delivered to a miner. In TIME_WINDOW mode the first
// announcement opens an eta window; in COUNT mode the election closes as soon
// as the set reaches k members. Duplicate announcements are idempotent.
// set_size is |M^2| after this announcement. Returns true when the miner
// aborts its continuation and enters power save.
bool on_runnerup_received(MinerState& st, const ProtocolParams& params, SimTime now, int set_size);

// Continuation window closed without a local solve (eta passed in TIME_WINDOW
// mode). A miner that finds a nonce after its deadline discards it silently,
// which this transition models.
void on_eta_expired(MinerState& st, SimTime now);

// Second-round liveness timeout: quit power save and mine the pending block
// with eligibility widened to every miner. Stale timers are ignored.
// Returns true when the miner resumed mining.
bool on_timeout(MinerState& st, SimTime now);

// Classic PoW loop: mine, append own solves, accept received blocks.
enum class PowEvent : uint8_t { kNonceFound, kBlockReceived };
void baseline_pow_step(MinerState& st, PowEvent ev, int64_t block_height);

}  // namespace greenpow
