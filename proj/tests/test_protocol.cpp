#include <doctest.h>

#include "protocol.hpp"

using namespace greenpow;

namespace {

ProtocolParams count_params(int k) {
    ProtocolParams p;
    p.selection = ProtocolParams::Selection::kCount;
    p.count_k = k;
    p.timeout_s = 1380.0;
    p.timeout_enabled = true;
    return p;
}

ProtocolParams window_params(double eta) {
    ProtocolParams p;
    p.selection = ProtocolParams::Selection::kTimeWindow;
    p.eta_s = eta;
    return p;
}

Block second_block(MinerId producer, int64_t height, RoundTag tag = RoundTag::kSecond) {
    Block b;
    b.id = 77;
    b.height = height;
    b.round_tag = tag;
    b.producer = producer;
    b.target_used = tag == RoundTag::kSecond ? Target::kD2 : Target::kD1;
    return b;
}

}  // namespace

TEST_SUITE_BEGIN("protocol");

TEST_CASE("first-round winner appends, announces, and power-saves") {
    MinerState st;
    st.phase = Phase::kMiningR1;
    st.current_height = 4;
    const auto act = on_nonce_found(st, count_params(1), 1000.0);
    CHECK(act == NonceAction::kAnnounceFirstBlock);
    CHECK(st.phase == Phase::kPowerSave);
    CHECK(st.current_height == 5);
    CHECK_FALSE(st.is_runner_up);
    CHECK(st.timeout_deadline == doctest::Approx(2380.0));
}

TEST_CASE("continuation solve claims second place and starts rho2") {
    MinerState st;
    st.phase = Phase::kContinueForRunnerup;
    const auto act = on_nonce_found(st, count_params(2), 50.0);
    CHECK(act == NonceAction::kAnnounceRunnerUp);
    CHECK(st.is_runner_up);
    CHECK(st.phase == Phase::kMiningR2);
}

TEST_CASE("second-round solve opens the next epoch with the flag cleared") {
    MinerState st;
    st.phase = Phase::kMiningR2;
    st.is_runner_up = true;
    st.current_height = 5;
    const auto act = on_nonce_found(st, count_params(2), 60.0);
    CHECK(act == NonceAction::kAnnounceSecondBlock);
    CHECK(st.phase == Phase::kMiningR1);
    CHECK_FALSE(st.is_runner_up);
    CHECK(st.current_height == 6);
}

TEST_CASE("solve after timing out is tagged as a timeout block") {
    MinerState st;
    st.phase = Phase::kMiningR2;
    st.after_timeout = true;
    CHECK(on_nonce_found(st, count_params(1), 0.0) == NonceAction::kAnnounceTimeoutBlock);
    CHECK_FALSE(st.after_timeout);
}

TEST_CASE("receiving a first-round block moves a miner into the continuation") {
    MinerState st;
    st.phase = Phase::kMiningR1;
    st.current_height = 8;
    Block b;
    b.id = 3;
    b.height = 8;
    b.round_tag = RoundTag::kFirst;
    b.producer = 2;
    RunnerUpSet empty;
    const auto v = on_block_received(st, b, empty, count_params(1), 500.0);
    CHECK(v == BlockVerdict::kAccepted);
    CHECK(st.phase == Phase::kContinueForRunnerup);
    CHECK(st.current_height == 9);
    CHECK(st.chain_head == 3);
    CHECK(st.timeout_deadline == doctest::Approx(500.0 + 1380.0));
}

TEST_CASE("power-saving miner exits on a valid second-round block") {
    RunnerUpSet runners;
    runners.members = {4, 9};
    MinerState st;
    st.phase = Phase::kPowerSave;
    st.current_height = 9;
    const auto v = on_block_received(st, second_block(9, 9), runners, count_params(2), 700.0);
    CHECK(v == BlockVerdict::kAccepted);
    CHECK(st.phase == Phase::kMiningR1);
    CHECK(st.current_height == 10);
}

TEST_CASE("second block from outside the runner-up set is rejected before the deadline") {
    RunnerUpSet runners;
    runners.members = {4};
    MinerState st;
    st.phase = Phase::kPowerSave;
    st.current_height = 9;
    st.timeout_deadline = 2000.0;
    const auto v = on_block_received(st, second_block(5, 9), runners, count_params(1), 700.0);
    CHECK(v == BlockVerdict::kRejectedIneligible);
    CHECK(st.phase == Phase::kPowerSave);
}

TEST_CASE("timeout-tagged block accepted by anyone once the deadline passed") {
    RunnerUpSet runners;
    runners.members = {4};
    MinerState st;
    st.phase = Phase::kPowerSave;
    st.current_height = 9;
    st.timeout_deadline = 2000.0;
    SUBCASE("before the local deadline it is rejected") {
        const auto v = on_block_received(st, second_block(5, 9, RoundTag::kSecondAfterTimeout),
                                         runners, count_params(1), 1500.0);
        CHECK(v == BlockVerdict::kRejectedIneligible);
    }
    SUBCASE("after the deadline any producer is valid") {
        const auto v = on_block_received(st, second_block(5, 9, RoundTag::kSecondAfterTimeout),
                                         runners, count_params(1), 2100.0);
        CHECK(v == BlockVerdict::kAccepted);
        CHECK(st.phase == Phase::kMiningR1);
    }
}

TEST_CASE("stale and duplicate blocks are ignored") {
    RunnerUpSet runners;
    runners.members = {4};
    MinerState st;
    st.phase = Phase::kMiningR1;
    st.current_height = 12;
    Block old = second_block(4, 9);
    CHECK(on_block_received(st, old, runners, count_params(1), 0.0) ==
          BlockVerdict::kIgnoredStale);
    Block first_again;
    first_again.height = 12;
    first_again.round_tag = RoundTag::kFirst;
    st.phase = Phase::kContinueForRunnerup;  // already accepted this height
    CHECK(on_block_received(st, first_again, runners, count_params(1), 0.0) ==
          BlockVerdict::kIgnoredStale);
}

TEST_CASE("first announcement opens the eta window and keeps the miner mining") {
    MinerState st;
    st.phase = Phase::kContinueForRunnerup;
    auto params = window_params(30.0);
    CHECK_FALSE(on_runnerup_received(st, params, 100.0, 1));
    CHECK(st.phase == Phase::kContinueForRunnerup);
    CHECK(st.eta_deadline == doctest::Approx(130.0));
    SUBCASE("later announcements are idempotent") {
        CHECK_FALSE(on_runnerup_received(st, params, 110.0, 2));
        CHECK(st.eta_deadline == doctest::Approx(130.0));
    }
    SUBCASE("window expiry aborts to power save") {
        on_eta_expired(st, 130.0);
        CHECK(st.phase == Phase::kPowerSave);
    }
}

TEST_CASE("eta of zero reduces to an immediate abort") {
    MinerState st;
    st.phase = Phase::kContinueForRunnerup;
    CHECK(on_runnerup_received(st, window_params(0.0), 100.0, 1));
    CHECK(st.phase == Phase::kPowerSave);
}

TEST_CASE("count mode closes the set at k members") {
    auto params = count_params(5);
    MinerState st;
    st.phase = Phase::kContinueForRunnerup;
    CHECK_FALSE(on_runnerup_received(st, params, 10.0, 4));
    CHECK(st.phase == Phase::kContinueForRunnerup);
    CHECK(on_runnerup_received(st, params, 11.0, 5));
    CHECK(st.phase == Phase::kPowerSave);
}

TEST_CASE("timeout resumes mining with widened eligibility") {
    MinerState st;
    st.phase = Phase::kPowerSave;
    st.timeout_deadline = 2000.0;
    SUBCASE("fires at the deadline") {
        CHECK(on_timeout(st, 2000.0));
        CHECK(st.phase == Phase::kMiningR2);
        CHECK(st.after_timeout);
    }
    SUBCASE("early checks do nothing") {
        CHECK_FALSE(on_timeout(st, 1999.0));
        CHECK(st.phase == Phase::kPowerSave);
    }
    SUBCASE("stale timer after the second block is ignored") {
        RunnerUpSet runners;
        runners.members = {4};
        on_block_received(st, second_block(4, 0), runners, count_params(1), 1999.0);
        CHECK(st.phase == Phase::kMiningR1);
        CHECK_FALSE(on_timeout(st, 2500.0));
        CHECK(st.phase == Phase::kMiningR1);
    }
}

TEST_CASE("baseline PoW loop appends and aborts") {
    MinerState st;
    st.current_height = 3;
    baseline_pow_step(st, PowEvent::kNonceFound, 3);
    CHECK(st.current_height == 4);
    baseline_pow_step(st, PowEvent::kBlockReceived, 4);
    CHECK(st.current_height == 5);
    baseline_pow_step(st, PowEvent::kBlockReceived, 2);  // stale
    CHECK(st.current_height == 5);
}

TEST_CASE("round parity helper") {
    CHECK(expected_parity(0) == RoundTag::kFirst);
    CHECK(expected_parity(7) == RoundTag::kSecond);
    CHECK(expected_parity(2'000'000) == RoundTag::kFirst);
}

TEST_SUITE_END();
