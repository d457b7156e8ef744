#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "protocol.hpp"
#include "stochastic.hpp"

namespace greenpow {

enum class Round : uint8_t { kFirst, kSecond };

struct RetargetRecord {
    int64_t window_index = 0;
    Round round = Round::kFirst;
    double difficulty_before = 0.0;
    double difficulty_after = 0.0;
    double t_avg = 0.0;  // 0 when the window was empty and carried forward
    int interval_count = 0;
};

// Dual-track retargeting state. Difficulty here is expressed as the power
// fraction the track is calibrated for: a round whose active hash fraction
// equals its difficulty solves at exactly the nominal rate, so
//   rate(round) = lambda_nominal * active_fraction / d_round.
// Retargets follow F = T_E / T_Avg per track; timeout blocks feed the first
// track only, mirrored by the target label carried in every block header.
class DifficultyState {
public:
    DifficultyState() = default;
    DifficultyState(double d1, double d2, int window_blocks, double t_expected);

    // Accumulates one observed block interval into the track selected by the
    // block's target label: D1 blocks (FIRST and SECOND_AFTER_TIMEOUT) feed
    // the first track, D2 blocks the second.
    void record_block_interval(const Block& block, double interval);

    // Retargets any track whose window is complete. Returns the records for
    // windows that closed.
    std::vector<RetargetRecord> maybe_retarget();

    // Forced end-of-window retarget (time-based schedule); empty tracks carry
    // their difficulty forward unchanged and count a warning.
    std::vector<RetargetRecord> force_retarget();

    // lambda_eff for a round given the hash fraction currently mining it.
    // Throws std::invalid_argument when no power is active (surfaced by the
    // simulator as a liveness event).
    MiningRate effective_rate(Round round, double active_power_fraction,
                              MiningRate nominal) const;

    double d1() const { return d1_; }
    double d2() const { return d2_; }
    int window_blocks() const { return window_blocks_; }
    double t_expected() const { return t_expected_; }
    int64_t warnings() const { return empty_window_warnings_; }
    const std::vector<RetargetRecord>& history() const { return history_; }

    // Interval counts by provenance, for asserting that timeout blocks never
    // influence d2.
    int64_t d2_timeout_intervals() const { return d2_timeout_intervals_; }
    int pending_intervals(Round round) const;

private:
    void retarget_track(Round round, bool allow_partial);

    double d1_ = 1.0;
    double d2_ = 1.0;
    int window_blocks_ = 2016;
    double t_expected_ = 600.0;
    double sum1_ = 0.0, sum2_ = 0.0;
    int count1_ = 0, count2_ = 0;
    int64_t window_index1_ = 0, window_index2_ = 0;
    int64_t empty_window_warnings_ = 0;
    int64_t d2_timeout_intervals_ = 0;
    std::vector<RetargetRecord> history_;
};

}  // namespace greenpow
