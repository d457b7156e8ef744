#include "difficulty.hpp"

#include <stdexcept>

namespace greenpow {

DifficultyState::DifficultyState(double d1, double d2, int window_blocks, double t_expected)
    : d1_(d1), d2_(d2), window_blocks_(window_blocks), t_expected_(t_expected) {
    if (!(d1 > 0.0) || !(d2 > 0.0)) throw std::invalid_argument("difficulty must be positive");
    if (window_blocks < 1) throw std::invalid_argument("retarget window must be >= 1");
    if (!(t_expected > 0.0)) throw std::invalid_argument("target block time must be positive");
}

void DifficultyState::record_block_interval(const Block& block, double interval) {
    if (!(interval > 0.0)) throw std::invalid_argument("block interval must be positive");
    if (block.target_used == Target::kD1) {
        sum1_ += interval;
        count1_ += 1;
    } else {
        sum2_ += interval;
        count2_ += 1;
        if (block.round_tag == RoundTag::kSecondAfterTimeout) d2_timeout_intervals_ += 1;
    }
}

void DifficultyState::retarget_track(Round round, bool allow_partial) {
    double& d = round == Round::kFirst ? d1_ : d2_;
    double& sum = round == Round::kFirst ? sum1_ : sum2_;
    int& count = round == Round::kFirst ? count1_ : count2_;
    int64_t& widx = round == Round::kFirst ? window_index1_ : window_index2_;

    RetargetRecord rec;
    rec.window_index = widx++;
    rec.round = round;
    rec.difficulty_before = d;
    rec.interval_count = count;
    if (count == 0) {
        empty_window_warnings_ += 1;  // carry difficulty forward unchanged
        rec.t_avg = 0.0;
        rec.difficulty_after = d;
    } else {
        (void)allow_partial;
        rec.t_avg = sum / count;
        d *= t_expected_ / rec.t_avg;  // F = T_E / T_Avg
        rec.difficulty_after = d;
    }
    sum = 0.0;
    count = 0;
    history_.push_back(rec);
}

std::vector<RetargetRecord> DifficultyState::maybe_retarget() {
    std::vector<RetargetRecord> out;
    if (count1_ >= window_blocks_) {
        retarget_track(Round::kFirst, false);
        out.push_back(history_.back());
    }
    if (count2_ >= window_blocks_) {
        retarget_track(Round::kSecond, false);
        out.push_back(history_.back());
    }
    return out;
}

std::vector<RetargetRecord> DifficultyState::force_retarget() {
    std::vector<RetargetRecord> out;
    retarget_track(Round::kFirst, true);
    out.push_back(history_.back());
    retarget_track(Round::kSecond, true);
    out.push_back(history_.back());
    return out;
}

MiningRate DifficultyState::effective_rate(Round round, double active_power_fraction,
                                           MiningRate nominal) const {
    if (!(active_power_fraction > 0.0))
        throw std::invalid_argument("no active hash power: liveness event");
    const double calibrated = round == Round::kFirst ? d1_ : d2_;
    return MiningRate{nominal.lambda * active_power_fraction / calibrated};
}

int DifficultyState::pending_intervals(Round round) const {
    return round == Round::kFirst ? count1_ : count2_;
}

}  // namespace greenpow
