#pragma once

#include <span>
#include <vector>

#include "rng.hpp"

namespace greenpow {

// Block generation rate lambda in solves per second at the calibrated power.
// T_E = 1/lambda is the target block interval (600 s for Bitcoin constants).
struct MiningRate {
    double lambda = 1.0 / 600.0;
};

// Per-miner hash fractions h_i (sum to 1) plus the total network power in
// abstract watt-equivalent units. Energy integrals scale linearly with
// total_power.
struct HashPowerProfile {
    std::vector<double> fractions;
    double total_power = 1.0;

    int size() const { return static_cast<int>(fractions.size()); }
};

// Throws std::invalid_argument when an invariant fails:
// all h_i > 0, sum h_i = 1 within 1e-9, size >= 1.
void validate_profile(const HashPowerProfile& profile);

// Two-group concentration scheme: the top ceil(n*top_holders) miners share
// held_share of the power equally, the rest share the remainder equally.
// top_holders = held_share = 0.5 degenerates to equal shares.
HashPowerProfile build_power_profile(int n, double top_holders, double held_share = 0.5,
                                     double total_power = 1.0);

// Per-miner fractions drawn i.i.d. U(0,1) and normalised.
HashPowerProfile build_random_profile(int n, Rng& rng, double total_power = 1.0);

// Inverse CDF of the exponential inter-arrival law: t = -(1/lambda) ln(1-p).
double sample_block_time_at(MiningRate rate, double p);
double sample_block_time(MiningRate rate, Rng& rng);

// Time at which the next runner-up finds a valid block once miners holding
// cumulative fraction h_prev (first winner plus earlier runners-up) have
// left the race: t = -(1/(lambda (1-h_prev))) ln(1-p). Strictly increasing
// in h_prev for fixed p. Rejects h_prev >= 1.
double sample_runnerup_time_at(MiningRate rate, double h_prev, double p);
double sample_runnerup_time(MiningRate rate, double h_prev, Rng& rng);

struct WinnerDraw {
    int miner = -1;
    double solve_time = 0.0;
};

// Canonical superposition form: a categorical draw with weights h_i plus a
// single Exp(lambda) time. Distributionally identical to taking the minimum
// of per-miner Exp(h_i * lambda) clocks.
WinnerDraw winner_draw(const HashPowerProfile& profile, MiningRate rate, Rng& rng);

}  // namespace greenpow
