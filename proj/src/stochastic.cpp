#include "stochastic.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace greenpow {

void validate_profile(const HashPowerProfile& profile) {
    if (profile.fractions.empty())
        throw std::invalid_argument("hash power profile is empty");
    if (!(profile.total_power > 0.0))
        throw std::invalid_argument("total power must be positive");
    double sum = 0.0;
    for (double h : profile.fractions) {
        if (!(h > 0.0))
            throw std::invalid_argument("hash fractions must be strictly positive");
        sum += h;
    }
    if (std::fabs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("hash fractions sum to " + std::to_string(sum) +
                                    ", expected 1 within 1e-9");
}

HashPowerProfile build_power_profile(int n, double top_holders, double held_share,
                                     double total_power) {
    if (n < 2) throw std::invalid_argument("miner count must be >= 2");
    if (!(top_holders > 0.0) || top_holders > 0.5)
        throw std::invalid_argument("top holder percentage must be in (0, 0.5]");
    if (!(held_share > 0.0) || !(held_share < 1.0))
        throw std::invalid_argument("held share must be in (0, 1)");
    const int m = static_cast<int>(std::ceil(n * top_holders));
    if (m <= 0 || m >= n)
        throw std::invalid_argument("concentration leaves an empty miner group");

    HashPowerProfile profile;
    profile.total_power = total_power;
    profile.fractions.assign(static_cast<size_t>(n), 0.0);
    const double top = held_share / m;
    const double rest = (1.0 - held_share) / (n - m);
    for (int i = 0; i < n; ++i) profile.fractions[static_cast<size_t>(i)] = i < m ? top : rest;
    validate_profile(profile);
    return profile;
}

HashPowerProfile build_random_profile(int n, Rng& rng, double total_power) {
    if (n < 2) throw std::invalid_argument("miner count must be >= 2");
    HashPowerProfile profile;
    profile.total_power = total_power;
    profile.fractions.resize(static_cast<size_t>(n));
    double sum = 0.0;
    for (double& h : profile.fractions) {
        // shift away from 0 so h_i > 0 holds strictly
        h = 1e-12 + rng.uniform01();
        sum += h;
    }
    for (double& h : profile.fractions) h /= sum;
    validate_profile(profile);
    return profile;
}

double sample_block_time_at(MiningRate rate, double p) {
    if (!(rate.lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    if (!(p >= 0.0) || p >= 1.0) throw std::invalid_argument("p must lie in [0,1)");
    return -std::log1p(-p) / rate.lambda;
}

double sample_block_time(MiningRate rate, Rng& rng) {
    return sample_block_time_at(rate, rng.uniform01());
}

double sample_runnerup_time_at(MiningRate rate, double h_prev, double p) {
    if (!(h_prev >= 0.0) || h_prev >= 1.0)
        throw std::invalid_argument("h_prev must lie in [0,1): no remaining hash power");
    return sample_block_time_at(rate, p) / (1.0 - h_prev);
}

double sample_runnerup_time(MiningRate rate, double h_prev, Rng& rng) {
    return sample_runnerup_time_at(rate, h_prev, rng.uniform01());
}

WinnerDraw winner_draw(const HashPowerProfile& profile, MiningRate rate, Rng& rng) {
    validate_profile(profile);
    WinnerDraw d;
    d.miner = static_cast<int>(rng.categorical(profile.fractions, 1.0));
    d.solve_time = sample_block_time(rate, rng);
    return d;
}

}  // namespace greenpow
