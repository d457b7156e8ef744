#include "energy.hpp"

#include <algorithm>
#include <stdexcept>

namespace greenpow {

void EnergyLedger::integrate(int miner, double power_fraction, double total_power,
                             double interval) {
    if (interval < 0.0) throw std::invalid_argument("negative integration interval");
    if (miner < 0 || static_cast<size_t>(miner) >= per_miner_.size())
        throw std::out_of_range("miner index outside ledger");
    per_miner_[static_cast<size_t>(miner)] += power_fraction * total_power * interval;
}

void EnergyLedger::begin_epoch() {
    epoch_first_ = 0.0;
    epoch_second_ = 0.0;
}

void EnergyLedger::charge_first_round(int miner, double power_fraction, double total_power,
                                      double interval) {
    integrate(miner, power_fraction, total_power, interval);
    epoch_first_ += power_fraction * total_power * interval;
}

void EnergyLedger::charge_second_round(int miner, double power_fraction, double total_power,
                                       double interval) {
    integrate(miner, power_fraction, total_power, interval);
    epoch_second_ += power_fraction * total_power * interval;
}

double EnergyLedger::network_total() const {
    double sum = 0.0;
    for (double e : per_miner_) sum += e;
    return sum;
}

void EnergyLedger::merge(const EnergyLedger& other) {
    if (other.per_miner_.size() > per_miner_.size())
        per_miner_.resize(other.per_miner_.size(), 0.0);
    for (size_t i = 0; i < other.per_miner_.size(); ++i) per_miner_[i] += other.per_miner_[i];
}

double closed_form_pow(const HashPowerProfile& profile, MiningRate rate) {
    validate_profile(profile);
    if (!(rate.lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    return profile.total_power / rate.lambda;
}

namespace {

void check_first_round_inputs(const HashPowerProfile& profile, int winner,
                              const std::vector<int>& runnerups,
                              const std::vector<double>& runnerup_times) {
    validate_profile(profile);
    if (runnerups.size() != runnerup_times.size())
        throw std::invalid_argument("runner-up ids and times differ in length");
    if (!std::is_sorted(runnerup_times.begin(), runnerup_times.end()))
        throw std::invalid_argument("runner-up times must be sorted ascending");
    for (int r : runnerups)
        if (r == winner) throw std::invalid_argument("winner cannot be a runner-up");
}

}  // namespace

double closed_form_first_round(const HashPowerProfile& profile, MiningRate rate, int winner,
                               const std::vector<int>& runnerups,
                               const std::vector<double>& runnerup_times) {
    check_first_round_inputs(profile, winner, runnerups, runnerup_times);
    const double P = profile.total_power;
    double energy = P / rate.lambda;  // winner race at full power
    double finished = profile.fractions.at(static_cast<size_t>(winner));
    double prev = 0.0;
    for (size_t i = 0; i < runnerups.size(); ++i) {
        const double gap = runnerup_times[i] - prev;
        prev = runnerup_times[i];
        finished += profile.fractions.at(static_cast<size_t>(runnerups[i]));
        energy += kElectionEnergyWeight * (1.0 - finished) * P * gap;
    }
    return energy;
}

double closed_form_first_round_literal(const HashPowerProfile& profile, MiningRate rate,
                                       int winner, const std::vector<int>& runnerups,
                                       const std::vector<double>& runnerup_times) {
    check_first_round_inputs(profile, winner, runnerups, runnerup_times);
    const double P = profile.total_power;
    const double h_f = profile.fractions.at(static_cast<size_t>(winner));
    double energy = P / rate.lambda;
    // Literal inner sum with runners-up indexed 1..k and h_0 = 0: term i
    // carries 1 - h_f + sum_{j=i-1}^{k-1} h_j, so the competing power grows
    // with the outstanding runner-up fractions instead of shrinking.
    const size_t k = runnerups.size();
    for (size_t i = 1; i <= k; ++i) {
        double outstanding = 0.0;
        for (size_t j = i > 1 ? i - 1 : 1; j + 1 <= k; ++j)
            outstanding += profile.fractions.at(static_cast<size_t>(runnerups[j - 1]));
        energy += runnerup_times[i - 1] * (1.0 - h_f + outstanding) * P;
    }
    return energy;
}

double closed_form_second_round(const HashPowerProfile& profile, MiningRate rate,
                                const std::vector<int>& participants) {
    validate_profile(profile);
    double mass = 0.0;
    for (int m : participants) mass += profile.fractions.at(static_cast<size_t>(m));
    return profile.total_power / rate.lambda * mass;
}

double saving_percent(double e_pow, double e_first, double e_second) {
    if (e_pow < 0.0 || e_first < 0.0 || e_second < 0.0)
        throw std::invalid_argument("energies must be non-negative");
    if (e_pow == 0.0) throw std::invalid_argument("baseline energy must be positive");
    const double save = 2.0 * e_pow - (e_first + e_second);
    return 100.0 * save / (2.0 * e_pow);
}

}  // namespace greenpow
