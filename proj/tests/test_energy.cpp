#include <doctest.h>

#include <cmath>

#include "energy.hpp"

using namespace greenpow;

namespace {
constexpr double kLambda = 1.0 / 600.0;
}

TEST_SUITE_BEGIN("energy");

TEST_CASE("ledger integration arithmetic") {
    EnergyLedger ledger(3);
    ledger.integrate(0, 0.01, 1.0, 600.0);
    CHECK(ledger.total(0) == doctest::Approx(6.0));
    ledger.integrate(0, 0.01, 1.0, 0.0);
    CHECK(ledger.total(0) == doctest::Approx(6.0));
    CHECK_THROWS(ledger.integrate(0, 0.01, 1.0, -1.0));
    CHECK_THROWS(ledger.integrate(5, 0.01, 1.0, 1.0));

    ledger.begin_epoch();
    ledger.charge_first_round(1, 0.5, 2.0, 10.0);
    ledger.charge_second_round(2, 0.25, 2.0, 10.0);
    CHECK(ledger.epoch_first() == doctest::Approx(10.0));
    CHECK(ledger.epoch_second() == doctest::Approx(5.0));
    CHECK(ledger.network_total() == doctest::Approx(6.0 + 15.0));

    EnergyLedger other(3);
    other.integrate(2, 1.0, 1.0, 7.0);
    ledger.merge(other);
    CHECK(ledger.total(2) == doctest::Approx(5.0 + 7.0));
}

TEST_CASE("PoW baseline is P/lambda, independent of the profile shape") {
    MiningRate rate{kLambda};
    auto uniform = build_power_profile(100, 0.5, 0.5);
    auto skewed = build_power_profile(200, 0.02, 0.5);
    CHECK(closed_form_pow(uniform, rate) == doctest::Approx(600.0));
    CHECK(closed_form_pow(skewed, rate) == doctest::Approx(600.0));
    CHECK(closed_form_pow(uniform, MiningRate{2 * kLambda}) == doctest::Approx(300.0));
    auto powered = uniform;
    powered.total_power = 3.0;
    CHECK(closed_form_pow(powered, rate) == doctest::Approx(1800.0));
}

TEST_CASE("first-round integral: no runners-up degenerates to the baseline") {
    auto profile = build_power_profile(100, 0.5, 0.5);
    CHECK(closed_form_first_round(profile, MiningRate{kLambda}, 0, {}, {}) ==
          doctest::Approx(600.0));
}

TEST_CASE("first-round integral charges weighted competing power per interval") {
    auto profile = build_power_profile(100, 0.5, 0.5);
    MiningRate rate{kLambda};
    // One runner-up electing 0.1/lambda after the winner. The competing field
    // during that interval excludes the winner and the claimant; the interval
    // carries the calibrated election weight.
    const double t = 0.1 / kLambda;
    const double expected =
        600.0 * (1.0 + kElectionEnergyWeight * 0.1 * (1.0 - 0.01 - 0.01));
    CHECK(closed_form_first_round(profile, rate, 0, {1}, {t}) ==
          doctest::Approx(expected).epsilon(1e-12));
    // Co-solvers at offset zero add nothing.
    CHECK(closed_form_first_round(profile, rate, 0, {1, 2}, {0.0, 0.0}) ==
          doctest::Approx(600.0));
    CHECK_THROWS(closed_form_first_round(profile, rate, 0, {0}, {t}));     // winner as runner-up
    CHECK_THROWS(closed_form_first_round(profile, rate, 0, {1, 2}, {t}));  // length mismatch
    CHECK_THROWS(closed_form_first_round(profile, rate, 0, {1, 2}, {t, t / 2}));  // unsorted
}

TEST_CASE("first-round energy rises about 10.0 to 12.4 normalized over k = 1..10") {
    // Normalized units: lambda = 1/10 per minute, P = 1, uniform n = 100.
    auto profile = build_power_profile(100, 0.5, 0.5);
    MiningRate rate{0.1};
    double prev = 0.0;
    for (int k = 1; k <= 10; ++k) {
        std::vector<int> runners;
        std::vector<double> times;
        double hp = 0.01;  // winner
        double lead = 0.0;
        for (int i = 1; i <= k; ++i) {
            runners.push_back(i);
            const double hp_before = hp;
            hp += 0.01;
            if (i > kCoSolverCount)
                lead += 0.01 / (rate.lambda * (1.0 - hp_before) * (1.0 - hp));
            times.push_back(lead);
        }
        const double e = closed_form_first_round(profile, rate, 0, runners, times);
        CHECK(e > prev - 1e-12);
        prev = e;
        if (k == 1) CHECK(e == doctest::Approx(10.0));
        if (k == 10) CHECK(e == doctest::Approx(12.4).epsilon(0.02));
    }
}

TEST_CASE("literal printed form keeps the outstanding runner-up mass in play") {
    HashPowerProfile profile;
    profile.fractions = {0.4, 0.3, 0.2, 0.1};
    MiningRate rate{0.1};
    const double e = closed_form_first_round_literal(profile, rate, 0, {1, 2}, {1.0, 2.0});
    // P/lambda + t1 (1 - h_f + h_r1) + t2 (1 - h_f + h_r1)
    CHECK(e == doctest::Approx(10.0 + 1.0 * 0.9 + 2.0 * 0.9).epsilon(1e-12));
}

TEST_CASE("second-round energy sums the participants it is given") {
    auto profile = build_power_profile(100, 0.5, 0.5);
    MiningRate rate{0.1};
    // single participant, h = 0.01, lambda = 1/10: 0.1 normalized
    CHECK(closed_form_second_round(profile, rate, {3}) == doctest::Approx(0.1));
    std::vector<int> all(100);
    for (int i = 0; i < 100; ++i) all[static_cast<size_t>(i)] = i;
    CHECK(closed_form_second_round(profile, rate, all) ==
          doctest::Approx(closed_form_pow(profile, rate)));
    CHECK(closed_form_second_round(profile, rate, {}) == 0.0);
    // grows sublinearly in k relative to the first-round overhead
    double prev = 0.0;
    for (int k = 1; k <= 10; ++k) {
        std::vector<int> part;
        for (int i = 1; i < k; ++i) part.push_back(i);  // reference convention: skip first
        const double e = closed_form_second_round(profile, rate, part);
        CHECK(e >= prev);
        prev = e;
    }
    CHECK(prev == doctest::Approx(0.9));
}

TEST_CASE("saving percentage") {
    CHECK(saving_percent(600.0, 600.0, 0.0) == doctest::Approx(50.0));
    CHECK(saving_percent(600.0, 600.0, 600.0) == doctest::Approx(0.0));
    CHECK(saving_percent(600.0, 1500.0, 300.0) < 0.0);  // costs can exceed the baseline
    CHECK_THROWS(saving_percent(0.0, 1.0, 1.0));
    CHECK_THROWS(saving_percent(600.0, -1.0, 0.0));
}

TEST_SUITE_END();
