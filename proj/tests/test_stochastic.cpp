#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "rng.hpp"
#include "stochastic.hpp"

using namespace greenpow;

namespace {
constexpr double kBitcoinLambda = 1.0 / 600.0;
}

TEST_SUITE_BEGIN("stochastic");

TEST_CASE("inverse CDF block time at fixed probabilities") {
    MiningRate rate{kBitcoinLambda};
    // -600 ln(1/2)
    CHECK(sample_block_time_at(rate, 0.5) == doctest::Approx(415.88830833596715).epsilon(1e-12));
    CHECK(sample_block_time_at(rate, 0.0) == 0.0);
    // lambda = 1/10 per minute, p = 0.9: about 23 minutes (in minutes here)
    CHECK(sample_block_time_at(MiningRate{0.1}, 0.9) ==
          doctest::Approx(23.025850929940457).epsilon(1e-12));
    CHECK_THROWS(sample_block_time_at(rate, 1.0));
    CHECK_THROWS(sample_block_time_at(rate, -0.1));
    CHECK_THROWS(sample_block_time_at(MiningRate{0.0}, 0.5));
}

TEST_CASE("runner-up time scales with the departed hash mass") {
    MiningRate rate{kBitcoinLambda};
    CHECK(sample_runnerup_time_at(rate, 0.0, 0.5) == sample_block_time_at(rate, 0.5));
    CHECK(sample_runnerup_time_at(rate, 0.5, 0.5) ==
          doctest::Approx(831.7766166719343).epsilon(1e-12));
    CHECK(sample_runnerup_time_at(rate, 0.99, 0.5) ==
          doctest::Approx(41588.83083359671).epsilon(1e-12));
    // strictly increasing in h_prev for fixed p
    double prev = 0.0;
    for (double hp : {0.0, 0.2, 0.5, 0.8, 0.95}) {
        const double t = sample_runnerup_time_at(rate, hp, 0.3);
        CHECK(t >= prev);
        prev = t;
    }
    CHECK_THROWS(sample_runnerup_time_at(rate, 1.0, 0.5));
    CHECK_THROWS(sample_runnerup_time_at(rate, 1.5, 0.5));
}

TEST_CASE("two-group profile arithmetic") {
    SUBCASE("uniform case: 50% of miners holding 50% means equal shares") {
        auto p = build_power_profile(100, 0.5, 0.5);
        for (double h : p.fractions) CHECK(h == doctest::Approx(0.01).epsilon(1e-12));
    }
    SUBCASE("n=200, top 2%") {
        auto p = build_power_profile(200, 0.02, 0.5);
        for (int i = 0; i < 4; ++i) CHECK(p.fractions[i] == doctest::Approx(0.125));
        for (int i = 4; i < 200; ++i)
            CHECK(p.fractions[i] == doctest::Approx(0.5 / 196.0).epsilon(1e-12));
    }
    SUBCASE("n=100, top 5%") {
        auto p = build_power_profile(100, 0.05, 0.5);
        for (int i = 0; i < 5; ++i) CHECK(p.fractions[i] == doctest::Approx(0.10));
        for (int i = 5; i < 100; ++i)
            CHECK(p.fractions[i] == doctest::Approx(0.5 / 95.0).epsilon(1e-12));
    }
    SUBCASE("degenerate configurations rejected") {
        CHECK_THROWS(build_power_profile(1, 0.5, 0.5));
        CHECK_THROWS(build_power_profile(100, 0.0, 0.5));
        CHECK_THROWS(build_power_profile(100, 0.6, 0.5));
        CHECK_THROWS(build_power_profile(100, 0.5, 1.0));
    }
}

TEST_CASE("profile mass conservation across generated configurations") {
    Rng rng(99, 4242);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform01() * 400);
        const double top = 0.005 + rng.uniform01() * 0.495;
        const double held = 0.05 + rng.uniform01() * 0.9;
        HashPowerProfile p;
        try {
            p = build_power_profile(n, top, held);
        } catch (const std::invalid_argument&) {
            continue;  // empty-group configurations are rejected by contract
        }
        double sum = 0.0;
        for (double h : p.fractions) {
            CHECK(h > 0.0);
            sum += h;
        }
        CHECK(std::fabs(sum - 1.0) <= 1e-9);
        CHECK(p.size() == n);
    }
    for (int trial = 0; trial < 50; ++trial) {
        auto p = build_random_profile(2 + static_cast<int>(rng.uniform01() * 300), rng);
        double sum = 0.0;
        for (double h : p.fractions) sum += h;
        CHECK(std::fabs(sum - 1.0) <= 1e-9);
    }
}

TEST_CASE("winner draw marginals and solve-time mean") {
    auto profile = build_power_profile(100, 0.5, 0.5);
    MiningRate rate{kBitcoinLambda};
    Rng rng(7, 1);
    const int draws = 100000;
    std::vector<int> wins(100, 0);
    double time_sum = 0.0;
    for (int i = 0; i < draws; ++i) {
        auto d = winner_draw(profile, rate, rng);
        wins[static_cast<size_t>(d.miner)]++;
        time_sum += d.solve_time;
    }
    for (int m = 0; m < 100; ++m)
        CHECK(std::fabs(wins[m] / double(draws) - 0.01) < 0.002);
    CHECK(std::fabs(time_sum / draws * rate.lambda - 1.0) < 0.01);
}

TEST_CASE("dominant miner wins almost always") {
    const double eps = 1e-3;
    HashPowerProfile p;
    p.fractions = {1.0 - eps, eps / 2, eps / 2};
    MiningRate rate{kBitcoinLambda};
    Rng rng(5, 2);
    int dominant = 0;
    const int draws = 20000;
    for (int i = 0; i < draws; ++i)
        if (winner_draw(p, rate, rng).miner == 0) dominant++;
    CHECK(dominant / double(draws) >= 1.0 - 2 * eps - 0.01);
}

TEST_CASE("empirical CDF matches the exponential law (Kolmogorov-Smirnov)") {
    MiningRate rate{kBitcoinLambda};
    Rng rng(11, 3);
    const int n = 100000;
    std::vector<double> samples(n);
    for (double& s : samples) s = sample_block_time(rate, rng);
    std::sort(samples.begin(), samples.end());
    double d = 0.0;
    for (int i = 0; i < n; ++i) {
        const double f = 1.0 - std::exp(-rate.lambda * samples[static_cast<size_t>(i)]);
        d = std::max(d, std::fabs(f - (i + 1) / double(n)));
        d = std::max(d, std::fabs(f - i / double(n)));
    }
    CHECK(d <= 0.01);
    CHECK(std::fabs(samples[n / 2] * rate.lambda - std::log(2.0)) < 0.02);
}

TEST_CASE("runner-up sampler mean tracks 1/(lambda (1-x))") {
    MiningRate rate{kBitcoinLambda};
    for (double x : {0.0, 0.3, 0.7}) {
        Rng rng(13, 40 + static_cast<uint64_t>(x * 10));
        double sum = 0.0;
        const int n = 100000;
        for (int i = 0; i < n; ++i) sum += sample_runnerup_time(rate, x, rng);
        const double expected = 1.0 / (rate.lambda * (1.0 - x));
        CHECK(std::fabs(sum / n / expected - 1.0) < 0.01);
    }
}

TEST_CASE("identical (seed, stream) reproduces bit-identical sequences") {
    Rng a(123456789, 42), b(123456789, 42), c(123456789, 43);
    bool all_equal = true, any_differs = false;
    for (int i = 0; i < 1000; ++i) {
        const double ua = a.uniform01(), ub = b.uniform01(), uc = c.uniform01();
        all_equal &= ua == ub;
        any_differs |= ua != uc;
        CHECK(ua >= 0.0);
        CHECK(ua < 1.0);
    }
    CHECK(all_equal);
    CHECK(any_differs);
}

TEST_SUITE_END();
