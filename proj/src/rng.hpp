#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace greenpow {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// (seed, stream_id) fully determines the sample sequence. mt19937_64 output
// is pinned by the standard and every variate below is an explicit
// inverse-CDF transform, so sequences are bit-identical across platforms.
struct RandomSource {
    uint64_t seed = 0;
    uint64_t stream_id = 0;
};

// Substream purposes, combined with a replication index into a stream id.
enum class Stream : uint64_t {
    kWinner = 1,
    kElection = 2,
    kSecondRound = 3,
    kFork = 4,
    kScenario = 5,
    kProfile = 6,
    kAnalysis = 7,
    kCalibration = 8,
};

inline uint64_t stream_id(Stream purpose, uint64_t replication = 0) {
    return (replication << 8) | static_cast<uint64_t>(purpose);
}

class Rng {
public:
    explicit Rng(RandomSource src)
        : eng_(splitmix64(splitmix64(src.seed) ^ splitmix64(~src.stream_id))) {}
    Rng(uint64_t seed, uint64_t stream) : Rng(RandomSource{seed, stream}) {}

    // Uniform on [0,1), 53-bit resolution. Never returns 1, so ln(1-p) stays finite.
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // t = -ln(1-p)/rate for p ~ U[0,1).
    double exponential(double rate) {
        assert(rate > 0.0);
        return -std::log1p(-uniform01()) / rate;
    }

    // Index drawn with probability weights[i]/total; weights may contain zeros
    // (already-drawn miners in a without-replacement loop).
    size_t categorical(std::span<const double> weights, double total) {
        assert(total > 0.0);
        double u = uniform01() * total;
        double acc = 0.0;
        size_t last = 0;
        for (size_t i = 0; i < weights.size(); ++i) {
            if (weights[i] <= 0.0) continue;
            acc += weights[i];
            last = i;
            if (u < acc) return i;
        }
        return last;  // rounding fell off the end
    }

    uint64_t next_u64() { return eng_(); }

private:
    std::mt19937_64 eng_;
};

}  // namespace greenpow
