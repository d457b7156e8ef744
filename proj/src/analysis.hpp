#pragma once

#include <string>
#include <vector>

#include "report.hpp"
#include "rng.hpp"
#include "stochastic.hpp"

namespace greenpow {

// Imported block trace: contiguous heights and the producer of each block.
struct BlockTrace {
    std::vector<int64_t> heights;
    std::vector<std::string> miner_ids;

    size_t size() const { return heights.size(); }
    void validate() const;  // contiguous, strictly increasing, non-empty ids

    // CSV with mandatory header "height,miner_id", UTF-8, LF endings.
    static BlockTrace load_csv(const std::string& path);
    static BlockTrace parse_csv(const std::string& text, const std::string& origin);
};

// Ratio of miners still unaware of a freshly found block t seconds after it
// was found. u(0) = 1, non-increasing, finite integral.
struct UnawareModel {
    enum class Form : uint8_t { kExponential, kLinear, kStep };
    Form form = Form::kExponential;
    double param = 2.0;  // time constant / cutoff in seconds
};

double unaware_integral(const UnawareModel& model);             // analytic
double unaware_integral_quadrature(const UnawareModel& model);  // adaptive, 1e-8 rel
// Pr[F > 0] = 1 - (1 - p_b)^I with I the unaware-miner integral.
double fork_probability(const UnawareModel& model, double p_b);

// Plain PoW censorship window: k consecutive wins hold the chain k/lambda s.
double censorship_window_pow(int k, MiningRate rate);

struct ConsecutiveRun {
    std::string miner;
    int max_consecutive = 0;
    double implied_window_s = 0.0;
};
// Longest consecutive canonical-block runs per producer over a trace.
std::vector<ConsecutiveRun> censorship_stats(const std::vector<std::string>& producers,
                                             MiningRate rate);

struct ShareRow {
    std::string miner;
    double pow_share_pct = 0.0;
    double green_share_pct = 0.0;
};

// Mining-share redistribution under the consecutive-win exclusion rule:
// runs longer than two blocks are cut back to two, then each remaining pair
// loses one block with probability 1/2. Freed blocks are redistributed over
// the other miners, proportionally to their shares by default or uniformly.
// Output is sorted ascending by PoW share. Total mass is conserved.
std::vector<ShareRow> share_redistribution(const BlockTrace& trace, Rng& rng,
                                           bool uniform_redistribution = false);

struct EtaStudyRow {
    int k = 0;
    double mean_eta_s = 0.0;
    int64_t samples = 0;
};

// Mean spread between the first and last considered runner-up for a sweep of
// COUNT(k) elections, measured over at least `epochs` epochs per point.
std::vector<EtaStudyRow> eta_study(const std::vector<int>& ks, int miners, double lambda_per_s,
                                   double top_holders_pct, double held_share_pct, uint64_t seed,
                                   int64_t epochs);

// Inverse-CDF waiting times t = -(1/lambda) ln(1-p); the [0.7, 0.9] band is
// the recommended timeout region.
struct TimeoutPoint {
    double p = 0.0;
    double wait = 0.0;  // units of 1/lambda's unit
    bool in_recommended_band = false;
};
std::vector<TimeoutPoint> timeout_curve(MiningRate rate, const std::vector<double>& ps);

}  // namespace greenpow
