#pragma once

#include <string>
#include <vector>

#include "chain.hpp"
#include "config.hpp"
#include "difficulty.hpp"
#include "energy.hpp"

namespace greenpow {

struct EpochRow {
    int64_t epoch = 0;
    int runnerup_count = 0;
    bool timed_out = false;
    bool election_complete = false;  // COUNT mode reached k before rho^2 closed
    double eta_s = 0.0;              // first-to-last announce spread; valid when complete
    double e_first = 0.0;
    double e_second = 0.0;
    double e_pow_equiv = 0.0;  // 2 * P * t0: PoW cost of the same two-block luck
};

// Per-epoch election detail, populated when the config asks for it; feeds
// the closed-form oracles in the test suites.
struct EpochDetail {
    int winner = -1;
    std::vector<int> members;
    std::vector<double> announce_offsets;  // relative to the first-round block
    double t_first = 0.0;                  // first-round race duration
    double t_second = 0.0;                 // exclusive race duration
    bool timed_out = false;
};

struct SimSummary {
    int64_t canonical_blocks = 0;
    int64_t epochs = 0;
    double saving_pct = 0.0;  // ratio of sums over all epochs
    double mean_interval_first_s = 0.0;
    double mean_interval_second_s = 0.0;
    double mean_interval_s = 0.0;
    double energy_per_block = 0.0;
    double fork_rate_first = 0.0;
    double fork_rate_second = 0.0;
    int64_t fork_count = 0;
    int64_t timeout_epochs = 0;
    int64_t violations = 0;  // ineligible second-round blocks seen before timeout
    double mean_runnerup_count = 0.0;
    double mean_eta_s = 0.0;
    int64_t eta_samples = 0;
    double d1_final = 1.0;
    double d2_final = 1.0;
    int64_t retarget_windows = 0;
    int64_t reanchors = 0;  // miners re-synced to the canonical chain after partitions
    int64_t d2_timeout_intervals = 0;  // timeout-block intervals that reached the D2 window
};

// Everything a run produces. Serialisation is canonical: identical configs
// (including seed) give byte-identical artifacts.
struct SimReport {
    SimConfig config;
    std::vector<Block> canonical_blocks;
    std::vector<ForkRecord> forks;
    std::vector<EpochRow> epochs;
    std::vector<EpochDetail> epoch_details;
    std::vector<RetargetRecord> retargets;
    std::vector<double> per_miner_energy;
    std::vector<SimSummary> replication_summaries;
    SimSummary summary;  // pooled over replications

    std::string summary_json() const;
    std::string blocks_csv() const;
    std::string forks_csv() const;
    std::string epochs_csv() const;
    std::string energy_csv() const;
    std::string retarget_csv() const;
    std::string manifest_json() const;

    // Concatenation of every artifact; used for determinism checks.
    std::string canonical_serialization() const;

    void write_artifacts(const std::string& dir) const;
};

// Shortest round-trip decimal form, used for every float that reaches disk.
std::string format_double(double v);

}  // namespace greenpow
