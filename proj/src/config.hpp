#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "protocol.hpp"

namespace greenpow {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Algorithm : uint8_t { kPow, kGreenPow };
enum class PowerMode : uint8_t { kTwoGroup, kExplicit, kUniformRandom };
enum class DelayModel : uint8_t { kZero, kConstant };
enum class Scenario : uint8_t { kNone, kPartitionRunnerups };

// Full experiment description. Serialises to a manifest that reproduces the
// run byte-for-byte.
struct SimConfig {
    Algorithm algorithm = Algorithm::kGreenPow;
    int miners = 100;
    int64_t block_budget = 1000;
    double lambda_per_s = 1.0 / 600.0;
    double total_power = 1.0;

    PowerMode power_mode = PowerMode::kTwoGroup;
    double top_holders_pct = 50.0;  // % of miners holding held_share_pct of the power
    double held_share_pct = 50.0;
    std::vector<double> power_fractions;  // kExplicit

    ProtocolParams::Selection selection = ProtocolParams::Selection::kCount;
    int k = 1;
    double eta_s = 30.0;
    // Ten target intervals: liveness stays bounded while chance expiries stay
    // out of the statistics. The 12-23 minute band from the timeout study is
    // the aggressive deployment choice; pass it explicitly to study it.
    double timeout_s = 6000.0;
    bool timeout_enabled = true;

    DelayModel delay_model = DelayModel::kZero;
    double delay_s = 0.0;

    Scenario scenario = Scenario::kNone;
    int64_t scenario_period_epochs = 50;
    double scenario_duration_s = 3000.0;

    uint64_t seed = 1;
    int replications = 1;

    int retarget_window = 2016;
    bool d2_bootstrap_min = false;  // minimum-difficulty bootstrap for D2

    std::string trace_path;  // line-delimited transition trace; empty disables
    bool collect_epoch_details = false;  // per-epoch election detail, for oracles

    ProtocolParams protocol_params() const;
    void validate() const;  // throws ConfigError with the offending field
    std::string to_json() const;

    static SimConfig from_json(const std::string& json_text);
    static SimConfig from_file(const std::string& path);

    // Applies a key=value override using the manifest field names.
    void apply_override(const std::string& key, const std::string& value);
};

}  // namespace greenpow
