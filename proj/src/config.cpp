#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace greenpow {

using json = nlohmann::ordered_json;

namespace {

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field '") + key + "': " + e.what());
    }
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

template <typename E>
E parse_enum(const std::string& raw, const char* field,
             std::initializer_list<std::pair<const char*, E>> table) {
    const std::string v = lower(raw);
    for (const auto& [name, value] : table)
        if (v == name) return value;
    std::ostringstream os;
    os << "config field '" << field << "': unknown value '" << raw << "' (expected one of:";
    for (const auto& [name, value] : table) os << ' ' << name;
    os << ")";
    throw ConfigError(os.str());
}

const char* to_string(Algorithm a) { return a == Algorithm::kPow ? "pow" : "green_pow"; }
const char* to_string(PowerMode m) {
    switch (m) {
        case PowerMode::kTwoGroup: return "two_group";
        case PowerMode::kExplicit: return "explicit";
        case PowerMode::kUniformRandom: return "uniform_random";
    }
    return "?";
}
const char* to_string(DelayModel m) { return m == DelayModel::kZero ? "zero" : "constant"; }
const char* to_string(Scenario s) {
    return s == Scenario::kNone ? "none" : "partition_runnerups";
}
const char* to_string(ProtocolParams::Selection s) {
    switch (s) {
        case ProtocolParams::Selection::kTimeWindow: return "time_window";
        case ProtocolParams::Selection::kCount: return "count";
        case ProtocolParams::Selection::kAll: return "all";
    }
    return "?";
}

}  // namespace

ProtocolParams SimConfig::protocol_params() const {
    ProtocolParams p;
    p.selection = selection;
    p.eta_s = eta_s;
    p.count_k = k;
    p.timeout_s = timeout_s;
    p.timeout_enabled = timeout_enabled;
    return p;
}

void SimConfig::validate() const {
    if (miners < 2) throw ConfigError("config field 'miners': must be >= 2");
    if (block_budget < 2) throw ConfigError("config field 'block_budget': must be >= 2");
    if (!(lambda_per_s > 0.0)) throw ConfigError("config field 'lambda_per_s': must be > 0");
    if (!(total_power > 0.0)) throw ConfigError("config field 'total_power': must be > 0");
    if (replications < 1) throw ConfigError("config field 'replications': must be >= 1");
    if (retarget_window < 1) throw ConfigError("config field 'retarget_window': must be >= 1");
    if (power_mode == PowerMode::kTwoGroup) {
        if (!(top_holders_pct > 0.0) || top_holders_pct > 50.0)
            throw ConfigError("config field 'top_holders_pct': must be in (0, 50]");
        if (!(held_share_pct > 0.0) || !(held_share_pct < 100.0))
            throw ConfigError("config field 'held_share_pct': must be in (0, 100)");
    }
    if (power_mode == PowerMode::kExplicit &&
        power_fractions.size() != static_cast<size_t>(miners))
        throw ConfigError("config field 'power_fractions': length must equal 'miners'");
    if (selection == ProtocolParams::Selection::kCount && (k < 1 || k > miners - 1))
        throw ConfigError("config field 'k': must be in [1, miners-1]");
    if (selection == ProtocolParams::Selection::kTimeWindow && eta_s < 0.0)
        throw ConfigError("config field 'eta_s': must be >= 0");
    if (timeout_enabled && !(timeout_s > 1.0 / lambda_per_s))
        throw ConfigError("config field 'timeout_s': must exceed the average block time 1/lambda");
    if (delay_model == DelayModel::kConstant && delay_s < 0.0)
        throw ConfigError("config field 'delay_s': must be >= 0");
    if (scenario == Scenario::kPartitionRunnerups) {
        if (algorithm != Algorithm::kGreenPow)
            throw ConfigError("config field 'scenario': partition_runnerups requires green_pow");
        if (selection != ProtocolParams::Selection::kCount)
            throw ConfigError("config field 'scenario': partition_runnerups requires count mode");
        if (scenario_period_epochs < 1)
            throw ConfigError("config field 'scenario_period_epochs': must be >= 1");
        if (!(scenario_duration_s > timeout_s))
            throw ConfigError(
                "config field 'scenario_duration_s': must exceed timeout_s so the "
                "isolated set outlasts the liveness deadline");
        if (!timeout_enabled)
            throw ConfigError(
                "config field 'scenario': partition_runnerups requires timeout_enabled");
    }
}

std::string SimConfig::to_json() const {
    json j;
    j["algorithm"] = to_string(algorithm);
    j["miners"] = miners;
    j["block_budget"] = block_budget;
    j["lambda_per_s"] = lambda_per_s;
    j["total_power"] = total_power;
    j["power_mode"] = to_string(power_mode);
    j["top_holders_pct"] = top_holders_pct;
    j["held_share_pct"] = held_share_pct;
    j["power_fractions"] = power_fractions;
    j["selection_mode"] = to_string(selection);
    j["k"] = k;
    j["eta_s"] = eta_s;
    j["timeout_s"] = timeout_s;
    j["timeout_enabled"] = timeout_enabled;
    j["delay_model"] = to_string(delay_model);
    j["delay_s"] = delay_s;
    j["scenario"] = to_string(scenario);
    j["scenario_period_epochs"] = scenario_period_epochs;
    j["scenario_duration_s"] = scenario_duration_s;
    j["seed"] = seed;
    j["replications"] = replications;
    j["retarget_window"] = retarget_window;
    j["d2_bootstrap_min"] = d2_bootstrap_min;
    j["trace_path"] = trace_path;
    j["collect_epoch_details"] = collect_epoch_details;
    return j.dump(2);
}

SimConfig SimConfig::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    static const std::set<std::string> known = {
        "algorithm", "miners", "block_budget", "lambda_per_s", "total_power",
        "power_mode", "top_holders_pct", "held_share_pct", "power_fractions",
        "selection_mode", "k", "eta_s", "timeout_s", "timeout_enabled",
        "delay_model", "delay_s", "scenario", "scenario_period_epochs",
        "scenario_duration_s", "seed", "replications", "retarget_window",
        "d2_bootstrap_min", "trace_path", "collect_epoch_details"};
    for (const auto& [key, value] : j.items())
        if (known.count(key) == 0)
            throw ConfigError("unknown config field '" + key + "'");
    SimConfig c;
    std::string s;
    s.clear();
    read(j, "algorithm", s);
    if (!s.empty())
        c.algorithm = parse_enum<Algorithm>(s, "algorithm",
                                            {{"pow", Algorithm::kPow},
                                             {"green_pow", Algorithm::kGreenPow}});
    read(j, "miners", c.miners);
    read(j, "block_budget", c.block_budget);
    read(j, "lambda_per_s", c.lambda_per_s);
    read(j, "total_power", c.total_power);
    s.clear();
    read(j, "power_mode", s);
    if (!s.empty())
        c.power_mode = parse_enum<PowerMode>(s, "power_mode",
                                             {{"two_group", PowerMode::kTwoGroup},
                                              {"explicit", PowerMode::kExplicit},
                                              {"uniform_random", PowerMode::kUniformRandom}});
    read(j, "top_holders_pct", c.top_holders_pct);
    read(j, "held_share_pct", c.held_share_pct);
    read(j, "power_fractions", c.power_fractions);
    s.clear();
    read(j, "selection_mode", s);
    if (!s.empty())
        c.selection = parse_enum<ProtocolParams::Selection>(
            s, "selection_mode",
            {{"time_window", ProtocolParams::Selection::kTimeWindow},
             {"count", ProtocolParams::Selection::kCount},
             {"all", ProtocolParams::Selection::kAll}});
    read(j, "k", c.k);
    read(j, "eta_s", c.eta_s);
    read(j, "timeout_s", c.timeout_s);
    read(j, "timeout_enabled", c.timeout_enabled);
    s.clear();
    read(j, "delay_model", s);
    if (!s.empty())
        c.delay_model = parse_enum<DelayModel>(s, "delay_model",
                                               {{"zero", DelayModel::kZero},
                                                {"constant", DelayModel::kConstant}});
    read(j, "delay_s", c.delay_s);
    s.clear();
    read(j, "scenario", s);
    if (!s.empty())
        c.scenario = parse_enum<Scenario>(s, "scenario",
                                          {{"none", Scenario::kNone},
                                           {"partition_runnerups", Scenario::kPartitionRunnerups}});
    read(j, "scenario_period_epochs", c.scenario_period_epochs);
    read(j, "scenario_duration_s", c.scenario_duration_s);
    read(j, "seed", c.seed);
    read(j, "replications", c.replications);
    read(j, "retarget_window", c.retarget_window);
    read(j, "d2_bootstrap_min", c.d2_bootstrap_min);
    read(j, "trace_path", c.trace_path);
    read(j, "collect_epoch_details", c.collect_epoch_details);
    c.validate();
    return c;
}

SimConfig SimConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return from_json(os.str());
}

void SimConfig::apply_override(const std::string& key, const std::string& value) {
    json j;
    try {
        j = json::parse(to_json());
        if (!j.contains(key)) throw ConfigError("unknown config field '" + key + "'");
        // Parse the value as JSON when possible, else treat it as a string.
        json v = json::parse(value, nullptr, false);
        if (v.is_discarded()) v = value;
        j[key] = v;
    } catch (const json::exception& e) {
        throw ConfigError("override '" + key + "': " + e.what());
    }
    *this = from_json(j.dump());
}

}  // namespace greenpow
