#include "report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace greenpow {

using json = nlohmann::ordered_json;

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    // Prefer the shortest representation that round-trips.
    for (int prec = 1; prec <= 16; ++prec) {
        char cand[64];
        std::snprintf(cand, sizeof cand, "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(cand, "%lf", &back);
        if (back == v) return cand;
    }
    return buf;
}

namespace {

json summary_to_json(const SimSummary& s) {
    json j;
    j["canonical_blocks"] = s.canonical_blocks;
    j["epochs"] = s.epochs;
    j["saving_pct"] = s.saving_pct;
    j["mean_interval_first_s"] = s.mean_interval_first_s;
    j["mean_interval_second_s"] = s.mean_interval_second_s;
    j["mean_interval_s"] = s.mean_interval_s;
    j["energy_per_block"] = s.energy_per_block;
    j["fork_rate_first"] = s.fork_rate_first;
    j["fork_rate_second"] = s.fork_rate_second;
    j["fork_count"] = s.fork_count;
    j["timeout_epochs"] = s.timeout_epochs;
    j["violations"] = s.violations;
    j["mean_runnerup_count"] = s.mean_runnerup_count;
    j["mean_eta_s"] = s.mean_eta_s;
    j["eta_samples"] = s.eta_samples;
    j["d1_final"] = s.d1_final;
    j["d2_final"] = s.d2_final;
    j["retarget_windows"] = s.retarget_windows;
    j["reanchors"] = s.reanchors;
    j["d2_timeout_intervals"] = s.d2_timeout_intervals;
    return j;
}

}  // namespace

std::string SimReport::summary_json() const {
    json j = summary_to_json(summary);
    if (replication_summaries.size() > 1) {
        json reps = json::array();
        for (const auto& r : replication_summaries) reps.push_back(summary_to_json(r));
        j["replications"] = std::move(reps);
    }
    return j.dump(2) + "\n";
}

std::string SimReport::blocks_csv() const {
    std::ostringstream os;
    os << "height,round_tag,producer,found_at,interval,target,difficulty\n";
    double prev = 0.0;
    for (const Block& b : canonical_blocks) {
        os << b.height << ',' << to_string(b.round_tag) << ',' << b.producer << ','
           << format_double(b.found_at) << ',' << format_double(b.found_at - prev) << ','
           << to_string(b.target_used) << ',' << format_double(b.difficulty) << '\n';
        prev = b.found_at;
    }
    return os.str();
}

std::string SimReport::forks_csv() const {
    std::ostringstream os;
    os << "height,round_tag,competing_ids,resolved_winner\n";
    for (const ForkRecord& f : forks) {
        os << f.height << ',' << to_string(f.round_tag) << ',';
        for (size_t i = 0; i < f.competing.size(); ++i)
            os << (i ? ";" : "") << f.competing[i];
        os << ',' << f.resolved_winner << '\n';
    }
    return os.str();
}

std::string SimReport::epochs_csv() const {
    std::ostringstream os;
    os << "epoch,runnerup_count,timeout,election_complete,eta_s\n";
    for (const EpochRow& e : epochs)
        os << e.epoch << ',' << e.runnerup_count << ',' << (e.timed_out ? 1 : 0) << ','
           << (e.election_complete ? 1 : 0) << ','
           << (e.election_complete ? format_double(e.eta_s) : std::string()) << '\n';
    return os.str();
}

std::string SimReport::energy_csv() const {
    std::ostringstream os;
    os << "epoch,e_1st,e_2nd,e_pow_equiv,saving_pct\n";
    for (const EpochRow& e : epochs) {
        const double saving =
            e.e_pow_equiv > 0.0
                ? 100.0 * (e.e_pow_equiv - e.e_first - e.e_second) / e.e_pow_equiv
                : 0.0;
        os << e.epoch << ',' << format_double(e.e_first) << ',' << format_double(e.e_second)
           << ',' << format_double(e.e_pow_equiv) << ',' << format_double(saving) << '\n';
    }
    return os.str();
}

std::string SimReport::retarget_csv() const {
    std::ostringstream os;
    os << "window_index,round,d_before,d_after,t_avg,intervals\n";
    for (const RetargetRecord& r : retargets)
        os << r.window_index << ',' << (r.round == Round::kFirst ? "D1" : "D2") << ','
           << format_double(r.difficulty_before) << ',' << format_double(r.difficulty_after)
           << ',' << format_double(r.t_avg) << ',' << r.interval_count << '\n';
    return os.str();
}

std::string SimReport::manifest_json() const { return config.to_json() + "\n"; }

std::string SimReport::canonical_serialization() const {
    std::string out;
    out += manifest_json();
    out += summary_json();
    out += blocks_csv();
    out += forks_csv();
    out += epochs_csv();
    out += energy_csv();
    out += retarget_csv();
    return out;
}

void SimReport::write_artifacts(const std::string& dir) const {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    auto put = [&](const char* name, const std::string& text) {
        std::ofstream out(fs::path(dir) / name, std::ios::binary);
        if (!out) throw std::runtime_error(std::string("cannot write artifact ") + name);
        out << text;
    };
    put("manifest.json", manifest_json());
    put("summary.json", summary_json());
    put("blocks.csv", blocks_csv());
    put("forks.csv", forks_csv());
    put("epochs.csv", epochs_csv());
    put("energy.csv", energy_csv());
    put("retarget.csv", retarget_csv());
}

}  // namespace greenpow
