#include "greenpow/greenpow.h"

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "analysis.hpp"
#include "config.hpp"
#include "report.hpp"
#include "simnet.hpp"

using namespace greenpow;

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

}  // namespace

struct gp_sim {
    SimConfig config;
};

struct gp_report {
    SimReport report;
    std::string summary_cache;
    std::string manifest_cache;
};

extern "C" {

int gp_version(void) { return 10000; }  // 1.0.0

const char* gp_last_error(void) { return g_last_error.c_str(); }

gp_sim* gp_sim_create(const char* config_json) {
    try {
        SimConfig cfg = (config_json == nullptr || *config_json == '\0')
                            ? SimConfig{}
                            : SimConfig::from_json(config_json);
        cfg.validate();
        return new gp_sim{std::move(cfg)};
    } catch (const std::exception& e) {
        set_error(e.what());
        return nullptr;
    }
}

gp_sim* gp_sim_create_from_file(const char* path) {
    try {
        if (path == nullptr) throw ConfigError("config path is null");
        return new gp_sim{SimConfig::from_file(path)};
    } catch (const std::exception& e) {
        set_error(e.what());
        return nullptr;
    }
}

int gp_sim_override(gp_sim* sim, const char* key, const char* value) {
    if (sim == nullptr || key == nullptr || value == nullptr) {
        set_error("null argument");
        return GP_ERR_CONFIG;
    }
    try {
        sim->config.apply_override(key, value);
        return GP_OK;
    } catch (const std::exception& e) {
        set_error(e.what());
        return GP_ERR_CONFIG;
    }
}

const char* gp_sim_config_json(gp_sim* sim) {
    if (sim == nullptr) return nullptr;
    thread_local std::string cache;
    cache = sim->config.to_json();
    return cache.c_str();
}

gp_report* gp_sim_run(gp_sim* sim) {
    if (sim == nullptr) {
        set_error("null simulation handle");
        return nullptr;
    }
    try {
        Simulation s(sim->config);
        auto* rep = new gp_report{s.run(), {}, {}};
        return rep;
    } catch (const ConfigError& e) {
        set_error(e.what());
        return nullptr;
    } catch (const std::exception& e) {
        set_error(e.what());
        return nullptr;
    }
}

void gp_sim_destroy(gp_sim* sim) { delete sim; }

const char* gp_report_summary_json(gp_report* rep) {
    if (rep == nullptr) return nullptr;
    if (rep->summary_cache.empty()) rep->summary_cache = rep->report.summary_json();
    return rep->summary_cache.c_str();
}

const char* gp_report_manifest_json(gp_report* rep) {
    if (rep == nullptr) return nullptr;
    if (rep->manifest_cache.empty()) rep->manifest_cache = rep->report.manifest_json();
    return rep->manifest_cache.c_str();
}

int gp_report_write_artifacts(gp_report* rep, const char* dir) {
    if (rep == nullptr || dir == nullptr) {
        set_error("null argument");
        return GP_ERR_RUNTIME;
    }
    try {
        rep->report.write_artifacts(dir);
        return GP_OK;
    } catch (const std::exception& e) {
        set_error(e.what());
        return GP_ERR_RUNTIME;
    }
}

double gp_report_metric(gp_report* rep, const char* name, int* found) {
    if (found) *found = 0;
    if (rep == nullptr || name == nullptr) return 0.0;
    const SimSummary& s = rep->report.summary;
    const std::string key(name);
    double value = 0.0;
    bool ok = true;
    if (key == "saving_pct") value = s.saving_pct;
    else if (key == "canonical_blocks") value = double(s.canonical_blocks);
    else if (key == "epochs") value = double(s.epochs);
    else if (key == "mean_interval_first_s") value = s.mean_interval_first_s;
    else if (key == "mean_interval_second_s") value = s.mean_interval_second_s;
    else if (key == "mean_interval_s") value = s.mean_interval_s;
    else if (key == "energy_per_block") value = s.energy_per_block;
    else if (key == "fork_rate_first") value = s.fork_rate_first;
    else if (key == "fork_rate_second") value = s.fork_rate_second;
    else if (key == "fork_count") value = double(s.fork_count);
    else if (key == "timeout_epochs") value = double(s.timeout_epochs);
    else if (key == "violations") value = double(s.violations);
    else if (key == "mean_runnerup_count") value = s.mean_runnerup_count;
    else if (key == "mean_eta_s") value = s.mean_eta_s;
    else if (key == "eta_samples") value = double(s.eta_samples);
    else if (key == "d1_final") value = s.d1_final;
    else if (key == "d2_final") value = s.d2_final;
    else if (key == "reanchors") value = double(s.reanchors);
    else ok = false;
    if (found) *found = ok ? 1 : 0;
    if (!ok) set_error("unknown metric: " + key);
    return value;
}

void gp_report_destroy(gp_report* rep) { delete rep; }

char* gp_timeout_curve_csv(double lambda, const double* ps, size_t n_ps) {
    try {
        if (ps == nullptr && n_ps > 0) throw std::invalid_argument("null probability list");
        std::vector<double> p(ps, ps + n_ps);
        auto rows = timeout_curve(MiningRate{lambda}, p);
        std::ostringstream os;
        os << "p,wait,in_recommended_band\n";
        for (const auto& r : rows)
            os << format_double(r.p) << ',' << format_double(r.wait) << ','
               << (r.in_recommended_band ? 1 : 0) << '\n';
        return dup_string(os.str());
    } catch (const std::exception& e) {
        set_error(e.what());
        return nullptr;
    }
}

char* gp_share_redistribution_csv(const char* trace_csv_path, uint64_t seed,
                                  int uniform_redistribution) {
    try {
        if (trace_csv_path == nullptr) throw std::invalid_argument("null trace path");
        BlockTrace trace = BlockTrace::load_csv(trace_csv_path);
        Rng rng(seed, stream_id(Stream::kAnalysis));
        auto rows = share_redistribution(trace, rng, uniform_redistribution != 0);
        std::ostringstream os;
        os << "miner_id,pow_share_pct,greenpow_share_pct\n";
        for (const auto& r : rows)
            os << r.miner << ',' << format_double(r.pow_share_pct) << ','
               << format_double(r.green_share_pct) << '\n';
        return dup_string(os.str());
    } catch (const std::exception& e) {
        set_error(e.what());
        return nullptr;
    }
}

char* gp_eta_study_csv(const int* ks, size_t n_ks, int miners, double lambda_per_s,
                       double top_holders_pct, double held_share_pct, uint64_t seed,
                       int64_t epochs) {
    try {
        if (ks == nullptr || n_ks == 0) throw std::invalid_argument("empty k list");
        std::vector<int> kv(ks, ks + n_ks);
        auto rows = eta_study(kv, miners, lambda_per_s, top_holders_pct, held_share_pct, seed,
                              epochs);
        std::ostringstream os;
        os << "k,mean_eta_s,mean_eta_min,samples\n";
        for (const auto& r : rows)
            os << r.k << ',' << format_double(r.mean_eta_s) << ','
               << format_double(r.mean_eta_s / 60.0) << ',' << r.samples << '\n';
        return dup_string(os.str());
    } catch (const std::exception& e) {
        set_error(e.what());
        return nullptr;
    }
}

double gp_fork_probability(const char* form, double param, double p_b, int* ok) {
    if (ok) *ok = 0;
    try {
        if (form == nullptr) throw std::invalid_argument("null model form");
        UnawareModel m;
        const std::string f(form);
        if (f == "exponential") m.form = UnawareModel::Form::kExponential;
        else if (f == "linear") m.form = UnawareModel::Form::kLinear;
        else if (f == "step") m.form = UnawareModel::Form::kStep;
        else throw std::invalid_argument("unknown unaware model: " + f);
        m.param = param;
        const double pr = fork_probability(m, p_b);
        if (ok) *ok = 1;
        return pr;
    } catch (const std::exception& e) {
        set_error(e.what());
        return 0.0;
    }
}

double gp_censorship_pow_window(int k, double lambda_per_s) {
    try {
        return censorship_window_pow(k, MiningRate{lambda_per_s});
    } catch (const std::exception& e) {
        set_error(e.what());
        return -1.0;
    }
}

char* gp_censorship_csv(const char* blocks_csv_path, double lambda_per_s) {
    try {
        if (blocks_csv_path == nullptr) throw std::invalid_argument("null blocks path");
        std::ifstream in(blocks_csv_path, std::ios::binary);
        if (!in) throw std::invalid_argument(std::string("cannot open ") + blocks_csv_path);
        std::string line;
        std::vector<std::string> producers;
        size_t lineno = 0;
        while (std::getline(in, line)) {
            lineno++;
            if (lineno == 1) continue;  // header
            if (line.empty()) continue;
            // blocks.csv: height,round_tag,producer,...
            size_t a = line.find(',');
            size_t b = a == std::string::npos ? a : line.find(',', a + 1);
            size_t c = b == std::string::npos ? b : line.find(',', b + 1);
            if (c == std::string::npos)
                throw std::invalid_argument(std::string(blocks_csv_path) + ":" +
                                            std::to_string(lineno) + ": malformed row");
            producers.push_back(line.substr(b + 1, c - b - 1));
        }
        auto rows = censorship_stats(producers, MiningRate{lambda_per_s});
        std::ostringstream os;
        os << "miner_id,max_consecutive,implied_window_s\n";
        for (const auto& r : rows)
            os << r.miner << ',' << r.max_consecutive << ','
               << format_double(r.implied_window_s) << '\n';
        return dup_string(os.str());
    } catch (const std::exception& e) {
        set_error(e.what());
        return nullptr;
    }
}

void gp_string_free(char* s) { std::free(s); }

}  // extern "C"
