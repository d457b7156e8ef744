// Experiment runner for the Green-PoW simulator. Links the C API only.

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "greenpow/greenpow.h"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct CliError {
    int code;
    std::string message;
};

[[noreturn]] void fail(int code, const std::string& msg) { throw CliError{code, msg}; }

std::string artifact_root() {
    if (const char* env = std::getenv("GREENPOW_ARTIFACT_ROOT")) return env;
    return "artifacts";
}

// "600", "600s", "10m", "2h" -> seconds
double parse_duration(const std::string& text) {
    if (text.empty()) fail(kExitConfig, "empty duration");
    double scale = 1.0;
    std::string num = text;
    switch (text.back()) {
        case 's': num.pop_back(); break;
        case 'm': scale = 60.0; num.pop_back(); break;
        case 'h': scale = 3600.0; num.pop_back(); break;
        default: break;
    }
    try {
        size_t used = 0;
        const double v = std::stod(num, &used);
        if (used != num.size()) throw std::invalid_argument(text);
        return v * scale;
    } catch (const std::exception&) {
        fail(kExitConfig, "cannot parse duration '" + text + "'");
    }
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

// "1..10" or "1,2,5" or "7"
std::vector<int64_t> parse_int_list(const std::string& text) {
    std::vector<int64_t> out;
    const size_t dots = text.find("..");
    try {
        if (dots != std::string::npos) {
            const int64_t lo = std::stoll(text.substr(0, dots));
            const int64_t hi = std::stoll(text.substr(dots + 2));
            if (hi < lo) fail(kExitConfig, "empty range '" + text + "'");
            for (int64_t v = lo; v <= hi; ++v) out.push_back(v);
        } else {
            for (const std::string& part : split(text, ','))
                out.push_back(std::stoll(part));
        }
    } catch (const CliError&) {
        throw;
    } catch (const std::exception&) {
        fail(kExitConfig, "cannot parse integer list '" + text + "'");
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    try {
        for (const std::string& part : split(text, ',')) out.push_back(std::stod(part));
    } catch (const std::exception&) {
        fail(kExitConfig, "cannot parse list '" + text + "'");
    }
    return out;
}

struct RunFlags {
    std::string config_path;
    std::vector<std::string> overrides;  // key=value
    std::string algorithm, miners, selection, scenario, timeout, delay, sweep_spec;
    std::string out_dir;
    std::optional<int64_t> blocks;
    std::optional<int> k, replications, workers;
    std::optional<uint64_t> seed;
    std::optional<double> lambda, eta_s, top_pct, held_pct;
};

json base_config(const RunFlags& f) {
    json cfg = json::object();
    if (!f.config_path.empty()) {
        std::ifstream in(f.config_path);
        if (!in) fail(kExitConfig, "cannot open config file: " + f.config_path);
        try {
            cfg = json::parse(in);
        } catch (const json::parse_error& e) {
            fail(kExitConfig, std::string("config parse error: ") + e.what());
        }
    }
    if (!f.algorithm.empty()) cfg["algorithm"] = f.algorithm;
    if (f.blocks) cfg["block_budget"] = *f.blocks;
    if (f.k) {
        cfg["k"] = *f.k;
        if (!cfg.contains("selection_mode")) cfg["selection_mode"] = "count";
    }
    if (f.seed) cfg["seed"] = *f.seed;
    if (f.lambda) cfg["lambda_per_s"] = *f.lambda;
    if (f.eta_s) {
        cfg["eta_s"] = *f.eta_s;
        if (!cfg.contains("selection_mode")) cfg["selection_mode"] = "time_window";
    }
    if (!f.selection.empty()) cfg["selection_mode"] = f.selection;
    if (f.top_pct) cfg["top_holders_pct"] = *f.top_pct;
    if (f.held_pct) cfg["held_share_pct"] = *f.held_pct;
    if (!f.timeout.empty()) cfg["timeout_s"] = parse_duration(f.timeout);
    if (!f.delay.empty()) {
        const double d = parse_duration(f.delay);
        cfg["delay_model"] = d > 0.0 ? "constant" : "zero";
        cfg["delay_s"] = d;
    }
    if (!f.scenario.empty()) cfg["scenario"] = f.scenario;
    if (f.replications) cfg["replications"] = *f.replications;
    // Overrides are merged before construction so cross-field validation sees
    // the final configuration; unknown keys are rejected by the library.
    for (const std::string& kv : f.overrides) {
        const size_t eq = kv.find('=');
        if (eq == std::string::npos) fail(kExitConfig, "override must be key=value: " + kv);
        const std::string key = kv.substr(0, eq);
        const std::string value = kv.substr(eq + 1);
        json v = json::parse(value, nullptr, false);
        cfg[key] = v.is_discarded() ? json(value) : v;
    }
    return cfg;
}

gp_report* run_config_or_fail(const json& cfg) {
    gp_sim* sim = gp_sim_create(cfg.dump().c_str());
    if (sim == nullptr) fail(kExitConfig, gp_last_error());
    gp_report* rep = gp_sim_run(sim);
    const std::string err = rep == nullptr ? gp_last_error() : "";
    gp_sim_destroy(sim);
    if (rep == nullptr) fail(kExitRuntime, err);
    return rep;
}

void write_text(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(kExitRuntime, "cannot write " + path.string());
    out << text;
}

int do_single_run(const json& cfg, const std::string& out_dir) {
    gp_report* rep = run_config_or_fail(cfg);
    const int rc = gp_report_write_artifacts(rep, out_dir.c_str());
    if (rc != GP_OK) {
        // Partial artifacts plus an error marker, then bail.
        std::ofstream marker(fs::path(out_dir) / "ERROR");
        marker << gp_last_error() << "\n";
        const std::string err = gp_last_error();
        gp_report_destroy(rep);
        fail(kExitRuntime, err);
    }
    std::cout << gp_report_summary_json(rep);
    std::cout << "artifacts: " << out_dir << "\n";
    gp_report_destroy(rep);
    return kExitOk;
}

int do_sweep(const RunFlags& flags, const json& base, const std::string& out_dir) {
    std::vector<int64_t> miners_list = {base.value("miners", 100)};
    if (!flags.miners.empty()) miners_list = parse_int_list(flags.miners);
    std::vector<int64_t> k_list = {base.value("k", 1)};
    if (!flags.sweep_spec.empty()) {
        const size_t eq = flags.sweep_spec.find('=');
        if (eq == std::string::npos || flags.sweep_spec.substr(0, eq) != "k")
            fail(kExitConfig, "sweep spec must be k=<range>, got '" + flags.sweep_spec + "'");
        k_list = parse_int_list(flags.sweep_spec.substr(eq + 1));
    }

    struct Point {
        int64_t n, k;
        std::string row;
        std::string error;
    };
    std::vector<Point> points;
    for (int64_t n : miners_list)
        for (int64_t k : k_list) points.push_back({n, k, {}, {}});

    // Each worker owns its run end to end; rows are merged by point index so
    // the sweep table is identical for any worker count.
    unsigned workers = flags.workers ? static_cast<unsigned>(*flags.workers)
                                     : std::thread::hardware_concurrency();
    workers = std::max(1u, std::min<unsigned>(workers, points.size()));
    std::atomic<size_t> next{0};
    std::mutex io;
    auto work = [&] {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= points.size()) return;
            Point& pt = points[i];
            json cfg = base;
            cfg["miners"] = pt.n;
            cfg["k"] = pt.k;
            gp_sim* sim = gp_sim_create(cfg.dump().c_str());
            if (sim == nullptr) {
                pt.error = gp_last_error();
                continue;
            }
            gp_report* rep = gp_sim_run(sim);
            gp_sim_destroy(sim);
            if (rep == nullptr) {
                pt.error = gp_last_error();
                continue;
            }
            std::ostringstream name;
            name << "point_n" << pt.n << "_k" << pt.k;
            const std::string dir = (fs::path(out_dir) / name.str()).string();
            if (gp_report_write_artifacts(rep, dir.c_str()) != GP_OK) {
                pt.error = gp_last_error();
                gp_report_destroy(rep);
                continue;
            }
            int found = 0;
            auto metric = [&](const char* name_) {
                const double v = gp_report_metric(rep, name_, &found);
                return found ? v : 0.0;
            };
            std::ostringstream row;
            row << pt.n << ',' << pt.k << ',' << metric("saving_pct") << ','
                << metric("mean_interval_s") << ',' << metric("fork_rate_first") << ','
                << metric("fork_rate_second") << ',' << metric("timeout_epochs") << ','
                << metric("mean_eta_s") << '\n';
            pt.row = row.str();
            gp_report_destroy(rep);
            std::lock_guard<std::mutex> lock(io);
            std::cout << "done n=" << pt.n << " k=" << pt.k << "\n";
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();

    std::ostringstream sweep_csv;
    sweep_csv << "miners,k,saving_pct,mean_interval_s,fork_rate_first,fork_rate_second,"
                 "timeout_epochs,mean_eta_s\n";
    for (const Point& pt : points) {
        if (!pt.error.empty())
            fail(pt.error.find("config") != std::string::npos ? kExitConfig : kExitRuntime,
                 "sweep point n=" + std::to_string(pt.n) + " k=" + std::to_string(pt.k) +
                     ": " + pt.error);
        sweep_csv << pt.row;
    }
    write_text(fs::path(out_dir) / "sweep.csv", sweep_csv.str());
    std::cout << "sweep table: " << (fs::path(out_dir) / "sweep.csv").string() << "\n";
    return kExitOk;
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty())
        std::cout << text;
    else
        write_text(out_path, text);
}

int do_analyze(CLI::App& cmd, const std::string& out_path, bool timeout_curve,
               const std::string& shares_path, bool eta, bool fork_prob,
               const std::string& censorship_blocks, bool censorship, double lambda,
               const std::string& ps, const std::string& ks, const std::string& dist,
               int miners, int64_t epochs, uint64_t seed, const std::string& redistribute,
               const std::string& model, double tau, double pb, int cens_k) {
    (void)cmd;
    const int chosen = int(timeout_curve) + int(!shares_path.empty()) + int(eta) +
                       int(fork_prob) + int(censorship || !censorship_blocks.empty());
    if (chosen != 1)
        fail(kExitConfig,
             "pick exactly one analysis: --timeout-curve | --shares FILE | --eta | "
             "--fork-probability | --censorship");

    if (timeout_curve) {
        const std::vector<double> p = parse_double_list(ps.empty() ? "0.7,0.9" : ps);
        char* csv = gp_timeout_curve_csv(lambda, p.data(), p.size());
        if (csv == nullptr) fail(kExitConfig, gp_last_error());
        emit(csv, out_path);
        gp_string_free(csv);
        return kExitOk;
    }
    if (!shares_path.empty()) {
        const bool uniform = redistribute == "uniform";
        if (!redistribute.empty() && redistribute != "uniform" && redistribute != "proportional")
            fail(kExitConfig, "--redistribute must be proportional or uniform");
        char* csv = gp_share_redistribution_csv(shares_path.c_str(), seed, uniform ? 1 : 0);
        if (csv == nullptr) fail(kExitConfig, gp_last_error());
        emit(csv, out_path);
        gp_string_free(csv);
        return kExitOk;
    }
    if (eta) {
        std::vector<int> kv;
        for (int64_t k : parse_int_list(ks.empty() ? "3,5,10,15,20" : ks))
            kv.push_back(static_cast<int>(k));
        double top = 50.0;
        if (dist == "nonuniform") top = 5.0;
        else if (!dist.empty() && dist != "uniform")
            fail(kExitConfig, "--dist must be uniform or nonuniform");
        char* csv = gp_eta_study_csv(kv.data(), kv.size(), miners, lambda, top, 50.0, seed,
                                     epochs);
        if (csv == nullptr) fail(kExitRuntime, gp_last_error());
        emit(csv, out_path);
        gp_string_free(csv);
        return kExitOk;
    }
    if (fork_prob) {
        int ok = 0;
        const double pr = gp_fork_probability(model.c_str(), tau, pb, &ok);
        if (!ok) fail(kExitConfig, gp_last_error());
        std::ostringstream os;
        os << "model,param,p_b,fork_probability\n"
           << model << ',' << tau << ',' << pb << ',' << pr << '\n';
        emit(os.str(), out_path);
        return kExitOk;
    }
    // censorship
    if (!censorship_blocks.empty()) {
        char* csv = gp_censorship_csv(censorship_blocks.c_str(), lambda);
        if (csv == nullptr) fail(kExitConfig, gp_last_error());
        emit(csv, out_path);
        gp_string_free(csv);
        return kExitOk;
    }
    const double w = gp_censorship_pow_window(cens_k, lambda);
    if (w < 0.0) fail(kExitConfig, gp_last_error());
    std::ostringstream os;
    os << "k,lambda_per_s,censorship_window_s\n" << cens_k << ',' << lambda << ',' << w << '\n';
    emit(os.str(), out_path);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Green-PoW protocol simulator and experiment runner"};
    app.require_subcommand(1);

    RunFlags rf;
    auto add_run_flags = [&](CLI::App* cmd) {
        cmd->add_option("--config", rf.config_path, "JSON config (manifest) file");
        cmd->add_option("--set", rf.overrides, "override config field, key=value");
        cmd->add_option("--algorithm", rf.algorithm, "pow | green_pow");
        cmd->add_option("--miners", rf.miners, "miner count (comma list sweeps)");
        cmd->add_option("--blocks", rf.blocks, "canonical block budget");
        cmd->add_option("--k", rf.k, "runner-up set size (count mode)");
        cmd->add_option("--eta", rf.eta_s, "continuation window in seconds (time-window mode)");
        cmd->add_option("--selection", rf.selection, "count | time_window | all");
        cmd->add_option("--lambda", rf.lambda, "block rate per second");
        cmd->add_option("--seed", rf.seed, "root RNG seed");
        cmd->add_option("--timeout", rf.timeout, "second-round timeout (e.g. 1380s, 23m)");
        cmd->add_option("--delay", rf.delay, "constant propagation delay (e.g. 2s)");
        cmd->add_option("--scenario", rf.scenario, "none | partition_runnerups");
        cmd->add_option("--top-pct", rf.top_pct, "% of miners holding the concentrated share");
        cmd->add_option("--held-pct", rf.held_pct, "% of power held by the top group");
        cmd->add_option("--replications", rf.replications, "independent replications");
        cmd->add_option("--sweep", rf.sweep_spec, "sweep spec, e.g. k=1..10");
        cmd->add_option("--workers", rf.workers, "max concurrent sweep runs");
        cmd->add_option("--out", rf.out_dir, "artifact directory");
    };

    CLI::App* run_cmd = app.add_subcommand("run", "execute one simulation (or a sweep)");
    add_run_flags(run_cmd);
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "execute a parameter sweep");
    add_run_flags(sweep_cmd);

    CLI::App* an = app.add_subcommand("analyze", "post-hoc analyses over reports and traces");
    bool an_timeout = false, an_eta = false, an_fork = false, an_cens = false;
    std::string an_shares, an_blocks, an_out, an_ps, an_ks, an_dist = "uniform";
    std::string an_redist = "proportional", an_model = "exponential";
    double an_lambda = 1.0 / 600.0, an_tau = 2.0, an_pb = 0.0;
    int an_miners = 200, an_k = 1;
    int64_t an_epochs = 10000;
    uint64_t an_seed = 1;
    an->add_flag("--timeout-curve", an_timeout, "inverse-CDF waiting-time table");
    an->add_option("--shares", an_shares, "share redistribution over a height,miner_id trace");
    an->add_flag("--eta", an_eta, "mean first-to-last runner-up spread per k");
    an->add_flag("--fork-probability", an_fork, "fork probability from the unaware-miner model");
    an->add_flag("--censorship", an_cens, "censorship window (k/lambda or over blocks.csv)");
    an->add_option("--blocks", an_blocks, "blocks.csv for censorship statistics");
    an->add_option("--lambda", an_lambda, "block rate (per second unless noted)");
    an->add_option("--p", an_ps, "probability list for --timeout-curve");
    an->add_option("--k", an_ks, "k list for --eta (or single k for --censorship)");
    an->add_option("--dist", an_dist, "uniform | nonuniform (5% hold 50%)");
    an->add_option("--miners", an_miners, "network size for --eta");
    an->add_option("--epochs", an_epochs, "epochs per --eta point");
    an->add_option("--seed", an_seed, "RNG seed");
    an->add_option("--redistribute", an_redist, "proportional | uniform");
    an->add_option("--model", an_model, "exponential | linear | step");
    an->add_option("--tau", an_tau, "unaware-model time constant (s)");
    an->add_option("--pb", an_pb, "per-unit-time block probability P_b");
    an->add_option("--out", an_out, "output file (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (run_cmd->parsed() || sweep_cmd->parsed()) {
            const json base = base_config(rf);
            const bool sweeping = sweep_cmd->parsed() || !rf.sweep_spec.empty() ||
                                  rf.miners.find(',') != std::string::npos;
            std::string out = rf.out_dir;
            if (out.empty()) {
                const uint64_t seed = base.value("seed", 1);
                out = (fs::path(artifact_root()) /
                       ((sweeping ? "sweep_seed" : "run_seed") + std::to_string(seed)))
                          .string();
            }
            if (sweeping) return do_sweep(rf, base, out);
            json cfg = base;
            if (!rf.miners.empty()) {
                const auto list = parse_int_list(rf.miners);
                cfg["miners"] = list.front();
            }
            return do_single_run(cfg, out);
        }
        if (an->parsed()) {
            int cens_k = 1;
            if (an_cens && !an_ks.empty()) cens_k = static_cast<int>(parse_int_list(an_ks).front());
            return do_analyze(*an, an_out, an_timeout, an_shares, an_eta, an_fork, an_blocks,
                              an_cens, an_lambda, an_ps, an_ks, an_dist, an_miners, an_epochs,
                              an_seed, an_redist, an_model, an_tau, an_pb, cens_k);
        }
    } catch (const CliError& e) {
        std::cerr << "error: " << e.message << "\n";
        return e.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}
