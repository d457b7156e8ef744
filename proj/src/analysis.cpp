#include "analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "simnet.hpp"

namespace greenpow {

void BlockTrace::validate() const {
    if (heights.empty()) throw std::invalid_argument("block trace is empty");
    if (heights.size() != miner_ids.size())
        throw std::invalid_argument("block trace columns differ in length");
    for (size_t i = 0; i < heights.size(); ++i) {
        if (miner_ids[i].empty())
            throw std::invalid_argument("block trace: empty miner_id at height " +
                                        std::to_string(heights[i]));
        if (i > 0 && heights[i] != heights[i - 1] + 1)
            throw std::invalid_argument("block trace: heights must be contiguous, got " +
                                        std::to_string(heights[i - 1]) + " then " +
                                        std::to_string(heights[i]));
    }
}

BlockTrace BlockTrace::parse_csv(const std::string& text, const std::string& origin) {
    BlockTrace trace;
    std::istringstream in(text);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        lineno++;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (lineno == 1) {
            if (line != "height,miner_id")
                throw std::invalid_argument(origin + ":1: expected header 'height,miner_id'");
            continue;
        }
        if (line.empty()) continue;
        const size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                        ": expected 'height,miner_id'");
        try {
            trace.heights.push_back(std::stoll(line.substr(0, comma)));
        } catch (const std::exception&) {
            throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                        ": height is not an integer");
        }
        trace.miner_ids.push_back(line.substr(comma + 1));
    }
    trace.validate();
    return trace;
}

BlockTrace BlockTrace::load_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open trace file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return parse_csv(os.str(), path);
}

double unaware_integral(const UnawareModel& model) {
    if (!(model.param > 0.0)) throw std::invalid_argument("unaware model parameter must be > 0");
    switch (model.form) {
        case UnawareModel::Form::kExponential: return model.param;
        case UnawareModel::Form::kLinear: return model.param / 2.0;
        case UnawareModel::Form::kStep: return model.param;
    }
    throw std::invalid_argument("unknown unaware model form");
}

namespace {

double u_of_t(const UnawareModel& model, double t) {
    switch (model.form) {
        case UnawareModel::Form::kExponential: return std::exp(-t / model.param);
        case UnawareModel::Form::kLinear: return t >= model.param ? 0.0 : 1.0 - t / model.param;
        case UnawareModel::Form::kStep: return t < model.param ? 1.0 : 0.0;
    }
    return 0.0;
}

double adaptive_simpson(const UnawareModel& m, double a, double b, double fa, double fm,
                        double fb, double whole, double eps, int depth) {
    const double mid = 0.5 * (a + b);
    const double lm = 0.5 * (a + mid), rm = 0.5 * (mid + b);
    const double flm = u_of_t(m, lm), frm = u_of_t(m, rm);
    const double left = (mid - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - mid) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * eps)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(m, a, mid, fa, flm, fm, left, eps / 2.0, depth - 1) +
           adaptive_simpson(m, mid, b, fm, frm, fb, right, eps / 2.0, depth - 1);
}

}  // namespace

double unaware_integral_quadrature(const UnawareModel& model) {
    if (!(model.param > 0.0)) throw std::invalid_argument("unaware model parameter must be > 0");
    // u is non-increasing with finite integral; 60 time constants bound the tail.
    const double b = model.param * 60.0;
    const double fa = u_of_t(model, 0.0), fb = u_of_t(model, b),
                 fm = u_of_t(model, 0.5 * b);
    const double whole = b / 6.0 * (fa + 4.0 * fm + fb);
    const double eps = 1e-8 * std::max(1.0, model.param);
    return adaptive_simpson(model, 0.0, b, fa, fm, fb, whole, eps, 60);
}

double fork_probability(const UnawareModel& model, double p_b) {
    if (!(p_b >= 0.0) || p_b >= 1.0)
        throw std::invalid_argument("p_b must lie in [0, 1)");
    if (p_b == 0.0) return 0.0;
    const double integral = unaware_integral(model);
    return 1.0 - std::pow(1.0 - p_b, integral);
}

double censorship_window_pow(int k, MiningRate rate) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (!(rate.lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    return static_cast<double>(k) / rate.lambda;
}

std::vector<ConsecutiveRun> censorship_stats(const std::vector<std::string>& producers,
                                             MiningRate rate) {
    if (producers.empty()) throw std::invalid_argument("empty producer trace");
    std::map<std::string, int> best;
    size_t i = 0;
    while (i < producers.size()) {
        size_t j = i;
        while (j + 1 < producers.size() && producers[j + 1] == producers[i]) ++j;
        const int len = static_cast<int>(j - i + 1);
        auto [it, inserted] = best.emplace(producers[i], len);
        if (!inserted) it->second = std::max(it->second, len);
        i = j + 1;
    }
    std::vector<ConsecutiveRun> out;
    for (const auto& [miner, len] : best)
        out.push_back({miner, len, static_cast<double>(len) / rate.lambda});
    return out;
}

std::vector<ShareRow> share_redistribution(const BlockTrace& trace, Rng& rng,
                                           bool uniform_redistribution) {
    trace.validate();
    std::map<std::string, double> counts;
    for (const std::string& m : trace.miner_ids) counts[m] += 1.0;
    if (counts.size() < 2)
        throw std::invalid_argument("block trace has a single miner: nothing to redistribute to");
    const double total = static_cast<double>(trace.size());

    // Scan maximal same-miner runs; cap at two consecutive blocks, then flip a
    // coin for the surviving pair.
    std::map<std::string, double> removed;
    size_t i = 0;
    while (i < trace.size()) {
        size_t j = i;
        while (j + 1 < trace.size() && trace.miner_ids[j + 1] == trace.miner_ids[i]) ++j;
        const size_t len = j - i + 1;
        double take = 0.0;
        if (len >= 2) {
            take += static_cast<double>(len - 2);
            if (rng.uniform01() < 0.5) take += 1.0;
        }
        if (take > 0.0) removed[trace.miner_ids[i]] += take;
        i = j + 1;
    }

    std::map<std::string, double> adjusted = counts;
    double pool = 0.0;
    for (const auto& [miner, r] : removed) {
        adjusted[miner] -= r;
        pool += r;
    }
    // Freed blocks go to the miners that were not penalised, so a miner with
    // consecutive wins never gains share. If every miner was penalised the
    // pool spreads over everyone, which keeps the mass conserved regardless.
    if (pool > 0.0) {
        double weight_sum = 0.0;
        for (const auto& [miner, c] : adjusted)
            if (removed.count(miner) == 0) weight_sum += uniform_redistribution ? 1.0 : c;
        const bool all_penalised = weight_sum <= 0.0;
        if (all_penalised)
            for (const auto& [miner, c] : adjusted)
                weight_sum += uniform_redistribution ? 1.0 : c;
        for (auto& [miner, c] : adjusted) {
            if (!all_penalised && removed.count(miner) != 0) continue;
            const double w = uniform_redistribution ? 1.0 : c;
            c += pool * w / weight_sum;
        }
    }

    std::vector<ShareRow> rows;
    for (const auto& [miner, c] : counts)
        rows.push_back({miner, 100.0 * c / total, 100.0 * adjusted[miner] / total});
    std::sort(rows.begin(), rows.end(), [](const ShareRow& a, const ShareRow& b) {
        if (a.pow_share_pct != b.pow_share_pct) return a.pow_share_pct < b.pow_share_pct;
        return a.miner < b.miner;
    });
    return rows;
}

std::vector<EtaStudyRow> eta_study(const std::vector<int>& ks, int miners, double lambda_per_s,
                                   double top_holders_pct, double held_share_pct, uint64_t seed,
                                   int64_t epochs) {
    std::vector<EtaStudyRow> out;
    for (int k : ks) {
        if (k == 1) {
            out.push_back({1, 0.0, epochs});  // single runner-up: zero spread by definition
            continue;
        }
        SimConfig cfg;
        cfg.algorithm = Algorithm::kGreenPow;
        cfg.miners = miners;
        cfg.block_budget = 2 * epochs;
        cfg.lambda_per_s = lambda_per_s;
        cfg.power_mode = PowerMode::kTwoGroup;
        cfg.top_holders_pct = top_holders_pct;
        cfg.held_share_pct = held_share_pct;
        cfg.selection = ProtocolParams::Selection::kCount;
        cfg.k = k;
        cfg.timeout_enabled = false;
        cfg.seed = seed + static_cast<uint64_t>(k);
        SimReport rep = Simulation(cfg).run();
        out.push_back({k, rep.summary.mean_eta_s, rep.summary.eta_samples});
    }
    return out;
}

std::vector<TimeoutPoint> timeout_curve(MiningRate rate, const std::vector<double>& ps) {
    std::vector<TimeoutPoint> out;
    for (double p : ps) {
        TimeoutPoint pt;
        pt.p = p;
        pt.wait = sample_block_time_at(rate, p);
        pt.in_recommended_band = p >= 0.7 && p <= 0.9;
        out.push_back(pt);
    }
    return out;
}

}  // namespace greenpow
