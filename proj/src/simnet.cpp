#include "simnet.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <fstream>
#include <future>
#include <stdexcept>

namespace greenpow {

namespace {

// One replication of a run: event loop, miner machines, chain, difficulty,
// and the energy ledger. Single-threaded by construction.
class Engine {
public:
    Engine(const SimConfig& cfg, uint64_t replication)
        : cfg_(cfg),
          params_(cfg.protocol_params()),
          nominal_{cfg.lambda_per_s},
          rng_winner_(cfg.seed, stream_id(Stream::kWinner, replication)),
          rng_election_(cfg.seed, stream_id(Stream::kElection, replication)),
          rng_second_(cfg.seed, stream_id(Stream::kSecondRound, replication)),
          rng_fork_(cfg.seed, stream_id(Stream::kFork, replication)),
          ledger_(cfg.miners) {
        build_profile(replication);
        const int n = cfg_.miners;
        machines_.assign(static_cast<size_t>(n), MinerState{});
        topology_.model = cfg_.delay_model;
        topology_.delay_s = cfg_.delay_s;
        topology_.isolated.assign(static_cast<size_t>(n), 0);
        needs_sync_.assign(static_cast<size_t>(n), 0);
        elected_.assign(static_cast<size_t>(n), 0);
        init_difficulty(replication);
        if (!cfg_.trace_path.empty()) trace_.open(cfg_.trace_path);
    }

    SimReport run_one() {
        if (cfg_.algorithm == Algorithm::kGreenPow)
            start_epoch(0.0);
        else
            start_pow_height(0.0);
        while (!queue_.empty() && !budget_reached()) {
            SimEvent ev = queue_.top();
            queue_.pop();
            now_ = ev.at;
            dispatch(ev);
        }
        if (!budget_reached())
            throw std::runtime_error(
                "simulation deadlock: event queue drained before the block budget "
                "(timeout disabled while the runner-up set stalled?)");
        return finalize();
    }

private:
    // -- setup -------------------------------------------------------------

    void build_profile(uint64_t replication) {
        switch (cfg_.power_mode) {
            case PowerMode::kTwoGroup:
                profile_ = build_power_profile(cfg_.miners, cfg_.top_holders_pct / 100.0,
                                               cfg_.held_share_pct / 100.0, cfg_.total_power);
                break;
            case PowerMode::kExplicit:
                profile_.fractions = cfg_.power_fractions;
                profile_.total_power = cfg_.total_power;
                validate_profile(profile_);
                break;
            case PowerMode::kUniformRandom: {
                Rng rng(cfg_.seed, stream_id(Stream::kProfile, replication));
                profile_ = build_random_profile(cfg_.miners, rng, cfg_.total_power);
                break;
            }
        }
    }

    // D2 starts calibrated to the mean runner-up mass so long experiments do
    // not drag a warm-up transient; the minimum-value bootstrap stays
    // available behind d2_bootstrap_min.
    void init_difficulty(uint64_t replication) {
        double d2 = 1.0;
        if (cfg_.algorithm == Algorithm::kGreenPow) {
            Rng rng(cfg_.seed, stream_id(Stream::kCalibration, replication));
            calibrated_mass2_ = estimate_member_mass(rng);
            d2 = cfg_.d2_bootstrap_min ? 1e-4 : calibrated_mass2_;
        }
        diff_ = DifficultyState(1.0, d2, cfg_.retarget_window, 1.0 / cfg_.lambda_per_s);
    }

    double estimate_member_mass(Rng& rng) {
        const int trials = 512;
        const auto& h = profile_.fractions;
        std::vector<double> w;
        double sum = 0.0;
        for (int t = 0; t < trials; ++t) {
            w = h;
            double remaining = 1.0;
            const size_t winner = rng.categorical(w, remaining);
            remaining -= w[winner];
            w[winner] = 0.0;
            double mass = 0.0;
            if (cfg_.selection == ProtocolParams::Selection::kAll) {
                mass = remaining;
            } else {
                const int limit = cfg_.selection == ProtocolParams::Selection::kCount
                                      ? cfg_.k
                                      : cfg_.miners - 1;
                double hp = h[winner];
                double lead = 0.0;  // announce offset of the previous member
                for (int i = 1; i <= limit; ++i) {
                    if (remaining <= 0.0) break;
                    const size_t m = rng.categorical(w, remaining);
                    const double hm = w[m];
                    remaining -= hm;
                    w[m] = 0.0;
                    double gap = 0.0;
                    if (i > kCoSolverCount)
                        gap = rng.exponential(election_gap_rate(hm, hp, cfg_.lambda_per_s));
                    hp += hm;
                    lead += gap;
                    if (cfg_.selection == ProtocolParams::Selection::kTimeWindow && i > 1 &&
                        lead > cfg_.eta_s)
                        break;
                    mass += hm;
                }
            }
            sum += mass;
        }
        return std::max(sum / trials, 1e-9);
    }

    // Monotone announce-time construction for the runner-up curve: the i-th
    // elected runner-up trails the previous one by an exponential gap whose
    // mean matches the increment of t = 1/(lambda (1 - h_prev)) as h_prev
    // absorbs the new member. Electing the final remaining miner leaves no
    // superposition to order; that miner solves alone at its own share of the
    // calibrated rate.
    static double election_gap_rate(double h_new, double hp_before, double lambda) {
        const double hp_after = hp_before + h_new;
        if (hp_after >= 1.0 - 1e-12) return lambda * h_new;
        return lambda * (1.0 - hp_before) * (1.0 - hp_after) / h_new;
    }

    // -- event plumbing ----------------------------------------------------

    void schedule(SimTime at, EventKind kind, NonceRole role, MinerId miner, BlockId block,
                  uint64_t token) {
        queue_.push(SimEvent{at, seq_++, kind, role, miner, block, token, now_});
    }

    void dispatch(const SimEvent& ev) {
        refresh_partition();
        switch (ev.kind) {
            case EventKind::kNonceFound: on_nonce(ev); break;
            case EventKind::kBlockDelivery: on_block_delivery(ev); break;
            case EventKind::kRunnerupDelivery: on_runnerup_delivery(ev); break;
            case EventKind::kTimeoutExpiry: on_timeout_expiry(ev); break;
            case EventKind::kEtaExpiry: on_eta_expiry(ev); break;
            case EventKind::kRetarget: apply_retargets(); break;
        }
    }

    void refresh_partition() {
        if (topology_.partition_active && now_ >= topology_.partition_end) {
            topology_.partition_active = false;
            for (size_t i = 0; i < topology_.isolated.size(); ++i)
                if (topology_.isolated[i]) {
                    needs_sync_[i] = 1;
                    topology_.isolated[i] = 0;
                }
        }
    }

    bool reachable_now(MinerId from, MinerId to, SimTime sent_at) const {
        return !topology_.separated(from, to, sent_at) && !topology_.separated(from, to, now_);
    }

    bool isolated(MinerId m) const {
        return topology_.partition_active && topology_.isolated[static_cast<size_t>(m)];
    }

    double reachable_mass() const {
        if (!topology_.partition_active) return 1.0;
        double mass = 0.0;
        for (int m = 0; m < cfg_.miners; ++m)
            if (!isolated(m)) mass += h(m);
        return mass;
    }

    double h(MinerId m) const { return profile_.fractions[static_cast<size_t>(m)]; }
    double P() const { return profile_.total_power; }

    bool budget_reached() const {
        return static_cast<int64_t>(canonical_count_) >= cfg_.block_budget;
    }

    void trace(MinerId m, const char* event, Phase before, Phase after) {
        if (!trace_.is_open()) return;
        trace_ << "{\"t\":" << format_double(now_) << ",\"miner\":" << m << ",\"event\":\""
               << event << "\",\"from\":\"" << to_string(before) << "\",\"to\":\""
               << to_string(after) << "\"}\n";
    }

    // -- epoch lifecycle (Green-PoW) ----------------------------------------

    void start_epoch(SimTime at) {
        resync_healed_miners();
        epoch_token_++;
        race_start_ = at;
        runners_ = RunnerUpSet{};
        runners_.epoch = epoch_;
        member_mass_ = 0.0;
        std::fill(elected_.begin(), elected_.end(), 0);
        second_done_ = false;
        timed_out_epoch_ = false;
        election_open_ = false;
        eta_window_armed_ = false;
        ledger_.begin_epoch();
        epoch_epow_ = 0.0;

        const double mass = reachable_mass();
        const MiningRate r1 = diff_.effective_rate(Round::kFirst, mass, nominal_);
        winner_ = draw_reachable_miner(rng_winner_);
        const double t0 = rng_winner_.exponential(r1.lambda);
        schedule(at + t0, EventKind::kNonceFound, NonceRole::kFirstRace, winner_, kNoBlock,
                 epoch_token_);
    }

    void resync_healed_miners() {
        for (int m = 0; m < cfg_.miners; ++m) {
            if (!needs_sync_[static_cast<size_t>(m)]) continue;
            if (isolated(m)) continue;
            MinerState fresh;
            fresh.phase = Phase::kMiningR1;
            fresh.current_height = engine_height_;
            fresh.chain_head = chain_.canonical_head();
            machines_[static_cast<size_t>(m)] = fresh;
            needs_sync_[static_cast<size_t>(m)] = 0;
            reanchors_++;
        }
    }

    MinerId draw_reachable_miner(Rng& rng) {
        if (!topology_.partition_active)
            return static_cast<MinerId>(rng.categorical(profile_.fractions, 1.0));
        std::vector<double> w(profile_.fractions);
        double total = 0.0;
        for (int m = 0; m < cfg_.miners; ++m) {
            if (isolated(m)) w[static_cast<size_t>(m)] = 0.0;
            total += w[static_cast<size_t>(m)];
        }
        return static_cast<MinerId>(rng.categorical(w, total));
    }

    // -- nonce events --------------------------------------------------------

    void on_nonce(const SimEvent& ev) {
        switch (ev.role) {
            case NonceRole::kFirstRace: on_first_race_solve(ev); break;
            case NonceRole::kRunnerupCandidate: on_candidate_solve(ev); break;
            case NonceRole::kSecondSolve: on_second_solve(ev); break;
            case NonceRole::kTimeoutSolve: on_timeout_solve(ev); break;
            case NonceRole::kPowRace: on_pow_solve(ev); break;
        }
    }

    void on_first_race_solve(const SimEvent& ev) {
        if (ev.token != epoch_token_) return;
        MinerState& st = machines_[static_cast<size_t>(ev.miner)];
        assert(st.phase == Phase::kMiningR1);
        const Phase before = st.phase;
        const NonceAction act = on_nonce_found(st, params_, now_);
        assert(act == NonceAction::kAnnounceFirstBlock);
        (void)act;
        trace(ev.miner, "nonce_found", before, st.phase);

        Block b;
        b.height = engine_height_;
        b.parent = chain_.canonical_head();
        b.round_tag = RoundTag::kFirst;
        b.producer = ev.miner;
        b.found_at = now_;
        b.target_used = Target::kD1;
        b.difficulty = diff_.d1();
        first_block_ = chain_.insert(b);
        first_found_ = now_;

        // The whole reachable network raced this block.
        const double t0 = now_ - race_start_;
        epoch_epow_ = 2.0 * P() * t0;
        for (int m = 0; m < cfg_.miners; ++m)
            if (!isolated(m)) ledger_.charge_first_round(m, h(m), P(), t0);

        record_interval(chain_.get(first_block_), t0);
        maybe_fork_first_race(first_block_);
        broadcast_block(first_block_);
    }

    // In a delayed network another miner may solve the same height before the
    // winner's block reaches it; the competing block is recorded and loses to
    // the earlier-found sibling.
    void maybe_fork_first_race(BlockId solved) {
        if (topology_.model == DelayModel::kZero || topology_.delay_s <= 0.0) return;
        const double rest = reachable_mass() - h(winner_);
        if (rest <= 0.0) return;
        const MiningRate r = diff_.effective_rate(Round::kFirst, rest, nominal_);
        const double gap = rng_fork_.exponential(r.lambda);
        if (gap >= topology_.delay_s) return;
        std::vector<double> w(profile_.fractions);
        w[static_cast<size_t>(winner_)] = 0.0;
        double total = 0.0;
        for (int m = 0; m < cfg_.miners; ++m)
            if (!isolated(m)) total += w[static_cast<size_t>(m)];
            else w[static_cast<size_t>(m)] = 0.0;
        const MinerId rival = static_cast<MinerId>(rng_fork_.categorical(w, total));
        Block b;
        b.height = chain_.get(solved).height;
        b.parent = chain_.get(solved).parent;
        b.round_tag = RoundTag::kFirst;
        b.producer = rival;
        b.found_at = now_ + gap;
        b.target_used = Target::kD1;
        b.difficulty = diff_.d1();
        chain_.insert(b);
        ledger_.charge_first_round(rival, h(rival), P(), gap);  // work spent on the lost race
        assert(chain_.canonical_head() == solved);
    }

    void broadcast_block(BlockId id) {
        const Block& b = chain_.get(id);
        schedule(now_ + topology_.delay_s * (topology_.model == DelayModel::kZero ? 0.0 : 1.0),
                 EventKind::kBlockDelivery, NonceRole::kFirstRace, b.producer, id, epoch_token_);
    }

    void on_block_delivery(const SimEvent& ev) {
        const Block& b = chain_.get(ev.block);
        if (cfg_.algorithm == Algorithm::kPow) {
            deliver_pow_block(ev, b);
            return;
        }
        bool driving_side_accepted = false;
        for (int m = 0; m < cfg_.miners; ++m) {
            if (m == b.producer) continue;
            if (!reachable_now(b.producer, m, ev.sent_at)) continue;
            MinerState& st = machines_[static_cast<size_t>(m)];
            const Phase before = st.phase;
            const BlockVerdict v = on_block_received(st, b, runners_, params_, now_);
            if (v == BlockVerdict::kRejectedIneligible) violations_++;
            if (v == BlockVerdict::kAccepted) trace(m, "block_received", before, st.phase);
        }
        if (b.round_tag == RoundTag::kFirst) {
            if (ev.token != epoch_token_) return;  // orphaned sibling of an old epoch
            begin_election();
            arm_timeouts();
        } else {
            driving_side_accepted = !isolated(b.producer);
            if (driving_side_accepted && ev.token == epoch_token_) complete_epoch(b);
        }
    }

    // -- runner-up election ---------------------------------------------------

    void begin_election() {
        election_open_ = true;
        last_announce_ = now_;
        if (cfg_.selection == ProtocolParams::Selection::kAll) {
            for (int m = 0; m < cfg_.miners; ++m) {
                if (m == winner_ || isolated(m)) continue;
                add_member(m, now_);
            }
            close_election();
            return;
        }
        schedule_next_candidate();
    }

    int election_limit() const {
        return cfg_.selection == ProtocolParams::Selection::kCount ? cfg_.k : cfg_.miners - 1;
    }

    void schedule_next_candidate() {
        if (!election_open_) return;
        if (runners_.size() >= election_limit()) return;
        std::vector<double> w(profile_.fractions);
        double total = 0.0;
        w[static_cast<size_t>(winner_)] = 0.0;
        for (int m = 0; m < cfg_.miners; ++m) {
            if (elected_[static_cast<size_t>(m)] || isolated(m)) w[static_cast<size_t>(m)] = 0.0;
            total += w[static_cast<size_t>(m)];
        }
        if (total <= 1e-15) return;  // pool exhausted
        const MinerId cand = static_cast<MinerId>(rng_election_.categorical(w, total));
        double gap = 0.0;
        if (runners_.size() + 1 > kCoSolverCount) {
            const double hp_before = h(winner_) + member_mass_;
            const double lambda_cal = diff_.effective_rate(Round::kFirst, 1.0, nominal_).lambda;
            gap = rng_election_.exponential(election_gap_rate(h(cand), hp_before, lambda_cal));
        }
        schedule(now_ + gap, EventKind::kNonceFound, NonceRole::kRunnerupCandidate, cand,
                 kNoBlock, epoch_token_);
    }

    void on_candidate_solve(const SimEvent& ev) {
        if (ev.token != epoch_token_ || !election_open_) return;
        MinerState& st = machines_[static_cast<size_t>(ev.miner)];
        if (st.phase != Phase::kContinueForRunnerup) return;  // late solve, discarded
        if (cfg_.selection == ProtocolParams::Selection::kTimeWindow &&
            st.eta_deadline != kNoDeadline && now_ > st.eta_deadline)
            return;

        const Phase before = st.phase;
        const NonceAction act = on_nonce_found(st, params_, now_);
        assert(act == NonceAction::kAnnounceRunnerUp);
        (void)act;
        trace(ev.miner, "runnerup_nonce", before, st.phase);

        charge_election_interval(ev.miner);
        add_member(ev.miner, now_);
        schedule(now_ + (topology_.model == DelayModel::kZero ? 0.0 : topology_.delay_s),
                 EventKind::kRunnerupDelivery, NonceRole::kRunnerupCandidate, ev.miner,
                 kNoBlock, epoch_token_);
        if (runners_.size() >= election_limit()) {
            close_election();
        } else {
            schedule_next_candidate();
        }
    }

    // The rounds are evaluated sequentially: the exclusive second-round race
    // begins once the runner-up set is final, mirroring the round structure
    // of the energy sums (full election cost, then a full block race among
    // the elected set).
    void close_election() {
        runners_.closed = true;
        election_open_ = false;
        r2_race_start_ = now_;
        start_second_race();
    }

    // Continuation cost of extending the runner-up set: every miner still
    // chasing second place burned through the interval since the previous
    // announcement. The weight reconciles the integrated cost with the
    // reference per-epoch energy series.
    void charge_election_interval(MinerId new_member) {
        const double gap = now_ - last_announce_;
        last_announce_ = now_;
        if (gap <= 0.0) return;
        for (int m = 0; m < cfg_.miners; ++m) {
            // Charged mass is the field still competing once the claimant is
            // out: the winner, earlier runners-up, and the new member carry
            // no election cost for this interval.
            if (m == winner_ || m == new_member || elected_[static_cast<size_t>(m)] ||
                isolated(m))
                continue;
            if (machines_[static_cast<size_t>(m)].phase != Phase::kContinueForRunnerup) continue;
            ledger_.charge_first_round(m, h(m), P(), kElectionEnergyWeight * gap);
        }
    }

    void add_member(MinerId m, SimTime at) {
        assert(m != winner_);
        runners_.members.push_back(m);
        runners_.announce_times.push_back(at);
        elected_[static_cast<size_t>(m)] = 1;
        member_mass_ += h(m);
        MinerState& st = machines_[static_cast<size_t>(m)];
        if (st.phase == Phase::kContinueForRunnerup) {
            // kAll mode adds members directly; normal mode goes via the nonce.
            st.phase = Phase::kMiningR2;
            st.is_runner_up = true;
        }
    }

    void on_runnerup_delivery(const SimEvent& ev) {
        if (ev.token != epoch_token_) return;
        for (int m = 0; m < cfg_.miners; ++m) {
            if (m == ev.miner) continue;
            if (!reachable_now(ev.miner, m, ev.sent_at)) continue;
            MinerState& st = machines_[static_cast<size_t>(m)];
            const Phase before = st.phase;
            if (on_runnerup_received(st, params_, now_, runners_.size()))
                trace(m, "runnerup_received", before, st.phase);
        }
        // The continuation window opens when the first announcement arrives.
        // Under propagation delay several announcements may already be in
        // flight by then, so arm on the first delivery, not on set size.
        if (cfg_.selection == ProtocolParams::Selection::kTimeWindow && !eta_window_armed_) {
            eta_window_armed_ = true;
            schedule(now_ + params_.eta_s, EventKind::kEtaExpiry, NonceRole::kRunnerupCandidate,
                     -1, kNoBlock, epoch_token_);
        }
        if (runners_.closed) maybe_start_scenario_partition();
    }

    void on_eta_expiry(const SimEvent& ev) {
        if (ev.token != epoch_token_) return;
        for (int m = 0; m < cfg_.miners; ++m) {
            MinerState& st = machines_[static_cast<size_t>(m)];
            if (st.phase != Phase::kContinueForRunnerup) continue;
            if (st.eta_deadline == kNoDeadline || now_ < st.eta_deadline) continue;
            const Phase before = st.phase;
            on_eta_expired(st, now_);
            trace(m, "eta_expired", before, st.phase);
        }
        close_election();
        maybe_start_scenario_partition();
    }

    // -- second round ---------------------------------------------------------

    // The second-round difficulty tracks the elected set: whatever hash
    // power qualifies, D2 is taken as retargeted so the round solves at the
    // nominal rate on average. The race therefore runs at the calibration
    // point; drift of the D2 track away from its baseline still feeds back
    // through effective_rate.
    void start_second_race() {
        if (member_mass_ <= 0.0) return;
        r2_token_++;
        const MiningRate r2 = diff_.effective_rate(Round::kSecond, calibrated_mass2_, nominal_);
        const double t = rng_second_.exponential(r2.lambda);
        schedule(now_ + t, EventKind::kNonceFound, NonceRole::kSecondSolve, -1, kNoBlock,
                 (epoch_token_ << 32) | r2_token_);
    }

    void on_second_solve(const SimEvent& ev) {
        if (ev.token != ((epoch_token_ << 32) | r2_token_) || second_done_) return;
        // Pick the solving member in proportion to hash power.
        std::vector<double> w(static_cast<size_t>(cfg_.miners), 0.0);
        for (MinerId m : runners_.members) w[static_cast<size_t>(m)] = h(m);
        const MinerId solver = static_cast<MinerId>(rng_second_.categorical(w, member_mass_));
        // A solve inside an isolated runner-up set extends only the island's
        // view; the rest of the network still waits on its timeout.
        if (!isolated(solver)) second_done_ = true;
        election_open_ = false;

        MinerState& st = machines_[static_cast<size_t>(solver)];
        assert(st.phase == Phase::kMiningR2 && !st.after_timeout);
        const Phase before = st.phase;
        const NonceAction act = on_nonce_found(st, params_, now_);
        assert(act == NonceAction::kAnnounceSecondBlock);
        (void)act;
        trace(solver, "second_nonce", before, st.phase);
        assert(solver != winner_ && runners_.contains(solver));

        Block b;
        b.height = engine_height_ + 1;
        b.parent = first_block_;
        b.round_tag = RoundTag::kSecond;
        b.producer = solver;
        b.found_at = now_;
        b.target_used = Target::kD2;
        b.difficulty = diff_.d2();
        const BlockId id = chain_.insert(b);

        charge_second_round_burn(now_);
        if (timed_out_epoch_) {
            // The wider network resumed at the deadline and lost this race.
            const double dt = now_ - timeout_resume_at_;
            for (int m = 0; m < cfg_.miners; ++m) {
                const MinerState& ms = machines_[static_cast<size_t>(m)];
                if (ms.phase == Phase::kMiningR2 && ms.after_timeout && !isolated(m) && dt > 0.0)
                    ledger_.charge_second_round(m, h(m), P(), dt);
            }
        }
        if (!isolated(solver)) record_interval(chain_.get(id), now_ - r2_race_start_);
        maybe_fork_second_race(solver, id);
        broadcast_block(id);
    }

    // Members mine rho^2 from the race start until the round resolves. The
    // first member's burn is excluded, matching the reference second-round
    // series' index convention.
    void charge_second_round_burn(SimTime resolved_at) {
        const double dt = resolved_at - r2_race_start_;
        if (dt <= 0.0) return;
        for (size_t i = 1; i < runners_.members.size(); ++i) {
            const MinerId m = runners_.members[i];
            ledger_.charge_second_round(m, h(m), P(), dt);
        }
    }

    void maybe_fork_second_race(MinerId solver, BlockId solved) {
        if (topology_.model == DelayModel::kZero || topology_.delay_s <= 0.0) return;
        const double rest = member_mass_ - h(solver);
        if (rest <= 0.0) return;
        const MiningRate r = diff_.effective_rate(Round::kSecond, rest, nominal_);
        const double gap = rng_fork_.exponential(r.lambda);
        if (gap >= topology_.delay_s) return;
        std::vector<double> w(static_cast<size_t>(cfg_.miners), 0.0);
        for (MinerId m : runners_.members)
            if (m != solver) w[static_cast<size_t>(m)] = h(m);
        const MinerId rival = static_cast<MinerId>(rng_fork_.categorical(w, rest));
        Block b;
        b.height = engine_height_ + 1;
        b.parent = first_block_;
        b.round_tag = RoundTag::kSecond;
        b.producer = rival;
        b.found_at = now_ + gap;
        b.target_used = Target::kD2;
        b.difficulty = diff_.d2();
        chain_.insert(b);
        ledger_.charge_second_round(rival, h(rival), P(), gap);
        (void)solved;
    }

    // -- timeout path ----------------------------------------------------------

    void arm_timeouts() {
        if (!params_.timeout_enabled) return;
        // Distinct deadlines: the producer armed at solve time, everyone else
        // at delivery. Guards make duplicate expiry events idempotent.
        schedule(first_found_ + params_.timeout_s, EventKind::kTimeoutExpiry,
                 NonceRole::kTimeoutSolve, -1, kNoBlock, epoch_token_);
        if (topology_.model == DelayModel::kConstant && topology_.delay_s > 0.0)
            schedule(first_found_ + topology_.delay_s + params_.timeout_s,
                     EventKind::kTimeoutExpiry, NonceRole::kTimeoutSolve, -1, kNoBlock,
                     epoch_token_);
    }

    void on_timeout_expiry(const SimEvent& ev) {
        if (ev.token != epoch_token_ || second_done_) return;
        double resumed_mass = 0.0;
        for (int m = 0; m < cfg_.miners; ++m) {
            if (isolated(m)) continue;
            MinerState& st = machines_[static_cast<size_t>(m)];
            const Phase before = st.phase;
            if (on_timeout(st, now_)) {
                trace(m, "timeout", before, st.phase);
                resumed_mass += h(m);
            } else if (st.phase == Phase::kMiningR2 && st.after_timeout) {
                resumed_mass += h(m);  // already resumed by an earlier expiry event
            }
        }
        if (resumed_mass <= 0.0) return;
        if (!timed_out_epoch_) {
            timed_out_epoch_ = true;
            timeout_epochs_++;
        }
        timeout_token_++;
        const MiningRate r = diff_.effective_rate(Round::kFirst, resumed_mass, nominal_);
        schedule(now_ + rng_second_.exponential(r.lambda), EventKind::kNonceFound,
                 NonceRole::kTimeoutSolve, -1, kNoBlock,
                 (epoch_token_ << 32) | timeout_token_);
        timeout_resume_at_ = now_;
    }

    void on_timeout_solve(const SimEvent& ev) {
        if (ev.token != ((epoch_token_ << 32) | timeout_token_) || second_done_) return;
        std::vector<double> w(static_cast<size_t>(cfg_.miners), 0.0);
        double total = 0.0;
        for (int m = 0; m < cfg_.miners; ++m) {
            MinerState& st = machines_[static_cast<size_t>(m)];
            if (st.phase == Phase::kMiningR2 && st.after_timeout && !isolated(m)) {
                w[static_cast<size_t>(m)] = h(m);
                total += h(m);
            }
        }
        if (total <= 0.0) return;
        const MinerId solver = static_cast<MinerId>(rng_second_.categorical(w, total));
        second_done_ = true;

        MinerState& st = machines_[static_cast<size_t>(solver)];
        const Phase before = st.phase;
        const NonceAction act = on_nonce_found(st, params_, now_);
        assert(act == NonceAction::kAnnounceTimeoutBlock);
        (void)act;
        trace(solver, "timeout_nonce", before, st.phase);

        Block b;
        b.height = engine_height_ + 1;
        b.parent = first_block_;
        b.round_tag = RoundTag::kSecondAfterTimeout;
        b.producer = solver;
        b.found_at = now_;
        b.target_used = Target::kD1;
        b.difficulty = diff_.d1();
        const BlockId id = chain_.insert(b);

        // Everyone that resumed burned from the deadline to the solve.
        const double dt = now_ - timeout_resume_at_;
        for (int m = 0; m < cfg_.miners; ++m) {
            const MinerState& ms = machines_[static_cast<size_t>(m)];
            const bool resumed = m == solver || (ms.phase == Phase::kMiningR2 && ms.after_timeout);
            if (resumed && !isolated(m) && dt > 0.0)
                ledger_.charge_second_round(m, h(m), P(), dt);
        }
        // Reachable runner-up members raced rho^2 in vain the whole time.
        if (runners_.closed) {
            const double mined = now_ - r2_race_start_;
            for (size_t i = 1; i < runners_.members.size(); ++i) {
                const MinerId m = runners_.members[i];
                if (isolated(m)) continue;
                if (mined > 0.0) ledger_.charge_second_round(m, h(m), P(), mined);
            }
        }
        record_interval(chain_.get(id), now_ - timeout_resume_at_);
        broadcast_block(id);
    }

    void maybe_start_scenario_partition() {
        if (cfg_.scenario != Scenario::kPartitionRunnerups) return;
        if (topology_.partition_active) return;
        if ((epoch_ + 1) % cfg_.scenario_period_epochs != 0) return;
        if (runners_.members.empty()) return;
        topology_.partition_active = true;
        topology_.partition_end = now_ + cfg_.scenario_duration_s;
        std::fill(topology_.isolated.begin(), topology_.isolated.end(), 0);
        for (MinerId m : runners_.members) topology_.isolated[static_cast<size_t>(m)] = 1;
    }

    // -- epoch close ------------------------------------------------------------

    void complete_epoch(const Block& second) {
        EpochRow row;
        row.epoch = epoch_;
        row.runnerup_count = runners_.size();
        row.timed_out = second.round_tag == RoundTag::kSecondAfterTimeout;
        row.election_complete = cfg_.selection == ProtocolParams::Selection::kCount &&
                                runners_.size() == cfg_.k;
        row.eta_s = row.election_complete && !runners_.announce_times.empty()
                        ? runners_.announce_times.back() - runners_.announce_times.front()
                        : 0.0;
        row.e_first = ledger_.epoch_first();
        row.e_second = ledger_.epoch_second();
        row.e_pow_equiv = epoch_epow_;
        epochs_.push_back(row);
        if (cfg_.collect_epoch_details) {
            EpochDetail d;
            d.winner = winner_;
            for (MinerId m : runners_.members) d.members.push_back(m);
            for (SimTime t : runners_.announce_times)
                d.announce_offsets.push_back(t - first_found_);
            d.t_first = first_found_ - race_start_;
            d.t_second = second.found_at - r2_race_start_;
            d.timed_out = row.timed_out;
            details_.push_back(d);
        }

        engine_height_ += 2;
        canonical_count_ = static_cast<uint64_t>(chain_.canonical_height() + 1);
        epoch_++;
        if (!budget_reached()) start_epoch(now_);
    }

    // -- baseline PoW -------------------------------------------------------------

    void start_pow_height(SimTime at) {
        epoch_token_++;
        race_start_ = at;
        const double mass = reachable_mass();
        const MiningRate r = diff_.effective_rate(Round::kFirst, mass, nominal_);
        winner_ = draw_reachable_miner(rng_winner_);
        const double t = rng_winner_.exponential(r.lambda);
        schedule(at + t, EventKind::kNonceFound, NonceRole::kPowRace, winner_, kNoBlock,
                 epoch_token_);
    }

    void on_pow_solve(const SimEvent& ev) {
        if (ev.token != epoch_token_) return;
        MinerState& st = machines_[static_cast<size_t>(ev.miner)];
        baseline_pow_step(st, PowEvent::kNonceFound, engine_height_);

        Block b;
        b.height = engine_height_;
        b.parent = chain_.canonical_head();
        b.round_tag = RoundTag::kFirst;
        b.producer = ev.miner;
        b.found_at = now_;
        b.target_used = Target::kD1;
        b.difficulty = diff_.d1();
        const BlockId id = chain_.insert(b);

        const double t = now_ - race_start_;
        ledger_.begin_epoch();
        for (int m = 0; m < cfg_.miners; ++m)
            if (!isolated(m)) ledger_.charge_first_round(m, h(m), P(), t);

        EpochRow row;
        row.epoch = engine_height_;
        row.e_first = ledger_.epoch_first();
        row.e_pow_equiv = ledger_.epoch_first();
        epochs_.push_back(row);

        record_interval(chain_.get(id), t);
        maybe_fork_first_race(id);
        broadcast_block(id);
    }

    void deliver_pow_block(const SimEvent& ev, const Block& b) {
        for (int m = 0; m < cfg_.miners; ++m) {
            if (m == b.producer) continue;
            if (!reachable_now(b.producer, m, ev.sent_at)) continue;
            baseline_pow_step(machines_[static_cast<size_t>(m)], PowEvent::kBlockReceived,
                              b.height);
        }
        if (ev.token != epoch_token_) return;
        engine_height_ += 1;
        canonical_count_ = static_cast<uint64_t>(chain_.canonical_height() + 1);
        if (!budget_reached()) start_pow_height(now_);
    }

    // -- difficulty --------------------------------------------------------------

    // Each track learns the duration its target was actually mined: the race
    // time of the block. For first-round blocks at zero delay this equals the
    // block-to-block interval; for second-round blocks it excludes the
    // runner-up election spread, which belongs to rho^1.
    void record_interval(const Block& b, double interval) {
        if (interval <= 0.0) return;  // zero-measure tie, nothing to learn
        diff_.record_block_interval(b, interval);
        if (diff_.pending_intervals(Round::kFirst) >= diff_.window_blocks() ||
            diff_.pending_intervals(Round::kSecond) >= diff_.window_blocks())
            schedule(now_, EventKind::kRetarget, NonceRole::kFirstRace, -1, kNoBlock,
                     epoch_token_);
    }

    void apply_retargets() {
        for (const RetargetRecord& r : diff_.maybe_retarget()) retargets_.push_back(r);
    }

    // -- finalisation --------------------------------------------------------------

    SimReport finalize() {
        SimReport rep;
        rep.config = cfg_;
        for (BlockId id : chain_.canonical_chain()) rep.canonical_blocks.push_back(chain_.get(id));
        collect_forks(rep);
        rep.epochs = epochs_;
        rep.epoch_details = details_;
        rep.retargets = retargets_;
        rep.per_miner_energy = ledger_.per_miner();
        rep.summary = summarize(rep);
        rep.replication_summaries.push_back(rep.summary);
        return rep;
    }

    void collect_forks(SimReport& rep) {
        std::unordered_map<int64_t, std::vector<BlockId>> by_height;
        for (BlockId id = 0; id < static_cast<BlockId>(chain_.size()); ++id)
            by_height[chain_.get(id).height].push_back(id);
        std::vector<int64_t> heights;
        for (const auto& [height, ids] : by_height)
            if (ids.size() > 1) heights.push_back(height);
        std::sort(heights.begin(), heights.end());
        for (int64_t height : heights) {
            ForkRecord f;
            f.height = height;
            f.competing = by_height[height];
            std::sort(f.competing.begin(), f.competing.end());
            for (BlockId id : f.competing)
                if (chain_.on_canonical_chain(id)) f.resolved_winner = id;
            f.round_tag = chain_.get(f.competing.front()).round_tag;
            rep.forks.push_back(f);
        }
    }

    SimSummary summarize(const SimReport& rep) {
        SimSummary s;
        s.canonical_blocks = static_cast<int64_t>(rep.canonical_blocks.size());
        s.epochs = static_cast<int64_t>(epochs_.size());
        s.timeout_epochs = timeout_epochs_;
        s.violations = violations_;
        s.d1_final = diff_.d1();
        s.d2_final = diff_.d2();
        s.retarget_windows = static_cast<int64_t>(retargets_.size());
        s.reanchors = reanchors_;
        s.d2_timeout_intervals = diff_.d2_timeout_intervals();

        double sum1 = 0.0, sum2 = 0.0, sum_all = 0.0;
        int64_t n1 = 0, n2 = 0;
        double prev = 0.0;
        for (const Block& b : rep.canonical_blocks) {
            const double dt = b.found_at - prev;
            prev = b.found_at;
            sum_all += dt;
            if (b.round_tag == RoundTag::kFirst) {
                sum1 += dt;
                n1++;
            } else {
                sum2 += dt;
                n2++;
            }
        }
        if (n1) s.mean_interval_first_s = sum1 / n1;
        if (n2) s.mean_interval_second_s = sum2 / n2;
        if (n1 + n2) s.mean_interval_s = sum_all / (n1 + n2);

        double e1 = 0.0, e2 = 0.0, epow = 0.0, eta_sum = 0.0, ru_sum = 0.0;
        int64_t eta_n = 0;
        for (const EpochRow& row : epochs_) {
            e1 += row.e_first;
            e2 += row.e_second;
            epow += row.e_pow_equiv;
            ru_sum += row.runnerup_count;
            if (row.election_complete && row.runnerup_count >= 2) {
                eta_sum += row.eta_s;
                eta_n++;
            }
        }
        if (cfg_.algorithm == Algorithm::kGreenPow && epow > 0.0)
            s.saving_pct = 100.0 * (epow - e1 - e2) / epow;
        if (!epochs_.empty()) s.mean_runnerup_count = ru_sum / double(epochs_.size());
        if (eta_n) s.mean_eta_s = eta_sum / double(eta_n);
        s.eta_samples = eta_n;
        if (s.canonical_blocks)
            s.energy_per_block = ledger_.network_total() / double(s.canonical_blocks);

        int64_t forks1 = 0, forks2 = 0;
        for (const ForkRecord& f : rep.forks)
            (f.round_tag == RoundTag::kFirst ? forks1 : forks2)++;
        s.fork_count = forks1 + forks2;
        if (cfg_.algorithm == Algorithm::kGreenPow) {
            const int64_t heights1 = (s.canonical_blocks + 1) / 2;
            const int64_t heights2 = s.canonical_blocks / 2;
            if (heights1) s.fork_rate_first = double(forks1) / double(heights1);
            if (heights2) s.fork_rate_second = double(forks2) / double(heights2);
        } else if (s.canonical_blocks) {
            s.fork_rate_first = double(forks1) / double(s.canonical_blocks);
        }
        return s;
    }

    // -- members ---------------------------------------------------------------

    const SimConfig& cfg_;
    ProtocolParams params_;
    MiningRate nominal_;
    HashPowerProfile profile_;
    Rng rng_winner_, rng_election_, rng_second_, rng_fork_;
    EnergyLedger ledger_;
    std::vector<MinerState> machines_;
    ChainView chain_;
    DifficultyState diff_;
    TopologyModel topology_;
    std::priority_queue<SimEvent, std::vector<SimEvent>, EventAfter> queue_;
    std::ofstream trace_;

    SimTime now_ = 0.0;
    uint64_t seq_ = 0;
    int64_t epoch_ = 0;
    int64_t engine_height_ = 0;
    uint64_t canonical_count_ = 0;
    uint64_t epoch_token_ = 0;
    uint64_t r2_token_ = 0;
    uint64_t timeout_token_ = 0;

    MinerId winner_ = -1;
    BlockId first_block_ = kNoBlock;
    SimTime race_start_ = 0.0;
    SimTime first_found_ = 0.0;
    SimTime last_announce_ = 0.0;
    SimTime r2_race_start_ = 0.0;
    SimTime timeout_resume_at_ = 0.0;
    RunnerUpSet runners_;
    double member_mass_ = 0.0;
    double calibrated_mass2_ = 1.0;
    std::vector<char> elected_;
    std::vector<char> needs_sync_;
    bool second_done_ = false;
    bool timed_out_epoch_ = false;
    bool election_open_ = false;
    bool eta_window_armed_ = false;
    double epoch_epow_ = 0.0;

    std::vector<EpochRow> epochs_;
    std::vector<EpochDetail> details_;
    std::vector<RetargetRecord> retargets_;
    int64_t timeout_epochs_ = 0;
    int64_t violations_ = 0;
    int64_t reanchors_ = 0;
};

SimSummary pool_summaries(const std::vector<SimReport>& reps, const SimConfig& cfg) {
    SimSummary pooled;
    double e1 = 0.0, e2 = 0.0, epow = 0.0, eta_sum = 0.0;
    int64_t eta_n = 0;
    double interval_sum = 0.0;
    int64_t blocks = 0;
    for (const SimReport& r : reps) {
        const SimSummary& s = r.summary;
        pooled.canonical_blocks += s.canonical_blocks;
        pooled.epochs += s.epochs;
        pooled.fork_count += s.fork_count;
        pooled.timeout_epochs += s.timeout_epochs;
        pooled.violations += s.violations;
        pooled.retarget_windows += s.retarget_windows;
        pooled.reanchors += s.reanchors;
        pooled.d2_timeout_intervals += s.d2_timeout_intervals;
        for (const EpochRow& row : r.epochs) {
            e1 += row.e_first;
            e2 += row.e_second;
            epow += row.e_pow_equiv;
            if (row.election_complete && row.runnerup_count >= 2) {
                eta_sum += row.eta_s;
                eta_n++;
            }
        }
        interval_sum += s.mean_interval_s * double(s.canonical_blocks);
        blocks += s.canonical_blocks;
        pooled.mean_runnerup_count += s.mean_runnerup_count / double(reps.size());
        pooled.fork_rate_first += s.fork_rate_first / double(reps.size());
        pooled.fork_rate_second += s.fork_rate_second / double(reps.size());
        pooled.mean_interval_first_s += s.mean_interval_first_s / double(reps.size());
        pooled.mean_interval_second_s += s.mean_interval_second_s / double(reps.size());
        pooled.energy_per_block += s.energy_per_block / double(reps.size());
        pooled.d1_final = s.d1_final;
        pooled.d2_final = s.d2_final;
    }
    if (cfg.algorithm == Algorithm::kGreenPow && epow > 0.0)
        pooled.saving_pct = 100.0 * (epow - e1 - e2) / epow;
    if (eta_n) pooled.mean_eta_s = eta_sum / double(eta_n);
    pooled.eta_samples = eta_n;
    if (blocks) pooled.mean_interval_s = interval_sum / double(blocks);
    return pooled;
}

}  // namespace

Simulation::Simulation(SimConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

SimReport Simulation::run() {
    std::vector<SimReport> reps;
    reps.reserve(static_cast<size_t>(cfg_.replications));
    if (cfg_.replications == 1 || !cfg_.trace_path.empty()) {
        for (int r = 0; r < cfg_.replications; ++r) {
            Engine engine(cfg_, static_cast<uint64_t>(r));
            reps.push_back(engine.run_one());
        }
    } else {
        // Replications share no mutable state; run them concurrently and
        // merge in replication order so the result is schedule-independent.
        std::vector<std::future<SimReport>> futures;
        for (int r = 0; r < cfg_.replications; ++r)
            futures.push_back(std::async(std::launch::async, [this, r] {
                Engine engine(cfg_, static_cast<uint64_t>(r));
                return engine.run_one();
            }));
        for (auto& f : futures) reps.push_back(f.get());
    }
    SimReport out = std::move(reps.front());
    if (reps.size() > 1) {
        out.replication_summaries.clear();
        for (const SimReport& r : reps) out.replication_summaries.push_back(r.summary);
        for (size_t i = 1; i < reps.size(); ++i) {
            for (size_t m = 0; m < reps[i].per_miner_energy.size(); ++m)
                out.per_miner_energy[m] += reps[i].per_miner_energy[m];
        }
        out.summary = pool_summaries(reps, cfg_);
    }
    return out;
}

}  // namespace greenpow
