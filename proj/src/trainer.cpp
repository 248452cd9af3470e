#include "irsalloc/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif
#ifdef __GLIBC__
#include <malloc.h>
#endif

namespace irsalloc {

namespace {

// The update step materializes megabyte-sized gradient and activation
// buffers every iteration. Keep those blocks on the heap instead of letting
// glibc mmap/munmap them each time (default threshold 128 KB), which costs
// more in page faults than the GEMMs themselves.
void tune_allocator() {
#ifdef __GLIBC__
    static const bool once = [] {
        mallopt(M_MMAP_THRESHOLD, 1 << 30);
        mallopt(M_TRIM_THRESHOLD, 1 << 30);
        return true;
    }();
    (void)once;
#endif
}

using json = nlohmann::json;
using steady_clock = std::chrono::steady_clock;

// rng stream ids derived from the master seed
enum Stream : std::uint64_t {
    kInitStream = 1,
    kChannelStream = 2,
    kExploreStream = 3,
    kNoiseStream = 4,
    kSampleStream = 5,
    kPlacementStream = 6,
    kEvalChannelStream = 12,
    kEvalActionStream = 13,
};

double elapsed_seconds(steady_clock::time_point t0) {
    return std::chrono::duration<double>(steady_clock::now() - t0).count();
}

}  // namespace

std::string baseline_name(Baseline b) {
    switch (b) {
        case Baseline::Learned: return "learned";
        case Baseline::Random: return "random";
        case Baseline::NoIrs: return "no-irs";
        case Baseline::FixedBeamforming: return "fixed-beamforming";
    }
    return "learned";
}

Baseline parse_baseline(const std::string& name) {
    if (name == "learned") return Baseline::Learned;
    if (name == "random") return Baseline::Random;
    if (name == "no-irs") return Baseline::NoIrs;
    if (name == "fixed-beamforming") return Baseline::FixedBeamforming;
    throw std::invalid_argument("unknown baseline: " + name);
}

void ExperimentConfig::finalize() {
    if (episodes < 1) throw std::invalid_argument("ExperimentConfig: episodes >= 1");
    if (eval_episodes < 1) throw std::invalid_argument("ExperimentConfig: eval_episodes >= 1");
    if (mdqn.batch_size != ddpg.batch_size)
        throw std::invalid_argument("ExperimentConfig: one shared minibatch; batch sizes must match");
    if (replay_capacity < static_cast<std::size_t>(mdqn.batch_size))
        throw std::invalid_argument("ExperimentConfig: replay capacity below batch size");
    mdqn.validate();
    ddpg.validate();
    env.finalize();
    if (reward_scale <= 0.0) {
        double norm = 0.0;
        for (int k = 0; k < env.K; ++k) norm += env.rate_norm(k);
        reward_scale = norm;  // K * mean rate normalizer
    }
}

Action make_fixed_beam_action(const OfdmEnv& env, const std::vector<int>& a1,
                              const Eigen::VectorXd& phase_raw) {
    const EnvConfig& cfg = env.config();
    if (static_cast<int>(a1.size()) != cfg.C)
        throw std::invalid_argument("make_fixed_beam_action: assignment length mismatch");
    if (phase_raw.size() != cfg.N)
        throw std::invalid_argument("make_fixed_beam_action: phase vector length mismatch");

    Action act;
    act.a1.lambda = a1;
    act.a1.validate(cfg.K);
    act.a2_raw = phase_raw;
    act.phase.theta.resize(cfg.N);
    for (int n = 0; n < cfg.N; ++n) {
        double th = M_PI * (phase_raw(n) + 1.0);
        th = std::fmod(th, 2.0 * M_PI);
        if (th < 0.0) th += 2.0 * M_PI;
        act.phase.theta(n) = th;
    }
    // maximum-ratio beams on the direct channel, equal power split
    act.beams = BeamformerSet::zeros(cfg.M, cfg.C);
    const double amp = std::sqrt(cfg.p_t_watts / cfg.C);
    for (int c = 0; c < cfg.C; ++c) {
        const CVec h = env.channels().h_bu[c].col(a1[c]);
        const double norm = h.norm();
        if (norm > 0.0) act.beams.f.col(c) = amp * h.conjugate() / norm;
    }
    return act;
}

namespace {

struct EpisodeAccumulator {
    std::vector<double> rewards;
    double sum_rate = 0.0;
    Eigen::VectorXd user_rates;
    long violations = 0;

    explicit EpisodeAccumulator(int K) : user_rates(Eigen::VectorXd::Zero(K)) {}

    void add(const StepOutcome& out) {
        rewards.push_back(out.reward);
        sum_rate += out.sum_rate;
        user_rates += out.per_user_rates;
        violations += out.min_rate_violations;
    }

    MetricsRow finish(int episode, double gamma, double wall) const {
        const double n = static_cast<double>(rewards.size());
        MetricsRow row;
        row.episode = episode;
        double s = 0.0;
        for (double r : rewards) s += r;
        row.mean_reward = s / n;
        row.mean_sum_rate = sum_rate / n;
        row.user_rates = user_rates / n;
        row.min_rate_violations = violations;
        row.discounted_return = discounted_return(rewards, gamma);
        row.wall_seconds = wall;
        return row;
    }
};

std::vector<int> random_assignment(int C, int K, Rng& rng) {
    std::vector<int> a1(C);
    for (int c = 0; c < C; ++c) a1[c] = rng.uniform_int(K);
    return a1;
}

Eigen::VectorXd random_a2(int dim, Rng& rng) {
    Eigen::VectorXd a(dim);
    for (int i = 0; i < dim; ++i) a(i) = rng.uniform(-1.0, 1.0);
    return a;
}

// One gradient step for every learner from the shared minibatch. The C DQN
// updates and the two DDPG gradient evaluations are independent; updates to
// the DDPG parameters are applied after the parallel region (Algorithm 1
// computes both gradients from the same snapshot).
void parallel_update(MdqnAgent& mdqn, DdpgAgent& ddpg, const Batch& batch, int threads) {
    const int C = mdqn.num_channels();
    const int num_tasks = C + 2;
    Gradients critic_grads, actor_grads;
    std::exception_ptr error;

#ifdef _OPENMP
    const int nt = threads > 0 ? std::min(threads, num_tasks) : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(nt)
#else
    (void)threads;
#endif
    for (int task = 0; task < num_tasks; ++task) {
        try {
            if (task < C) {
                mdqn.train_channel(batch, task);
            } else if (task == C) {
                critic_grads = ddpg.critic_gradients(batch);
            } else {
                actor_grads = ddpg.actor_gradients(batch);
            }
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
    ddpg.apply_actor(actor_grads);
    ddpg.apply_critic(critic_grads);
}

}  // namespace

TrainResult train(const ExperimentConfig& config) {
    tune_allocator();
    ExperimentConfig cfg = config;
    if (cfg.baseline == Baseline::NoIrs) cfg.env.irs_enabled = false;
    cfg.finalize();

    Rng master(cfg.seed);
    if (cfg.env.topology.num_users() == 0 && cfg.env.random_user_placement) {
        Rng placement = master.fork(kPlacementStream);
        cfg.env.topology = Topology::with_random_users(cfg.env.K, placement, cfg.env.topology);
    }

    OfdmEnv env(cfg.env, master.fork(kChannelStream));
    Rng explore = master.fork(kExploreStream);
    Rng noise = master.fork(kNoiseStream);
    Rng sampler = master.fork(kSampleStream);
    Rng init = master.fork(kInitStream);

    const bool learns = cfg.baseline != Baseline::Random;
    const bool fixed_beams = cfg.baseline == Baseline::FixedBeamforming;
    const int state_dim = cfg.env.state_dim();
    const int a2_dim = fixed_beams ? cfg.env.N : cfg.env.a2_dim();

    TrainResult result;
    result.metrics.num_users = cfg.env.K;
    if (learns) {
        result.mdqn = std::make_unique<MdqnAgent>(state_dim, cfg.env.K, cfg.env.C, cfg.mdqn, init);
        result.ddpg = std::make_unique<DdpgAgent>(state_dim, a2_dim, cfg.env.K, cfg.env.C, cfg.ddpg, init);
    }
    ReplayBuffer replay(cfg.replay_capacity);
    const int batch_size = cfg.mdqn.batch_size;

    std::ofstream trace;
    if (!cfg.trace_path.empty()) {
        trace.open(cfg.trace_path);
        if (!trace) throw std::runtime_error("train: cannot open trace file " + cfg.trace_path);
        trace << "episode,step,reward,sum_rate";
        for (int k = 0; k < cfg.env.K; ++k) trace << ",user_rate_" << k;
        trace << ",min_rate_violations\n";
    }

    long global_step = 0;
    for (int ep = 0; ep < cfg.episodes; ++ep) {
        const auto t0 = steady_clock::now();
        Eigen::VectorXd s = env.reset();
        EpisodeAccumulator acc(cfg.env.K);
        for (int t = 0; t < cfg.env.steps_per_episode; ++t) {
            try {
                std::vector<int> a1;
                Eigen::VectorXd a2;
                if (learns) {
                    a1 = result.mdqn->select_discrete(s, cfg.mdqn.epsilon_at(global_step), explore);
                    a2 = result.ddpg->select_continuous(s, cfg.ddpg.sigma_at(global_step), noise);
                } else {
                    a1 = random_assignment(cfg.env.C, cfg.env.K, explore);
                    a2 = random_a2(a2_dim, noise);
                }
                const Action act =
                    fixed_beams ? make_fixed_beam_action(env, a1, a2) : env.decode_action(a1, a2);
                const StepOutcome out = env.step(act);
                acc.add(out);
                if (trace.is_open()) {
                    trace << ep << ',' << t << ',' << format_double(out.reward) << ','
                          << format_double(out.sum_rate);
                    for (int k = 0; k < cfg.env.K; ++k)
                        trace << ',' << format_double(out.per_user_rates(k));
                    trace << ',' << out.min_rate_violations << '\n';
                }

                if (learns) {
                    replay.push({s, a1, a2, out.reward / cfg.reward_scale, out.next_state});
                    if (replay.ready(batch_size)) {
                        const Batch batch = assemble_batch(replay.sample(batch_size, sampler));
                        parallel_update(*result.mdqn, *result.ddpg, batch, cfg.threads);
                    }
                }
                ++global_step;
                if (learns) {
                    if (global_step % cfg.mdqn.target_sync_period == 0) result.mdqn->sync_targets();
                    if (global_step % cfg.ddpg.target_sync_period == 0) result.ddpg->sync_targets();
                }
                s = out.next_state;
            } catch (const std::exception& e) {
                throw std::runtime_error("train: episode " + std::to_string(ep) + " step " +
                                         std::to_string(t) + ": " + e.what());
            }
        }
        result.metrics.rows.push_back(acc.finish(ep, cfg.mdqn.gamma, elapsed_seconds(t0)));
    }
    result.constraints = env.constraint_stats();
    result.resolved = cfg;
    return result;
}

MetricsTable evaluate(const MdqnAgent* mdqn, const DdpgAgent* ddpg, Baseline kind,
                      const ExperimentConfig& config, int episodes) {
    tune_allocator();
    ExperimentConfig cfg = config;
    if (kind == Baseline::NoIrs) cfg.env.irs_enabled = false;
    cfg.finalize();
    if (kind != Baseline::Random) {
        if (!mdqn || !ddpg) throw std::invalid_argument("evaluate: agents required");
        if (mdqn->net(0).input_dim() != cfg.env.state_dim())
            throw std::invalid_argument("evaluate: checkpoint/architecture mismatch");
        const int expect_a2 = kind == Baseline::FixedBeamforming ? cfg.env.N : cfg.env.a2_dim();
        if (ddpg->action_dim() != expect_a2)
            throw std::invalid_argument("evaluate: ddpg action dimension mismatch");
    }

    Rng master(cfg.seed);
    if (cfg.env.topology.num_users() == 0 && cfg.env.random_user_placement) {
        Rng placement = master.fork(kPlacementStream);
        cfg.env.topology = Topology::with_random_users(cfg.env.K, placement, cfg.env.topology);
    }
    OfdmEnv env(cfg.env, master.fork(kEvalChannelStream));
    Rng action_rng = master.fork(kEvalActionStream);

    MetricsTable table;
    table.num_users = cfg.env.K;
    for (int ep = 0; ep < episodes; ++ep) {
        const auto t0 = steady_clock::now();
        Eigen::VectorXd s = env.reset();
        EpisodeAccumulator acc(cfg.env.K);
        for (int t = 0; t < cfg.env.steps_per_episode; ++t) {
            std::vector<int> a1;
            Eigen::VectorXd a2;
            if (kind == Baseline::Random) {
                a1 = random_assignment(cfg.env.C, cfg.env.K, action_rng);
                a2 = random_a2(cfg.env.a2_dim(), action_rng);
            } else {
                a1 = mdqn->select_discrete(s, 0.0, action_rng);
                a2 = ddpg->select_continuous(s, 0.0, action_rng);
            }
            const Action act = kind == Baseline::FixedBeamforming
                                   ? make_fixed_beam_action(env, a1, a2)
                                   : env.decode_action(a1, a2);
            const StepOutcome out = env.step(act);
            acc.add(out);
            s = out.next_state;
        }
        table.rows.push_back(acc.finish(ep, cfg.mdqn.gamma, elapsed_seconds(t0)));
    }
    if (env.constraint_stats().total() != 0)
        throw std::runtime_error("evaluate: hard constraint violated");
    return table;
}

TrainResult run_baseline(Baseline kind, const ExperimentConfig& config) {
    ExperimentConfig cfg = config;
    cfg.baseline = kind;
    return train(cfg);
}

std::vector<SweepRow> sweep(const ExperimentConfig& base, SweepAxis axis,
                            const std::vector<Baseline>& schemes) {
    std::vector<double> values;
    if (axis == SweepAxis::Power) {
        values = base.power_sweep_dbm;
    } else if (axis == SweepAxis::Elements) {
        values.assign(base.element_sweep.begin(), base.element_sweep.end());
    } else {
        values = {0.0};
    }

    std::vector<SweepRow> rows;
    for (double value : values) {
        for (Baseline scheme : schemes) {
            std::vector<double> rates;
            for (int i = 0; i < base.sweep_seeds; ++i) {
                try {
                    ExperimentConfig cfg = base;
                    cfg.baseline = scheme;
                    cfg.seed = base.seed + static_cast<std::uint64_t>(i);
                    if (axis == SweepAxis::Power) {
                        cfg.env.p_t_dbm = value;
                        cfg.env.p_t_watts = 0.0;  // re-derive
                    } else if (axis == SweepAxis::Elements) {
                        cfg.env.N = static_cast<int>(value);
                    }
                    TrainResult r = train(cfg);
                    const MetricsTable eval =
                        evaluate(r.mdqn.get(), r.ddpg.get(), scheme, r.resolved, base.eval_episodes);
                    rates.push_back(eval.mean_sum_rate());
                } catch (const std::exception& e) {
                    std::cerr << "sweep cell failed (" << baseline_name(scheme) << ", value "
                              << value << ", seed " << base.seed + i << "): " << e.what() << "\n";
                }
            }
            if (rates.empty()) continue;
            SweepRow row;
            row.axis_value = value;
            row.scheme = baseline_name(scheme);
            row.n_seeds = static_cast<int>(rates.size());
            double mean = 0.0;
            for (double r : rates) mean += r;
            mean /= rates.size();
            double var = 0.0;
            for (double r : rates) var += (r - mean) * (r - mean);
            row.mean_sum_rate = mean;
            row.std_sum_rate = rates.size() > 1 ? std::sqrt(var / (rates.size() - 1)) : 0.0;
            rows.push_back(row);
        }
    }
    return rows;
}

OracleResult brute_force_assignment(const ChannelSet& channels, const PhaseShift& phase,
                                    const BeamformerSet& beams, const EnvConfig& config) {
    const int K = config.K, C = config.C;
    double combos = std::pow(static_cast<double>(K), C);
    if (combos > 1e6) throw std::invalid_argument("brute_force_assignment: K^C exceeds 10^6");

    OracleResult best;
    bool first = true;
    Assignment current;
    current.lambda.assign(C, 0);
    while (true) {
        const RateReport rates = sum_rate(current, channels, phase, beams, config.sigma2,
                                          config.bandwidth_hz, config.irs_enabled);
        const double score = compute_reward(rates.per_user, config);
        if (first || score > best.score) {
            best.assignment = current;
            best.score = score;
            best.sum_rate = rates.sum_rate;
            first = false;
        }
        // lexicographic odometer, lambda[0] most significant
        int pos = C - 1;
        while (pos >= 0 && current.lambda[pos] == K - 1) current.lambda[pos--] = 0;
        if (pos < 0) break;
        ++current.lambda[pos];
    }
    return best;
}

OracleAgreement mdqn_oracle_check(int num_seeds, long steps, std::uint64_t base_seed, bool verbose) {
    tune_allocator();
    OracleAgreement result;
    for (int i = 0; i < num_seeds; ++i) {
        const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(i);
        ExperimentConfig cfg;
        cfg.env.M = 2;
        cfg.env.N = 4;
        cfg.env.K = 2;
        cfg.env.C = 2;
        cfg.env.steps_per_episode = 1;  // unused below; channels drawn once
        cfg.mdqn.hidden_width = 32;
        cfg.mdqn.batch_size = 64;
        cfg.ddpg.batch_size = 64;
        cfg.mdqn.learning_rate = 0.005;
        // frozen channels and a fixed continuous action make this a one-step
        // optimality check, so the fixture estimates E[r | a] directly
        cfg.mdqn.gamma = 0.0;
        cfg.mdqn.eps_decay_steps = std::max<long>(1, steps * 3 / 4);
        cfg.mdqn.target_sync_period = 100;
        // keep replay recent relative to the run (the default 6000-capacity
        // buffer spans less than a third of a default training run); a
        // whole-history buffer would freeze each channel's view of the other
        // channels' exploratory behavior
        cfg.replay_capacity = std::max<std::size_t>(steps / 8, 64);
        cfg.seed = seed;
        cfg.finalize();

        Rng master(seed);
        Rng placement = master.fork(kPlacementStream);
        cfg.env.topology = Topology::with_random_users(cfg.env.K, placement, cfg.env.topology);
        cfg.env.steps_per_episode = static_cast<int>(steps);

        OfdmEnv env(cfg.env, master.fork(kChannelStream));
        Rng explore = master.fork(kExploreStream);
        Rng sampler = master.fork(kSampleStream);
        Rng init = master.fork(kInitStream);
        Rng fixed = master.fork(kNoiseStream);

        MdqnAgent mdqn(cfg.env.state_dim(), cfg.env.K, cfg.env.C, cfg.mdqn, init);
        ReplayBuffer replay(cfg.replay_capacity);
        const Eigen::VectorXd a2 = random_a2(cfg.env.a2_dim(), fixed);

        Eigen::VectorXd s = env.reset();  // frozen channels for the whole run
        for (long t = 0; t < steps; ++t) {
            const auto a1 = mdqn.select_discrete(s, cfg.mdqn.epsilon_at(t), explore);
            const Action act = env.decode_action(a1, a2);
            const StepOutcome out = env.step(act);
            replay.push({s, a1, a2, out.reward / cfg.reward_scale, out.next_state});
            if (replay.ready(cfg.mdqn.batch_size)) {
                const Batch batch = assemble_batch(replay.sample(cfg.mdqn.batch_size, sampler));
                mdqn.train_step(batch);
                if (mdqn.train_steps() % cfg.mdqn.target_sync_period == 0) mdqn.sync_targets();
            }
            s = out.next_state;
        }

        // let the greedy policy settle into its own state distribution
        std::vector<int> greedy;
        for (int t = 0; t < 5; ++t) {
            greedy = mdqn.select_discrete(s, 0.0, explore);
            s = env.step(env.decode_action(greedy, a2)).next_state;
        }
        const Action decoded = env.decode_action(greedy, a2);
        const RateReport rates = sum_rate(decoded.a1, env.channels(), decoded.phase, decoded.beams,
                                          cfg.env.sigma2, cfg.env.bandwidth_hz, cfg.env.irs_enabled);
        const double greedy_score = compute_reward(rates.per_user, cfg.env);
        const OracleResult oracle =
            brute_force_assignment(env.channels(), decoded.phase, decoded.beams, cfg.env);
        const bool agree =
            std::abs(greedy_score - oracle.score) <= 1e-9 * std::max(1.0, std::abs(oracle.score));
        ++result.seeds;
        if (agree) ++result.agreed;
        if (verbose)
            std::cout << "seed " << seed << ": greedy score " << greedy_score << ", oracle "
                      << oracle.score << (agree ? " (match)" : " (MISMATCH)") << "\n";
    }
    return result;
}

namespace {

json topology_to_json(const Topology& t) {
    json users = json::array();
    for (const auto& u : t.user_positions) users.push_back({u.x(), u.y(), u.z()});
    return {
        {"bs", {t.bs_position.x(), t.bs_position.y(), t.bs_position.z()}},
        {"irs", {t.irs_position.x(), t.irs_position.y(), t.irs_position.z()}},
        {"users", users},
        {"user_area", {t.user_area.x0, t.user_area.y0, t.user_area.x1, t.user_area.y1, t.user_area.height}},
    };
}

Topology topology_from_json(const json& j) {
    Topology t;
    t.bs_position = Vec3(j["bs"][0], j["bs"][1], j["bs"][2]);
    t.irs_position = Vec3(j["irs"][0], j["irs"][1], j["irs"][2]);
    for (const auto& u : j["users"]) t.user_positions.emplace_back(u[0], u[1], u[2]);
    const auto& a = j["user_area"];
    t.user_area = {a[0], a[1], a[2], a[3], a[4]};
    return t;
}

json vec_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Eigen::VectorXd vec_from_json(const json& j) {
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<int>(i)) = j[i];
    return v;
}

}  // namespace

void write_run_manifest(const std::string& path, const ExperimentConfig& cfg,
                        const ConstraintStats* stats) {
    json j;
    j["seed"] = cfg.seed;
    j["baseline"] = baseline_name(cfg.baseline);
    j["episodes"] = cfg.episodes;
    j["eval_episodes"] = cfg.eval_episodes;
    j["replay_capacity"] = cfg.replay_capacity;
    j["reward_scale"] = cfg.reward_scale;
    j["threads"] = cfg.threads;
    j["env"] = {
        {"M", cfg.env.M},
        {"N", cfg.env.N},
        {"K", cfg.env.K},
        {"C", cfg.env.C},
        {"bandwidth_hz", cfg.env.bandwidth_hz},
        {"noise_dbm", cfg.env.noise_dbm},
        {"p_t_dbm", cfg.env.p_t_dbm},
        {"p_t_watts", cfg.env.p_t_watts},
        {"r_min_fraction", cfg.env.r_min_fraction},
        {"sigma2", vec_to_json(cfg.env.sigma2)},
        {"r_min", vec_to_json(cfg.env.r_min)},
        {"b", vec_to_json(cfg.env.b)},
        {"w1", cfg.env.w1},
        {"w2", cfg.env.w2},
        {"steps_per_episode", cfg.env.steps_per_episode},
        {"channel_refresh", cfg.env.channel_refresh == ChannelRefresh::PerStep ? "per-step" : "per-episode"},
        {"irs_enabled", cfg.env.irs_enabled},
        {"random_user_placement", cfg.env.random_user_placement},
        {"topology", topology_to_json(cfg.env.topology)},
        {"path_loss",
         {{"pl0_db", cfg.env.path_loss.pl0_db},
          {"d0", cfg.env.path_loss.d0},
          {"tau_bu", cfg.env.path_loss.tau_bu},
          {"tau_br", cfg.env.path_loss.tau_br},
          {"tau_ru", cfg.env.path_loss.tau_ru}}},
        {"fading",
         {{"kind", cfg.env.fading.kind == FadingKind::Rician ? "rician" : "rayleigh"},
          {"rician_k_factor", cfg.env.fading.rician_k_factor},
          {"los_mode", cfg.env.fading.los_mode == LosMode::GeometricSteering ? "steering" : "ones"}}},
    };
    j["mdqn"] = {
        {"learning_rate", cfg.mdqn.learning_rate},
        {"gamma", cfg.mdqn.gamma},
        {"eps_start", cfg.mdqn.eps_start},
        {"eps_end", cfg.mdqn.eps_end},
        {"eps_decay_steps", cfg.mdqn.eps_decay_steps},
        {"target_sync_period", cfg.mdqn.target_sync_period},
        {"batch_size", cfg.mdqn.batch_size},
        {"hidden_width", cfg.mdqn.hidden_width},
        {"hidden_layers", cfg.mdqn.hidden_layers},
        {"optimizer", cfg.mdqn.optimizer == Optimizer::Kind::Adam ? "adam" : "sgd"},
        {"clip_norm", cfg.mdqn.clip_norm},
    };
    j["ddpg"] = {
        {"actor_lr", cfg.ddpg.actor_lr},
        {"critic_lr", cfg.ddpg.critic_lr},
        {"gamma", cfg.ddpg.gamma},
        {"noise_sigma_start", cfg.ddpg.noise_sigma_start},
        {"noise_decay", cfg.ddpg.noise_decay},
        {"noise_floor", cfg.ddpg.noise_floor},
        {"target_sync_period", cfg.ddpg.target_sync_period},
        {"batch_size", cfg.ddpg.batch_size},
        {"hidden_width", cfg.ddpg.hidden_width},
        {"hidden_layers", cfg.ddpg.hidden_layers},
        {"soft_updates", cfg.ddpg.soft_updates},
        {"polyak_tau", cfg.ddpg.polyak_tau},
        {"optimizer", cfg.ddpg.optimizer == Optimizer::Kind::Adam ? "adam" : "sgd"},
        {"clip_norm", cfg.ddpg.clip_norm},
    };
    if (stats) {
        j["constraints"] = {
            {"steps_checked", stats->steps_checked},
            {"power_violations", stats->power_violations},
            {"unit_modulus_violations", stats->unit_modulus_violations},
            {"occupancy_violations", stats->occupancy_violations},
        };
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_run_manifest: cannot open " + path);
    out << j.dump(2) << "\n";
}

ExperimentConfig load_run_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_run_manifest: cannot open " + path);
    json j;
    in >> j;
    ExperimentConfig cfg;
    cfg.seed = j["seed"];
    cfg.baseline = parse_baseline(j["baseline"]);
    cfg.episodes = j["episodes"];
    cfg.eval_episodes = j["eval_episodes"];
    cfg.replay_capacity = j["replay_capacity"];
    cfg.reward_scale = j["reward_scale"];
    cfg.threads = j["threads"];
    const json& e = j["env"];
    cfg.env.M = e["M"];
    cfg.env.N = e["N"];
    cfg.env.K = e["K"];
    cfg.env.C = e["C"];
    cfg.env.bandwidth_hz = e["bandwidth_hz"];
    cfg.env.noise_dbm = e["noise_dbm"];
    cfg.env.p_t_dbm = e["p_t_dbm"];
    cfg.env.p_t_watts = e["p_t_watts"];
    cfg.env.r_min_fraction = e["r_min_fraction"];
    cfg.env.sigma2 = vec_from_json(e["sigma2"]);
    cfg.env.r_min = vec_from_json(e["r_min"]);
    cfg.env.b = vec_from_json(e["b"]);
    cfg.env.w1 = e["w1"];
    cfg.env.w2 = e["w2"];
    cfg.env.steps_per_episode = e["steps_per_episode"];
    cfg.env.channel_refresh =
        e["channel_refresh"] == "per-step" ? ChannelRefresh::PerStep : ChannelRefresh::PerEpisode;
    cfg.env.irs_enabled = e["irs_enabled"];
    cfg.env.random_user_placement = e["random_user_placement"];
    cfg.env.topology = topology_from_json(e["topology"]);
    const json& p = e["path_loss"];
    cfg.env.path_loss = {p["pl0_db"], p["d0"], p["tau_bu"], p["tau_br"], p["tau_ru"]};
    const json& f = e["fading"];
    cfg.env.fading.kind = f["kind"] == "rician" ? FadingKind::Rician : FadingKind::Rayleigh;
    cfg.env.fading.rician_k_factor = f["rician_k_factor"];
    cfg.env.fading.los_mode =
        f["los_mode"] == "steering" ? LosMode::GeometricSteering : LosMode::AllOnes;
    const json& m = j["mdqn"];
    cfg.mdqn.learning_rate = m["learning_rate"];
    cfg.mdqn.gamma = m["gamma"];
    cfg.mdqn.eps_start = m["eps_start"];
    cfg.mdqn.eps_end = m["eps_end"];
    cfg.mdqn.eps_decay_steps = m["eps_decay_steps"];
    cfg.mdqn.target_sync_period = m["target_sync_period"];
    cfg.mdqn.batch_size = m["batch_size"];
    cfg.mdqn.hidden_width = m["hidden_width"];
    cfg.mdqn.hidden_layers = m["hidden_layers"];
    cfg.mdqn.optimizer = m["optimizer"] == "adam" ? Optimizer::Kind::Adam : Optimizer::Kind::Sgd;
    cfg.mdqn.clip_norm = m["clip_norm"];
    const json& d = j["ddpg"];
    cfg.ddpg.actor_lr = d["actor_lr"];
    cfg.ddpg.critic_lr = d["critic_lr"];
    cfg.ddpg.gamma = d["gamma"];
    cfg.ddpg.noise_sigma_start = d["noise_sigma_start"];
    cfg.ddpg.noise_decay = d["noise_decay"];
    cfg.ddpg.noise_floor = d["noise_floor"];
    cfg.ddpg.target_sync_period = d["target_sync_period"];
    cfg.ddpg.batch_size = d["batch_size"];
    cfg.ddpg.hidden_width = d["hidden_width"];
    cfg.ddpg.hidden_layers = d["hidden_layers"];
    cfg.ddpg.soft_updates = d["soft_updates"];
    cfg.ddpg.polyak_tau = d["polyak_tau"];
    cfg.ddpg.optimizer = d["optimizer"] == "adam" ? Optimizer::Kind::Adam : Optimizer::Kind::Sgd;
    cfg.ddpg.clip_norm = d["clip_norm"];
    return cfg;
}

void save_run(const std::string& out_dir, const TrainResult& result) {
    std::filesystem::create_directories(out_dir);
    write_metrics_csv(out_dir + "/metrics.csv", result.metrics);
    write_timings_csv(out_dir + "/timings.csv", result.metrics);
    write_run_manifest(out_dir + "/run.json", result.resolved, &result.constraints);
    if (result.mdqn) result.mdqn->save(out_dir + "/mdqn");
    if (result.ddpg) result.ddpg->save(out_dir + "/ddpg");
}

}  // namespace irsalloc
