#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <string>

#include "irsalloc/trainer.hpp"

using namespace irsalloc;

namespace {

void add_config_options(CLI::App& app, ExperimentConfig& cfg, std::string& baseline,
                        std::string& refresh, std::string& fading_kind, std::string& los_mode,
                        std::string& mdqn_opt, std::string& ddpg_opt) {
    app.add_option("--seed", cfg.seed, "master seed");
    app.add_option("--episodes", cfg.episodes, "training episodes");
    app.add_option("--eval-episodes", cfg.eval_episodes, "greedy evaluation episodes");
    app.add_option("--baseline", baseline, "learned | random | no-irs | fixed-beamforming");
    app.add_option("--threads", cfg.threads, "parallel update tasks per step");
    app.add_option("--reward-scale", cfg.reward_scale, "replay reward scale (<=0: auto)");
    app.add_option("--replay.capacity", cfg.replay_capacity, "replay buffer capacity");
    app.add_option("--sweep.seeds", cfg.sweep_seeds, "seeds per sweep cell");
    app.add_option("--sweep.powers", cfg.power_sweep_dbm, "power sweep values, dBm");
    app.add_option("--sweep.elements", cfg.element_sweep, "element sweep values");

    app.add_option("--env.M", cfg.env.M, "BS antennas");
    app.add_option("--env.N", cfg.env.N, "IRS elements");
    app.add_option("--env.K", cfg.env.K, "users");
    app.add_option("--env.C", cfg.env.C, "channels");
    app.add_option("--env.bandwidth-hz", cfg.env.bandwidth_hz, "total bandwidth, Hz");
    app.add_option("--env.noise-dbm", cfg.env.noise_dbm, "per-channel noise power, dBm");
    app.add_option("--env.pt-dbm", cfg.env.p_t_dbm, "BS power budget, dBm");
    app.add_option("--env.rmin-fraction", cfg.env.r_min_fraction, "r_min as a fraction of the capacity estimate");
    app.add_option("--env.w1", cfg.env.w1, "reward sum-rate weight");
    app.add_option("--env.w2", cfg.env.w2, "reward penalty weight");
    app.add_option("--env.steps", cfg.env.steps_per_episode, "steps per episode");
    app.add_option("--env.channel-refresh", refresh, "per-episode | per-step");
    app.add_flag("--env.irs,!--env.no-irs", cfg.env.irs_enabled, "reflected path enabled");
    app.add_flag("--env.random-users,!--env.fixed-users", cfg.env.random_user_placement,
                 "draw user positions from the user area");
    app.add_option("--env.pl0-db", cfg.env.path_loss.pl0_db, "reference attenuation, dB");
    app.add_option("--env.d0", cfg.env.path_loss.d0, "reference distance, m");
    app.add_option("--env.tau-bu", cfg.env.path_loss.tau_bu, "BS->user path loss exponent");
    app.add_option("--env.tau-br", cfg.env.path_loss.tau_br, "BS->IRS path loss exponent");
    app.add_option("--env.tau-ru", cfg.env.path_loss.tau_ru, "IRS->user path loss exponent");
    app.add_option("--env.fading", fading_kind, "rician | rayleigh (IRS links)");
    app.add_option("--env.rician-k", cfg.env.fading.rician_k_factor, "Rician K factor, linear");
    app.add_option("--env.los-mode", los_mode, "steering | ones");

    app.add_option("--mdqn.lr", cfg.mdqn.learning_rate, "DQN learning rate");
    app.add_option("--mdqn.gamma", cfg.mdqn.gamma, "discount factor");
    app.add_option("--mdqn.eps-start", cfg.mdqn.eps_start, "initial exploration rate");
    app.add_option("--mdqn.eps-end", cfg.mdqn.eps_end, "final exploration rate");
    app.add_option("--mdqn.eps-decay-steps", cfg.mdqn.eps_decay_steps, "linear decay horizon");
    app.add_option("--mdqn.sync-period", cfg.mdqn.target_sync_period, "target sync period P");
    app.add_option("--mdqn.batch", cfg.mdqn.batch_size, "minibatch size");
    app.add_option("--mdqn.hidden", cfg.mdqn.hidden_width, "hidden layer width");
    app.add_option("--mdqn.layers", cfg.mdqn.hidden_layers, "hidden layer count");
    app.add_option("--mdqn.optimizer", mdqn_opt, "adam | sgd");
    app.add_option("--mdqn.clip-norm", cfg.mdqn.clip_norm, "gradient clip (<=0 off)");

    app.add_option("--ddpg.actor-lr", cfg.ddpg.actor_lr, "actor learning rate");
    app.add_option("--ddpg.critic-lr", cfg.ddpg.critic_lr, "critic learning rate");
    app.add_option("--ddpg.gamma", cfg.ddpg.gamma, "discount factor");
    app.add_option("--ddpg.noise-sigma", cfg.ddpg.noise_sigma_start, "exploration noise sigma");
    app.add_option("--ddpg.noise-decay", cfg.ddpg.noise_decay, "noise decay per step");
    app.add_option("--ddpg.noise-floor", cfg.ddpg.noise_floor, "noise floor");
    app.add_option("--ddpg.sync-period", cfg.ddpg.target_sync_period, "target sync period P");
    app.add_option("--ddpg.batch", cfg.ddpg.batch_size, "minibatch size");
    app.add_option("--ddpg.hidden", cfg.ddpg.hidden_width, "hidden layer width");
    app.add_option("--ddpg.layers", cfg.ddpg.hidden_layers, "hidden layer count");
    app.add_flag("--ddpg.soft-updates", cfg.ddpg.soft_updates, "Polyak averaging instead of hard copies");
    app.add_option("--ddpg.polyak-tau", cfg.ddpg.polyak_tau, "Polyak step");
    app.add_option("--ddpg.optimizer", ddpg_opt, "adam | sgd");
    app.add_option("--ddpg.clip-norm", cfg.ddpg.clip_norm, "gradient clip (<=0 off)");
}

void apply_string_options(ExperimentConfig& cfg, const std::string& baseline,
                          const std::string& refresh, const std::string& fading_kind,
                          const std::string& los_mode, const std::string& mdqn_opt,
                          const std::string& ddpg_opt) {
    cfg.baseline = parse_baseline(baseline);
    if (refresh == "per-step")
        cfg.env.channel_refresh = ChannelRefresh::PerStep;
    else if (refresh == "per-episode")
        cfg.env.channel_refresh = ChannelRefresh::PerEpisode;
    else
        throw CLI::ValidationError("--env.channel-refresh", "expected per-episode or per-step");
    if (fading_kind == "rician")
        cfg.env.fading.kind = FadingKind::Rician;
    else if (fading_kind == "rayleigh")
        cfg.env.fading.kind = FadingKind::Rayleigh;
    else
        throw CLI::ValidationError("--env.fading", "expected rician or rayleigh");
    if (los_mode == "steering")
        cfg.env.fading.los_mode = LosMode::GeometricSteering;
    else if (los_mode == "ones")
        cfg.env.fading.los_mode = LosMode::AllOnes;
    else
        throw CLI::ValidationError("--env.los-mode", "expected steering or ones");
    cfg.mdqn.optimizer = mdqn_opt == "sgd" ? Optimizer::Kind::Sgd : Optimizer::Kind::Adam;
    cfg.ddpg.optimizer = ddpg_opt == "sgd" ? Optimizer::Kind::Sgd : Optimizer::Kind::Adam;
}

void print_summary(const TrainResult& result) {
    const auto& rows = result.metrics.rows;
    std::cout << "episodes: " << rows.size() << "\n";
    if (!rows.empty()) {
        std::cout << "first episode mean reward: " << rows.front().mean_reward << "\n"
                  << "last episode mean reward:  " << rows.back().mean_reward << "\n"
                  << "last episode sum rate:     " << rows.back().mean_sum_rate << " bit/s\n";
    }
    std::cout << "hard constraint violations: " << result.constraints.total() << " over "
              << result.constraints.steps_checked << " steps\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"IRS-assisted OFDM resource allocation: MDQN-DDPG trainer and baselines"};
    app.set_config("--config", "", "configuration file (INI sections: [env], [mdqn], [ddpg], ...)");

    ExperimentConfig cfg;
    std::string baseline = "learned";
    std::string refresh = "per-episode";
    std::string fading_kind = "rician";
    std::string los_mode = "steering";
    std::string mdqn_opt = "adam";
    std::string ddpg_opt = "adam";
    std::string out_dir = "run";
    std::string in_dir;
    int oracle_seeds = 20;
    long oracle_steps = 2000;
    bool oracle_verbose = false;
    std::vector<std::string> scheme_names;

    add_config_options(app, cfg, baseline, refresh, fading_kind, los_mode, mdqn_opt, ddpg_opt);
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--trace", cfg.trace_path, "per-step episode trace CSV (training runs)");

    auto* cmd_train = app.add_subcommand("train", "train the MDQN-DDPG agents");
    auto* cmd_eval = app.add_subcommand("evaluate", "greedy rollouts from saved checkpoints");
    cmd_eval->add_option("--in", in_dir, "directory with run.json and checkpoints")->required();
    auto* cmd_base = app.add_subcommand("baseline", "run a baseline scheme");
    auto* cmd_sweep_p = app.add_subcommand("sweep-power", "sum rate vs BS transmission power");
    auto* cmd_sweep_e = app.add_subcommand("sweep-elements", "sum rate vs IRS element count");
    for (auto* c : {cmd_sweep_p, cmd_sweep_e})
        c->add_option("--schemes", scheme_names, "schemes to include (default: all for power, learned for elements)");
    auto* cmd_oracle = app.add_subcommand("oracle-check", "frozen tiny-instance MDQN vs brute force");
    cmd_oracle->add_option("--seeds", oracle_seeds, "number of seeds");
    cmd_oracle->add_option("--steps", oracle_steps, "training steps per seed");
    cmd_oracle->add_flag("--verbose", oracle_verbose, "per-seed results");
    app.require_subcommand(1);
    for (auto* c : {cmd_train, cmd_eval, cmd_base, cmd_sweep_p, cmd_sweep_e, cmd_oracle}) c->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        apply_string_options(cfg, baseline, refresh, fading_kind, los_mode, mdqn_opt, ddpg_opt);
        cfg.out_dir = out_dir;

        if (cmd_train->parsed() || cmd_base->parsed()) {
            TrainResult result = train(cfg);
            save_run(out_dir, result);
            print_summary(result);
            std::cout << "artifacts in " << out_dir << "\n";
        } else if (cmd_eval->parsed()) {
            ExperimentConfig saved = load_run_manifest(in_dir + "/run.json");
            saved.finalize();
            MetricsTable table;
            if (saved.baseline == Baseline::Random) {
                table = evaluate(nullptr, nullptr, saved.baseline, saved, cfg.eval_episodes);
            } else {
                Rng scratch(0);
                const int a2_dim = saved.baseline == Baseline::FixedBeamforming
                                       ? saved.env.N
                                       : saved.env.a2_dim();
                MdqnAgent mdqn(saved.env.state_dim(), saved.env.K, saved.env.C, saved.mdqn, scratch);
                mdqn.load(in_dir + "/mdqn");
                DdpgAgent ddpg(saved.env.state_dim(), a2_dim, saved.env.K, saved.env.C, saved.ddpg,
                               scratch);
                ddpg.load(in_dir + "/ddpg");
                table = evaluate(&mdqn, &ddpg, saved.baseline, saved, cfg.eval_episodes);
            }
            std::filesystem::create_directories(out_dir);
            write_metrics_csv(out_dir + "/metrics.csv", table);
            write_timings_csv(out_dir + "/timings.csv", table);
            std::cout << "evaluated " << table.rows.size() << " episodes, mean sum rate "
                      << table.mean_sum_rate() << " bit/s\n";
        } else if (cmd_sweep_p->parsed() || cmd_sweep_e->parsed()) {
            const SweepAxis axis = cmd_sweep_p->parsed() ? SweepAxis::Power : SweepAxis::Elements;
            std::vector<Baseline> schemes;
            if (scheme_names.empty()) {
                if (axis == SweepAxis::Power)
                    schemes = {Baseline::Learned, Baseline::Random, Baseline::NoIrs,
                               Baseline::FixedBeamforming};
                else
                    schemes = {Baseline::Learned};
            } else {
                for (const auto& n : scheme_names) schemes.push_back(parse_baseline(n));
            }
            const std::vector<SweepRow> rows = sweep(cfg, axis, schemes);
            std::filesystem::create_directories(out_dir);
            write_sweep_csv(out_dir + "/sweep.csv", rows);
            write_run_manifest(out_dir + "/run.json", cfg);
            std::cout << "wrote " << rows.size() << " aggregate rows to " << out_dir << "/sweep.csv\n";
        } else if (cmd_oracle->parsed()) {
            const OracleAgreement agreement =
                mdqn_oracle_check(oracle_seeds, oracle_steps, cfg.seed, oracle_verbose);
            std::cout << "oracle agreement: " << agreement.agreed << "/" << agreement.seeds << " ("
                      << 100.0 * agreement.fraction() << "%)\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
