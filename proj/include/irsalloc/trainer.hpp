#pragma once

#include <memory>
#include <string>
#include <vector>

#include "irsalloc/ddpg.hpp"
#include "irsalloc/env.hpp"
#include "irsalloc/mdqn.hpp"
#include "irsalloc/metrics.hpp"
#include "irsalloc/replay.hpp"

namespace irsalloc {

enum class Baseline { Learned, Random, NoIrs, FixedBeamforming };

std::string baseline_name(Baseline b);
Baseline parse_baseline(const std::string& name);

enum class SweepAxis { None, Power, Elements };

struct ExperimentConfig {
    EnvConfig env;
    MdqnConfig mdqn;
    DdpgConfig ddpg;
    std::size_t replay_capacity = 6000;
    int episodes = 200;
    int eval_episodes = 10;
    std::uint64_t seed = 1;
    Baseline baseline = Baseline::Learned;
    std::vector<double> power_sweep_dbm{15, 20, 25, 30, 35, 40};
    std::vector<int> element_sweep{16, 32, 48, 64};
    int sweep_seeds = 5;
    double reward_scale = 0.0;  // <= 0: auto, K * rate_norm
    std::string out_dir;
    std::string trace_path;  // when set, per-step episode trace CSV
    int threads = 2;  // parallel width of the per-step update tasks

    void finalize();
};

struct TrainResult {
    MetricsTable metrics;
    std::unique_ptr<MdqnAgent> mdqn;
    std::unique_ptr<DdpgAgent> ddpg;
    ConstraintStats constraints;
    ExperimentConfig resolved;  // finalized config actually used (topology included)
};

// Full two-loop training per the learned scheme or one of the baselines
// (random takes no gradient steps; no-irs removes the reflected path;
// fixed-beamforming uses maximum-ratio beams and a phase-only actor).
TrainResult train(const ExperimentConfig& config);

// Greedy rollouts (epsilon = 0, sigma = 0, no learning) on fresh evaluation
// channels; agents may be null only for the random baseline.
MetricsTable evaluate(const MdqnAgent* mdqn, const DdpgAgent* ddpg, Baseline kind,
                      const ExperimentConfig& config, int episodes);

TrainResult run_baseline(Baseline kind, const ExperimentConfig& config);

// Trains and evaluates every (axis value, scheme, seed) cell independently and
// aggregates mean/std of the evaluated sum rate. A failed cell is skipped, the
// rest of the sweep continues.
std::vector<SweepRow> sweep(const ExperimentConfig& base, SweepAxis axis,
                            const std::vector<Baseline>& schemes);

struct OracleResult {
    Assignment assignment;
    double score = 0.0;     // Eq. 7 reward of the best assignment
    double sum_rate = 0.0;  // bits/s
};

// Exhaustive search over all K^C assignments (refused above 10^6), scored by
// the reward; ties resolve to the lexicographically smallest assignment.
OracleResult brute_force_assignment(const ChannelSet& channels, const PhaseShift& phase,
                                    const BeamformerSet& beams, const EnvConfig& config);

struct OracleAgreement {
    int seeds = 0;
    int agreed = 0;
    double fraction() const { return seeds > 0 ? static_cast<double>(agreed) / seeds : 0.0; }
};

// Frozen tiny instance (K=2, C=2, fixed continuous action): trains the MDQN
// alone for `steps` steps per seed and compares the greedy assignment's score
// with the brute-force optimum.
OracleAgreement mdqn_oracle_check(int num_seeds, long steps, std::uint64_t base_seed,
                                  bool verbose = false);

// Fixed-beamforming action: per-channel maximum-ratio beams toward the
// assigned user's direct channel, equal power split, phases from a2_raw.
Action make_fixed_beam_action(const OfdmEnv& env, const std::vector<int>& a1,
                              const Eigen::VectorXd& phase_raw);

// out_dir artifacts: metrics.csv, timings.csv, run.json, checkpoints
void save_run(const std::string& out_dir, const TrainResult& result);
void write_run_manifest(const std::string& path, const ExperimentConfig& config,
                        const ConstraintStats* stats = nullptr);
ExperimentConfig load_run_manifest(const std::string& path);

}  // namespace irsalloc
