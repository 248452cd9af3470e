#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "irsalloc/channel.hpp"
#include "irsalloc/phy.hpp"
#include "irsalloc/rng.hpp"

namespace irsalloc {

enum class ChannelRefresh { PerEpisode, PerStep };

struct EnvConfig {
    int M = 6;   // BS antennas
    int N = 16;  // IRS elements
    int K = 3;   // users
    int C = 4;   // channels

    double bandwidth_hz = 10e6;
    double noise_dbm = -169.0;     // per-channel noise power, config boundary
    double p_t_dbm = 35.0;
    double r_min_fraction = 0.10;  // of the equal-share single-user capacity estimate

    // Derived in finalize() unless set explicitly (> 0 / nonempty).
    double p_t_watts = 0.0;
    Eigen::VectorXd sigma2;  // per user, watts
    Eigen::VectorXd r_min;   // per user, bits/s
    Eigen::VectorXd b;       // zero-rate penalty per user; default r_min

    double w1 = 1.0;
    double w2 = 1.0;
    int steps_per_episode = 100;
    ChannelRefresh channel_refresh = ChannelRefresh::PerEpisode;
    bool irs_enabled = true;

    Topology topology{};
    bool random_user_placement = true;  // users drawn once per run from user_area
    PathLossModel path_loss{};
    FadingSpec fading{};

    // Fills derived fields and validates invariants; idempotent.
    void finalize();
    bool finalized() const { return finalized_; }

    // normalizer for rates in the state: (B/C) * log2(1 + p_t / sigma_k^2)
    double rate_norm(int k) const;

    int state_dim() const { return C * K + 2 * M * C + N + K + 2 * M * K * C + 2 * M * N * C + 2 * N * K * C; }
    int a2_dim() const { return 2 * M * C + N; }
    double beam_scale() const { return std::sqrt(p_t_watts / (2.0 * M * C)); }

    // Static standardization scales for the channel-feature segments, from the
    // path loss at nominal distances (user-area center for user links).
    double feature_scale_bu = 1.0, feature_scale_br = 1.0, feature_scale_ru = 1.0;

private:
    bool finalized_ = false;
};

// Decoded action: feasible by construction (4a-4d).
struct Action {
    Assignment a1;
    Eigen::VectorXd a2_raw;  // as emitted by the agent (length may differ per scheme)
    BeamformerSet beams;
    PhaseShift phase;
};

struct StepOutcome {
    double reward = 0.0;
    Eigen::VectorXd next_state;
    Eigen::VectorXd per_user_rates;
    double sum_rate = 0.0;
    int min_rate_violations = 0;  // count of users below r_min (soft constraint 4e)
    bool done = false;
};

// Running conformance counters for the hard constraints; every step of every
// episode is checked.
struct ConstraintStats {
    long power_violations = 0;        // 4a: total power > p_t * (1 + 1e-9)
    long unit_modulus_violations = 0; // 4b: | |e^{j theta}| - 1 | > 1e-12
    long occupancy_violations = 0;    // 4c/4d: lambda out of range
    long steps_checked = 0;

    long total() const { return power_violations + unit_modulus_violations + occupancy_violations; }
};

// r = w1 * sum(rates) + w2 * sum(delta_k); delta_k = 0 when R_k >= r_min, -R_k
// when 0 < R_k < r_min, -b_k when R_k = 0.
double compute_reward(const Eigen::VectorXd& per_user_rates, const EnvConfig& config);

// sum over tau of gamma^tau * rewards[tau]
double discounted_return(const std::vector<double>& rewards, double gamma);

// Offsets of the flat state segments.
struct StateLayout {
    int assignment_onehot = 0;
    int beams = 0;
    int phases = 0;
    int rates = 0;
    int h_bu = 0;
    int H_br = 0;
    int h_ru = 0;
    int total = 0;
};

class OfdmEnv {
public:
    // channel_rng drives all channel realizations (one fork per episode).
    OfdmEnv(EnvConfig config, Rng channel_rng);

    Eigen::VectorXd reset();
    StepOutcome step(const Action& action);

    // Maps raw agent outputs into the feasible action set: beamformer entries
    // pairwise (re, im) scaled by sqrt(p_t / (2MC)), phases pi*(raw+1) wrapped
    // to [0, 2*pi), then the power projection.
    Action decode_action(const std::vector<int>& a1, const Eigen::VectorXd& a2_raw) const;

    const EnvConfig& config() const { return cfg_; }
    const ChannelSet& channels() const { return channels_; }
    const ConstraintStats& constraint_stats() const { return stats_; }
    StateLayout layout() const;
    int steps_taken() const { return step_count_; }

    // State reconstruction helpers (tests for the layout bijection).
    Eigen::VectorXd encode_state(const Action& prev_action, const Eigen::VectorXd& prev_rates) const;
    Assignment extract_assignment(const Eigen::VectorXd& state) const;
    BeamformerSet extract_beams(const Eigen::VectorXd& state) const;
    PhaseShift extract_phases(const Eigen::VectorXd& state) const;
    Eigen::VectorXd extract_rates(const Eigen::VectorXd& state) const;

private:
    void draw_channels();
    void check_constraints(const Action& action);

    EnvConfig cfg_;
    Rng channel_rng_;
    std::uint64_t episode_index_ = 0;
    ChannelSet channels_;
    ConstraintStats stats_;
    int step_count_ = 0;
    Eigen::VectorXd state_;
};

}  // namespace irsalloc
