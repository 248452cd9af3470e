#pragma once

#include <vector>

#include "irsalloc/mlp.hpp"
#include "irsalloc/replay.hpp"
#include "irsalloc/rng.hpp"

namespace irsalloc {

struct MdqnConfig {
    double learning_rate = 0.002;
    double gamma = 0.99;
    double eps_start = 1.0;
    double eps_end = 0.05;
    long eps_decay_steps = 10000;  // linear decay horizon
    long target_sync_period = 200;
    int batch_size = 64;
    int hidden_width = 128;
    int hidden_layers = 3;
    Optimizer::Kind optimizer = Optimizer::Kind::Adam;
    double clip_norm = 1.0;

    double epsilon_at(long step) const {
        if (step >= eps_decay_steps) return eps_end;
        const double frac = static_cast<double>(step) / static_cast<double>(eps_decay_steps);
        return eps_start + (eps_end - eps_start) * frac;
    }
    void validate() const;
};

// One DQN per channel, each mapping the shared global state to K Q-values for
// its channel's user choice; the joint K^C discrete space factorizes to K*C
// outputs. All networks train on the same shared reward.
class MdqnAgent {
public:
    MdqnAgent(int state_dim, int num_users, int num_channels, MdqnConfig config, Rng& init_rng);

    // epsilon-greedy per channel; greedy ties break to the lowest user index
    std::vector<int> select_discrete(const Eigen::VectorXd& state, double epsilon, Rng& rng) const;

    // y_i = r_i + gamma * max_a' Q(s'_i, a'; w_m^-), bootstrapped at every step
    Eigen::VectorXd td_targets(const Batch& batch, int channel) const;

    // one optimizer step on channel m's network against the batch-mean squared
    // TD error; only the taken action's Q-value receives error signal
    void train_channel(const Batch& batch, int channel);
    void train_step(const Batch& batch);  // all channels

    void sync_targets();

    int num_channels() const { return static_cast<int>(nets_.size()); }
    int num_users() const { return num_users_; }
    long train_steps() const { return train_steps_; }
    const MdqnConfig& config() const { return cfg_; }
    Mlp& net(int channel) { return nets_[channel]; }
    const Mlp& net(int channel) const { return nets_[channel]; }
    const Mlp& target(int channel) const { return targets_[channel]; }

    void save(const std::string& path_prefix) const;
    void load(const std::string& path_prefix);

private:
    MdqnConfig cfg_;
    int num_users_;
    std::vector<Mlp> nets_;
    std::vector<Mlp> targets_;
    std::vector<Optimizer> opts_;
    long train_steps_ = 0;
};

}  // namespace irsalloc
