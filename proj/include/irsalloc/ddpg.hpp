#pragma once

#include "irsalloc/mlp.hpp"
#include "irsalloc/replay.hpp"
#include "irsalloc/rng.hpp"

namespace irsalloc {

struct DdpgConfig {
    double actor_lr = 0.001;
    double critic_lr = 0.002;
    double gamma = 0.99;
    double noise_sigma_start = 0.2;
    double noise_decay = 0.999;  // multiplicative per step
    double noise_floor = 0.01;
    long target_sync_period = 200;
    int batch_size = 64;
    int hidden_width = 128;
    int hidden_layers = 2;
    bool soft_updates = false;  // hard copies by default
    double polyak_tau = 0.005;
    Optimizer::Kind optimizer = Optimizer::Kind::Adam;
    double clip_norm = 1.0;

    double sigma_at(long step) const {
        return std::max(noise_floor, noise_sigma_start * std::pow(noise_decay, static_cast<double>(step)));
    }
    void validate() const;
};

// Deterministic actor-critic for the continuous sub-action. The critic
// conditions on the full hybrid action: state, one-hot discrete part, raw
// continuous part.
class DdpgAgent {
public:
    DdpgAgent(int state_dim, int action_dim, int num_users, int num_channels, DdpgConfig config,
              Rng& init_rng);

    // tanh actor output plus Gaussian noise, clamped back to [-1, 1]
    Eigen::VectorXd select_continuous(const Eigen::VectorXd& state, double noise_sigma,
                                      Rng& rng) const;

    // y_i = r_i + gamma * Q(s'_i, mu(s'_i; theta^-); lambda^-), with the stored
    // discrete one-hot reused for the next-state action
    Eigen::VectorXd critic_targets(const Batch& batch) const;

    // gradient of the batch-mean squared TD error w.r.t. critic parameters
    Gradients critic_gradients(const Batch& batch) const;
    // descent gradient on -J, J = batch-mean Q(s, mu(s)); critic untouched
    Gradients actor_gradients(const Batch& batch) const;

    void apply_critic(Gradients& grads);
    void apply_actor(Gradients& grads);

    void critic_train_step(const Batch& batch);
    void actor_train_step(const Batch& batch);
    // Algorithm-1 order: both gradients from the current parameter snapshot,
    // then both updates applied.
    void train_step(const Batch& batch);

    void sync_targets();

    int state_dim() const { return state_dim_; }
    int action_dim() const { return action_dim_; }
    int critic_input_dim() const { return state_dim_ + num_users_ * num_channels_ + action_dim_; }
    const DdpgConfig& config() const { return cfg_; }
    Mlp& actor() { return actor_; }
    const Mlp& actor() const { return actor_; }
    Mlp& critic() { return critic_; }
    const Mlp& critic() const { return critic_; }
    const Mlp& target_actor() const { return target_actor_; }
    const Mlp& target_critic() const { return target_critic_; }

    Mat critic_input(const Mat& states, const Eigen::MatrixXi& a1, const Mat& a2) const;

    void save(const std::string& path_prefix) const;
    void load(const std::string& path_prefix);

private:
    DdpgConfig cfg_;
    int state_dim_;
    int action_dim_;
    int num_users_;
    int num_channels_;
    Mlp actor_, critic_, target_actor_, target_critic_;
    Optimizer actor_opt_, critic_opt_;
};

}  // namespace irsalloc
