#include "irsalloc/ddpg.hpp"

#include <stdexcept>

namespace irsalloc {

void DdpgConfig::validate() const {
    if (!(actor_lr > 0.0) || !(critic_lr > 0.0))
        throw std::invalid_argument("DdpgConfig: learning rates must be positive");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("DdpgConfig: gamma in [0, 1)");
    if (noise_sigma_start < 0.0 || noise_floor < 0.0)
        throw std::invalid_argument("DdpgConfig: noise sigma must be non-negative");
    if (target_sync_period < 1) throw std::invalid_argument("DdpgConfig: sync period >= 1");
    if (batch_size < 1 || hidden_width < 1 || hidden_layers < 1)
        throw std::invalid_argument("DdpgConfig: sizes must be >= 1");
}

namespace {

std::vector<int> arch(int in, int hidden, int layers, int out) {
    std::vector<int> sizes{in};
    for (int i = 0; i < layers; ++i) sizes.push_back(hidden);
    sizes.push_back(out);
    return sizes;
}

}  // namespace

DdpgAgent::DdpgAgent(int state_dim, int action_dim, int num_users, int num_channels,
                     DdpgConfig config, Rng& init_rng)
    : cfg_(config),
      state_dim_(state_dim),
      action_dim_(action_dim),
      num_users_(num_users),
      num_channels_(num_channels),
      actor_(Mlp::make(arch(state_dim, config.hidden_width, config.hidden_layers, action_dim),
                       OutputActivation::Tanh, init_rng)),
      critic_(Mlp::make(arch(state_dim + num_users * num_channels + action_dim,
                             config.hidden_width, config.hidden_layers, 1),
                        OutputActivation::Linear, init_rng)),
      target_actor_(actor_),
      target_critic_(critic_),
      actor_opt_(Optimizer::make(config.optimizer, config.actor_lr, actor_, config.clip_norm)),
      critic_opt_(Optimizer::make(config.optimizer, config.critic_lr, critic_, config.clip_norm)) {
    cfg_.validate();
}

Eigen::VectorXd DdpgAgent::select_continuous(const Eigen::VectorXd& state, double noise_sigma,
                                             Rng& rng) const {
    Vec a = actor_.forward1(state);
    if (noise_sigma > 0.0) {
        for (int i = 0; i < a.size(); ++i) a(i) += noise_sigma * rng.normal();
    }
    return a.cwiseMax(-1.0).cwiseMin(1.0);
}

Mat DdpgAgent::critic_input(const Mat& states, const Eigen::MatrixXi& a1, const Mat& a2) const {
    const int n = static_cast<int>(states.cols());
    Mat x = Mat::Zero(critic_input_dim(), n);
    x.topRows(state_dim_) = states;
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < num_channels_; ++c)
            x(state_dim_ + c * num_users_ + a1(c, i), i) = 1.0;
    x.bottomRows(action_dim_) = a2;
    return x;
}

Eigen::VectorXd DdpgAgent::critic_targets(const Batch& batch) const {
    const Mat a_next = target_actor_.forward(batch.s_next);
    const Mat q_next = target_critic_.forward(critic_input(batch.s_next, batch.a1, a_next));
    return batch.r + cfg_.gamma * q_next.row(0).transpose();
}

Gradients DdpgAgent::critic_gradients(const Batch& batch) const {
    const Eigen::VectorXd y = critic_targets(batch);
    ForwardCache cache;
    const Mat q = critic_.forward(critic_input(batch.s, batch.a1, batch.a2), &cache);
    const int n = batch.size();
    Mat dy(1, n);
    for (int i = 0; i < n; ++i) dy(0, i) = 2.0 * (q(0, i) - y(i)) / n;
    return critic_.backward(cache, dy);
}

Gradients DdpgAgent::actor_gradients(const Batch& batch) const {
    const int n = batch.size();
    ForwardCache actor_cache;
    const Mat a = actor_.forward(batch.s, &actor_cache);
    ForwardCache critic_cache;
    critic_.forward(critic_input(batch.s, batch.a1, a), &critic_cache);
    // dJ/d(critic input) with J = mean Q; keep only the action slice
    Mat dq = Mat::Constant(1, n, 1.0 / n);
    Mat dx;
    critic_.backward(critic_cache, dq, &dx);
    const Mat da = dx.bottomRows(action_dim_);
    // descend on -J
    return actor_.backward(actor_cache, -da);
}

void DdpgAgent::apply_critic(Gradients& grads) { critic_opt_.step(critic_, grads); }
void DdpgAgent::apply_actor(Gradients& grads) { actor_opt_.step(actor_, grads); }

void DdpgAgent::critic_train_step(const Batch& batch) {
    Gradients g = critic_gradients(batch);
    apply_critic(g);
}

void DdpgAgent::actor_train_step(const Batch& batch) {
    Gradients g = actor_gradients(batch);
    apply_actor(g);
}

void DdpgAgent::train_step(const Batch& batch) {
    Gradients gc = critic_gradients(batch);
    Gradients ga = actor_gradients(batch);
    apply_actor(ga);
    apply_critic(gc);
}

void DdpgAgent::sync_targets() {
    if (!cfg_.soft_updates) {
        copy_parameters(actor_, target_actor_);
        copy_parameters(critic_, target_critic_);
        return;
    }
    const double tau = cfg_.polyak_tau;
    for (int l = 0; l < actor_.num_layers(); ++l) {
        target_actor_.weights(l) = (1.0 - tau) * target_actor_.weights(l) + tau * actor_.weights(l);
        target_actor_.biases(l) = (1.0 - tau) * target_actor_.biases(l) + tau * actor_.biases(l);
    }
    for (int l = 0; l < critic_.num_layers(); ++l) {
        target_critic_.weights(l) = (1.0 - tau) * target_critic_.weights(l) + tau * critic_.weights(l);
        target_critic_.biases(l) = (1.0 - tau) * target_critic_.biases(l) + tau * critic_.biases(l);
    }
}

void DdpgAgent::save(const std::string& prefix) const {
    save_mlp(prefix + "_actor.bin", actor_);
    save_mlp(prefix + "_critic.bin", critic_);
    save_mlp(prefix + "_target_actor.bin", target_actor_);
    save_mlp(prefix + "_target_critic.bin", target_critic_);
}

void DdpgAgent::load(const std::string& prefix) {
    copy_parameters(load_mlp(prefix + "_actor.bin"), actor_);
    copy_parameters(load_mlp(prefix + "_critic.bin"), critic_);
    copy_parameters(load_mlp(prefix + "_target_actor.bin"), target_actor_);
    copy_parameters(load_mlp(prefix + "_target_critic.bin"), target_critic_);
}

}  // namespace irsalloc
