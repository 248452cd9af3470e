#include "irsalloc/mdqn.hpp"

#include <stdexcept>

namespace irsalloc {

void MdqnConfig::validate() const {
    if (!(eps_start >= 0.0 && eps_start <= 1.0 && eps_end >= 0.0 && eps_end <= 1.0))
        throw std::invalid_argument("MdqnConfig: epsilon must lie in [0, 1]");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("MdqnConfig: gamma in [0, 1)");
    if (target_sync_period < 1) throw std::invalid_argument("MdqnConfig: sync period >= 1");
    if (eps_decay_steps < 1) throw std::invalid_argument("MdqnConfig: eps_decay_steps >= 1");
    if (batch_size < 1 || hidden_width < 1 || hidden_layers < 1)
        throw std::invalid_argument("MdqnConfig: sizes must be >= 1");
}

MdqnAgent::MdqnAgent(int state_dim, int num_users, int num_channels, MdqnConfig config,
                     Rng& init_rng)
    : cfg_(config), num_users_(num_users) {
    cfg_.validate();
    std::vector<int> sizes{state_dim};
    for (int i = 0; i < cfg_.hidden_layers; ++i) sizes.push_back(cfg_.hidden_width);
    sizes.push_back(num_users);
    for (int c = 0; c < num_channels; ++c) {
        nets_.push_back(Mlp::make(sizes, OutputActivation::Linear, init_rng));
        targets_.push_back(nets_.back());
        opts_.push_back(Optimizer::make(cfg_.optimizer, cfg_.learning_rate, nets_.back(), cfg_.clip_norm));
    }
}

std::vector<int> MdqnAgent::select_discrete(const Eigen::VectorXd& state, double epsilon,
                                            Rng& rng) const {
    std::vector<int> a1(nets_.size());
    for (size_t c = 0; c < nets_.size(); ++c) {
        if (epsilon > 0.0 && rng.uniform() < epsilon) {
            a1[c] = rng.uniform_int(num_users_);
            continue;
        }
        const Vec q = nets_[c].forward1(state);
        int best = 0;
        for (int k = 1; k < num_users_; ++k)
            if (q(k) > q(best)) best = k;
        a1[c] = best;
    }
    return a1;
}

Eigen::VectorXd MdqnAgent::td_targets(const Batch& batch, int channel) const {
    const Mat q_next = targets_[channel].forward(batch.s_next);  // K x n
    Eigen::VectorXd y(batch.size());
    for (int i = 0; i < batch.size(); ++i)
        y(i) = batch.r(i) + cfg_.gamma * q_next.col(i).maxCoeff();
    return y;
}

void MdqnAgent::train_channel(const Batch& batch, int channel) {
    const Eigen::VectorXd y = td_targets(batch, channel);
    ForwardCache cache;
    const Mat q = nets_[channel].forward(batch.s, &cache);
    const int n = batch.size();
    Mat dy = Mat::Zero(q.rows(), q.cols());
    for (int i = 0; i < n; ++i) {
        const int a = batch.a1(channel, i);
        dy(a, i) = 2.0 * (q(a, i) - y(i)) / n;
    }
    Gradients grads = nets_[channel].backward(cache, dy);
    opts_[channel].step(nets_[channel], grads);
}

void MdqnAgent::train_step(const Batch& batch) {
    for (int c = 0; c < num_channels(); ++c) train_channel(batch, c);
    ++train_steps_;
}

void MdqnAgent::sync_targets() {
    for (int c = 0; c < num_channels(); ++c) copy_parameters(nets_[c], targets_[c]);
}

void MdqnAgent::save(const std::string& prefix) const {
    for (int c = 0; c < num_channels(); ++c) save_mlp(prefix + "_ch" + std::to_string(c) + ".bin", nets_[c]);
}

void MdqnAgent::load(const std::string& prefix) {
    for (int c = 0; c < num_channels(); ++c) {
        Mlp loaded = load_mlp(prefix + "_ch" + std::to_string(c) + ".bin");
        copy_parameters(loaded, nets_[c]);
        copy_parameters(loaded, targets_[c]);
    }
}

}  // namespace irsalloc
