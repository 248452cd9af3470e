#include <doctest.h>

#include "irsalloc/ddpg.hpp"

using namespace irsalloc;

namespace {

constexpr int kStateDim = 5;
constexpr int kActionDim = 3;
constexpr int kUsers = 2;
constexpr int kChannels = 2;

DdpgConfig tiny_config() {
    DdpgConfig cfg;
    cfg.hidden_width = 8;
    cfg.hidden_layers = 2;
    cfg.batch_size = 4;
    return cfg;
}

Batch random_batch(Rng& rng, int n, int state_dim = kStateDim, int action_dim = kActionDim,
                   int channels = kChannels, int users = kUsers) {
    Batch b;
    b.s.resize(state_dim, n);
    b.s_next.resize(state_dim, n);
    b.a1.resize(channels, n);
    b.a2.resize(action_dim, n);
    b.r.resize(n);
    for (int i = 0; i < n; ++i) {
        for (int d = 0; d < state_dim; ++d) {
            b.s(d, i) = rng.normal();
            b.s_next(d, i) = rng.normal();
        }
        for (int c = 0; c < channels; ++c) b.a1(c, i) = rng.uniform_int(users);
        for (int d = 0; d < action_dim; ++d) b.a2(d, i) = rng.uniform(-1.0, 1.0);
        b.r(i) = rng.normal();
    }
    return b;
}

void set_constant_output(Mlp& net, double value) {
    for (int l = 0; l < net.num_layers(); ++l) {
        net.weights(l).setZero();
        net.biases(l).setZero();
    }
    net.biases(net.num_layers() - 1).setConstant(value);
}

}  // namespace

TEST_CASE("ddpg: zero noise returns the deterministic actor output") {
    Rng init(1);
    DdpgAgent agent(kStateDim, kActionDim, kUsers, kChannels, tiny_config(), init);
    Rng rng(2);
    const Vec s = Vec::Ones(kStateDim);
    CHECK(agent.select_continuous(s, 0.0, rng) == agent.actor().forward1(s));
}

TEST_CASE("ddpg: noisy actions stay clamped to [-1, 1]") {
    Rng init(3);
    DdpgAgent agent(kStateDim, kActionDim, kUsers, kChannels, tiny_config(), init);
    Rng rng(4);
    const Vec s = Vec::Ones(kStateDim);
    for (int i = 0; i < 2000; ++i) {
        const Vec a = agent.select_continuous(s, 2.0, rng);
        CHECK(a.minCoeff() >= -1.0);
        CHECK(a.maxCoeff() <= 1.0);
    }
}

TEST_CASE("ddpg: exploration noise has the configured scale") {
    Rng init(5);
    DdpgAgent agent(kStateDim, kActionDim, kUsers, kChannels, tiny_config(), init);
    set_constant_output(agent.actor(), 0.0);  // interior outputs, no clamping bias
    Rng rng(6);
    const Vec s = Vec::Zero(kStateDim);
    double sum = 0.0, sum2 = 0.0;
    const int n = 100000;
    for (int i = 0; i < n / kActionDim; ++i) {
        const Vec a = agent.select_continuous(s, 0.2, rng);
        for (int d = 0; d < kActionDim; ++d) {
            sum += a(d);
            sum2 += a(d) * a(d);
        }
    }
    const int total = (n / kActionDim) * kActionDim;
    const double mean = sum / total;
    const double stddev = std::sqrt(sum2 / total - mean * mean);
    CHECK(stddev == doctest::Approx(0.2).epsilon(0.05));
}

TEST_CASE("ddpg: critic targets follow the bootstrapped rule") {
    DdpgConfig cfg = tiny_config();
    cfg.gamma = 0.9;
    Rng init(7);
    DdpgAgent agent(kStateDim, kActionDim, kUsers, kChannels, cfg, init);
    Rng rng(8);
    Batch batch = random_batch(rng, 3);
    batch.r.setConstant(0.5);

    Mlp constant_critic = agent.critic();
    set_constant_output(constant_critic, 1.0);
    copy_parameters(constant_critic, agent.critic());
    agent.sync_targets();

    const Eigen::VectorXd y = agent.critic_targets(batch);
    for (int i = 0; i < 3; ++i) CHECK(y(i) == doctest::Approx(0.5 + 0.9 * 1.0));

    DdpgConfig myopic = tiny_config();
    myopic.gamma = 0.0;
    Rng init2(9);
    DdpgAgent agent2(kStateDim, kActionDim, kUsers, kChannels, myopic, init2);
    const Eigen::VectorXd y2 = agent2.critic_targets(batch);
    for (int i = 0; i < 3; ++i) CHECK(y2(i) == batch.r(i));
}

TEST_CASE("ddpg: critic targets match a per-sample recomputation") {
    Rng init(10);
    DdpgAgent agent(kStateDim, kActionDim, kUsers, kChannels, tiny_config(), init);
    Rng rng(11);
    const Batch batch = random_batch(rng, 8);
    const Eigen::VectorXd y = agent.critic_targets(batch);
    for (int i = 0; i < batch.size(); ++i) {
        const Vec a_next = agent.target_actor().forward1(batch.s_next.col(i));
        Vec x = Vec::Zero(agent.critic_input_dim());
        x.head(kStateDim) = batch.s_next.col(i);
        for (int c = 0; c < kChannels; ++c) x(kStateDim + c * kUsers + batch.a1(c, i)) = 1.0;
        x.tail(kActionDim) = a_next;
        const double q = agent.target_critic().forward1(x)(0);
        CHECK(y(i) == doctest::Approx(batch.r(i) + agent.config().gamma * q).epsilon(1e-12));
    }
}

TEST_CASE("ddpg: zero TD error gives a zero critic gradient") {
    DdpgConfig cfg = tiny_config();
    cfg.gamma = 0.0;
    Rng init(12);
    DdpgAgent agent(kStateDim, kActionDim, kUsers, kChannels, cfg, init);
    Rng rng(13);
    Batch batch = random_batch(rng, 4);
    const Mat q = agent.critic().forward(agent.critic_input(batch.s, batch.a1, batch.a2));
    for (int i = 0; i < 4; ++i) batch.r(i) = q(0, i);
    const Gradients g = agent.critic_gradients(batch);
    CHECK(gradient_global_norm(g) < 1e-12);
}

TEST_CASE("ddpg: critic loss decreases after one step at a small rate") {
    DdpgConfig cfg = tiny_config();
    cfg.critic_lr = 1e-4;
    cfg.optimizer = Optimizer::Kind::Sgd;
    Rng init(14);
    DdpgAgent agent(kStateDim, kActionDim, kUsers, kChannels, cfg, init);
    Rng rng(15);
    const Batch batch = random_batch(rng, 8);

    auto loss = [&]() {
        const Eigen::VectorXd y = agent.critic_targets(batch);
        const Mat q = agent.critic().forward(agent.critic_input(batch.s, batch.a1, batch.a2));
        double acc = 0.0;
        for (int i = 0; i < batch.size(); ++i) acc += (q(0, i) - y(i)) * (q(0, i) - y(i));
        return acc / batch.size();
    };

    const double before = loss();
    agent.critic_train_step(batch);
    CHECK(loss() < before);
}

TEST_CASE("ddpg: a constant critic produces a zero actor gradient") {
    Rng init(16);
    DdpgAgent agent(kStateDim, kActionDim, kUsers, kChannels, tiny_config(), init);
    Mlp flat = agent.critic();
    set_constant_output(flat, 3.0);
    copy_parameters(flat, agent.critic());
    Rng rng(17);
    const Batch batch = random_batch(rng, 4);
    const Gradients g = agent.actor_gradients(batch);
    CHECK(gradient_global_norm(g) == 0.0);
}

TEST_CASE("ddpg: composed actor gradient matches finite differences") {
    DdpgConfig cfg = tiny_config();
    cfg.hidden_width = 6;
    Rng init(18);
    // tiny dimensions: state 2, action 1, K=1, C=1
    DdpgAgent agent(2, 1, 1, 1, cfg, init);
    Rng rng(19);
    const Batch batch = random_batch(rng, 4, 2, 1, 1, 1);

    // J(theta) = mean_i Q(s_i, mu(s_i)); actor_gradients returns -dJ/dtheta
    auto mean_q = [&]() {
        const Mat a = agent.actor().forward(batch.s);
        const Mat q = agent.critic().forward(agent.critic_input(batch.s, batch.a1, a));
        return q.row(0).mean();
    };

    const Gradients g = agent.actor_gradients(batch);
    const double h = 1e-5;
    for (int l = 0; l < agent.actor().num_layers(); ++l) {
        for (int j = 0; j < agent.actor().weights(l).cols(); ++j)
            for (int i = 0; i < agent.actor().weights(l).rows(); ++i) {
                const double w0 = agent.actor().weights(l)(i, j);
                agent.actor().weights(l)(i, j) = w0 + h;
                const double up = mean_q();
                agent.actor().weights(l)(i, j) = w0 - h;
                const double dn = mean_q();
                agent.actor().weights(l)(i, j) = w0;
                const double fd = (up - dn) / (2.0 * h);
                CHECK(std::abs(-g.dw[l](i, j) - fd) <= std::max(1e-4 * std::abs(fd), 1e-6));
            }
    }
}

TEST_CASE("ddpg: critic gradient w.r.t. the action input matches finite differences") {
    Rng init(20);
    DdpgAgent agent(kStateDim, kActionDim, kUsers, kChannels, tiny_config(), init);
    Rng rng(21);
    const Batch batch = random_batch(rng, 1);
    const Mat x = agent.critic_input(batch.s, batch.a1, batch.a2);

    ForwardCache cache;
    agent.critic().forward(x, &cache);
    Mat dx;
    agent.critic().backward(cache, Mat::Ones(1, 1), &dx);

    const double h = 1e-5;
    for (int d = 0; d < kActionDim; ++d) {
        Mat xp = x, xm = x;
        const int row = agent.critic_input_dim() - kActionDim + d;
        xp(row, 0) += h;
        xm(row, 0) -= h;
        const double fd =
            (agent.critic().forward(xp)(0, 0) - agent.critic().forward(xm)(0, 0)) / (2.0 * h);
        CHECK(std::abs(dx(row, 0) - fd) <= std::max(1e-4 * std::abs(fd), 1e-6));
    }
}

TEST_CASE("ddpg: one actor step increases the batch-mean Q") {
    DdpgConfig cfg = tiny_config();
    cfg.actor_lr = 1e-4;
    cfg.optimizer = Optimizer::Kind::Sgd;
    Rng init(22);
    DdpgAgent agent(kStateDim, kActionDim, kUsers, kChannels, cfg, init);
    Rng rng(23);
    const Batch batch = random_batch(rng, 8);

    auto mean_q = [&]() {
        const Mat a = agent.actor().forward(batch.s);
        const Mat q = agent.critic().forward(agent.critic_input(batch.s, batch.a1, a));
        return q.row(0).mean();
    };

    const double before = mean_q();
    agent.actor_train_step(batch);
    CHECK(mean_q() > before);
}

TEST_CASE("ddpg: actor and critic updates do not cross-contaminate") {
    Rng init(24);
    DdpgAgent agent(kStateDim, kActionDim, kUsers, kChannels, tiny_config(), init);
    Rng rng(25);
    const Batch batch = random_batch(rng, 4);

    const Mat critic_w = agent.critic().weights(0);
    agent.actor_train_step(batch);
    CHECK(agent.critic().weights(0) == critic_w);

    const Mat actor_w = agent.actor().weights(0);
    agent.critic_train_step(batch);
    CHECK(agent.actor().weights(0) == actor_w);
}

TEST_CASE("ddpg: target sync is a hard copy, frozen between syncs") {
    Rng init(26);
    DdpgAgent agent(kStateDim, kActionDim, kUsers, kChannels, tiny_config(), init);
    Rng rng(27);
    const Batch batch = random_batch(rng, 4);
    const Vec s = Vec::Ones(kStateDim);

    const Vec target_before = agent.target_actor().forward1(s);
    agent.train_step(batch);
    CHECK(agent.target_actor().forward1(s) == target_before);

    agent.sync_targets();
    CHECK(agent.target_actor().forward1(s) == agent.actor().forward1(s));
    agent.sync_targets();
    CHECK(agent.target_actor().forward1(s) == agent.actor().forward1(s));
}

TEST_CASE("ddpg: architecture dimensions follow the action encoding") {
    Rng init(28);
    const int M = 3, N = 5, C = 4, K = 2;
    const int a2_dim = 2 * M * C + N;
    const int state_dim = 17;
    DdpgAgent agent(state_dim, a2_dim, K, C, tiny_config(), init);
    CHECK(agent.actor().output_dim() == a2_dim);
    CHECK(agent.critic().input_dim() == state_dim + C * K + a2_dim);
}

TEST_CASE("ddpg: noise schedule decays to the floor") {
    DdpgConfig cfg;
    CHECK(cfg.sigma_at(0) == doctest::Approx(0.2));
    CHECK(cfg.sigma_at(1) == doctest::Approx(0.2 * 0.999));
    CHECK(cfg.sigma_at(100000) == doctest::Approx(0.01));
}
