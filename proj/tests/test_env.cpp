#include <doctest.h>

#include "irsalloc/env.hpp"

using namespace irsalloc;

namespace {

EnvConfig small_config() {
    EnvConfig cfg;
    cfg.M = 2;
    cfg.K = 2;
    cfg.N = 3;
    cfg.C = 2;
    cfg.steps_per_episode = 5;
    cfg.topology.user_positions = {{150.0, 50.0, 0.0}, {120.0, 30.0, 0.0}};
    return cfg;
}

Eigen::VectorXd random_raw(Rng& rng, int dim) {
    Eigen::VectorXd a(dim);
    for (int i = 0; i < dim; ++i) a(i) = rng.uniform(-1.0, 1.0);
    return a;
}

}  // namespace

TEST_CASE("env: state length follows the layout formula") {
    EnvConfig cfg = small_config();
    cfg.finalize();
    // (M,K,N,C) = (2,2,3,2): 4 + 8 + 3 + 2 + 16 + 24 + 24 = 81
    CHECK(cfg.state_dim() == 81);
    OfdmEnv env(cfg, Rng(1));
    CHECK(env.reset().size() == 81);
    const StateLayout l = env.layout();
    CHECK(l.total == 81);
}

TEST_CASE("env: reset is deterministic and starts with zeroed history") {
    const EnvConfig cfg = small_config();
    OfdmEnv env1(cfg, Rng(5));
    OfdmEnv env2(cfg, Rng(5));
    const Eigen::VectorXd s1 = env1.reset();
    const Eigen::VectorXd s2 = env2.reset();
    CHECK(s1 == s2);

    const StateLayout l = env1.layout();
    CHECK(s1.segment(l.assignment_onehot, l.h_bu - l.assignment_onehot).isZero());
    // channel features populated
    CHECK(s1.segment(l.h_bu, l.total - l.h_bu).norm() > 0.0);
}

TEST_CASE("env: decode_action midpoint and boundary mapping") {
    EnvConfig cfg = small_config();
    OfdmEnv env(cfg, Rng(2));
    env.reset();
    const int a2_dim = env.config().a2_dim();

    const Action zeros = env.decode_action({0, 1}, Eigen::VectorXd::Zero(a2_dim));
    CHECK(zeros.beams.f.norm() == 0.0);
    for (int n = 0; n < env.config().N; ++n) CHECK(zeros.phase.theta(n) == doctest::Approx(M_PI));

    Eigen::VectorXd raw = Eigen::VectorXd::Zero(a2_dim);
    raw(a2_dim - 1) = 1.0;  // phase raw +1 wraps to 0
    const Action wrapped = env.decode_action({0, 1}, raw);
    CHECK(wrapped.phase.theta(env.config().N - 1) == doctest::Approx(0.0));

    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const Action act = env.decode_action({rng.uniform_int(2), rng.uniform_int(2)},
                                             random_raw(rng, a2_dim));
        CHECK(total_power(act.a1, act.beams) <= env.config().p_t_watts * (1.0 + 1e-9));
        for (int n = 0; n < env.config().N; ++n) {
            CHECK(act.phase.theta(n) >= 0.0);
            CHECK(act.phase.theta(n) < 2.0 * M_PI);
        }
    }
    CHECK_THROWS_AS(env.decode_action({0, 1}, Eigen::VectorXd::Zero(a2_dim + 1)),
                    std::invalid_argument);
}

TEST_CASE("env: state layout is a bijection over executed actions") {
    EnvConfig cfg = small_config();
    OfdmEnv env(cfg, Rng(7));
    env.reset();
    Rng rng(8);
    const Action act = env.decode_action({1, 0}, random_raw(rng, env.config().a2_dim()));
    const StepOutcome out = env.step(act);

    const Assignment a = env.extract_assignment(out.next_state);
    CHECK(a.lambda == act.a1.lambda);
    const BeamformerSet beams = env.extract_beams(out.next_state);
    CHECK((beams.f - act.beams.f).norm() <= 1e-12 * std::max(1.0, act.beams.f.norm()));
    const PhaseShift phase = env.extract_phases(out.next_state);
    CHECK(phase.theta == act.phase.theta);
    const Eigen::VectorXd rates = env.extract_rates(out.next_state);
    CHECK((rates - out.per_user_rates).norm() <=
          1e-12 * std::max(1.0, out.per_user_rates.norm()));
}

TEST_CASE("env: reward branches of the penalty term") {
    EnvConfig cfg = small_config();
    cfg.r_min = Eigen::VectorXd::Constant(2, 10.0);
    cfg.b = Eigen::VectorXd::Constant(2, 7.0);
    cfg.finalize();

    Eigen::VectorXd rates(2);
    rates << 20.0, 15.0;  // all above r_min
    CHECK(compute_reward(rates, cfg) == doctest::Approx(35.0));

    rates << 20.0, 0.0;  // zero rate pays -b
    CHECK(compute_reward(rates, cfg) == doctest::Approx(20.0 - 7.0));

    rates << 20.0, 5.0;  // shortfall pays -R_k
    CHECK(compute_reward(rates, cfg) == doctest::Approx(25.0 - 5.0));
}

TEST_CASE("env: reward decomposition stays within the penalty band") {
    EnvConfig cfg = small_config();
    cfg.finalize();
    Rng rng(11);
    const double bound =
        cfg.w2 * cfg.K * std::max(cfg.b.maxCoeff(), cfg.r_min.maxCoeff());
    for (int trial = 0; trial < 500; ++trial) {
        Eigen::VectorXd rates(2);
        for (int k = 0; k < 2; ++k)
            rates(k) = rng.uniform() < 0.25 ? 0.0 : rng.uniform(0.0, 3.0 * cfg.r_min(k));
        const double r = compute_reward(rates, cfg);
        const double penalty = r - cfg.w1 * rates.sum();
        CHECK(penalty <= 0.0);
        CHECK(penalty >= -bound - 1e-9);
    }
}

TEST_CASE("env: step bookkeeping and termination") {
    EnvConfig cfg = small_config();
    OfdmEnv env(cfg, Rng(13));
    Eigen::VectorXd s = env.reset();
    Rng rng(14);
    for (int t = 0; t < cfg.steps_per_episode; ++t) {
        const Action act = env.decode_action({rng.uniform_int(2), rng.uniform_int(2)},
                                             random_raw(rng, env.config().a2_dim()));
        const StepOutcome out = env.step(act);
        CHECK(out.reward == compute_reward(out.per_user_rates, env.config()));
        CHECK(out.done == (t == cfg.steps_per_episode - 1));
        s = out.next_state;
    }
    CHECK(env.constraint_stats().total() == 0);
}

TEST_CASE("env: zero beams pay the full zero-rate penalty") {
    EnvConfig cfg = small_config();
    OfdmEnv env(cfg, Rng(15));
    env.reset();
    const Action act = env.decode_action({0, 1}, Eigen::VectorXd::Zero(cfg.a2_dim()));
    const StepOutcome out = env.step(act);
    CHECK(out.sum_rate == 0.0);
    const double expected = -env.config().w2 * env.config().b.sum();
    CHECK(out.reward == doctest::Approx(expected));
    CHECK(out.min_rate_violations == cfg.K);
}

TEST_CASE("env: without the IRS the phases are inert") {
    EnvConfig cfg = small_config();
    cfg.irs_enabled = false;
    OfdmEnv env(cfg, Rng(17));
    env.reset();
    Rng rng(18);
    const Eigen::VectorXd raw = random_raw(rng, cfg.a2_dim());
    Eigen::VectorXd raw2 = raw;
    raw2.tail(cfg.N) = random_raw(rng, cfg.N);  // different phases only

    const Action a1 = env.decode_action({0, 1}, raw);
    const Action a2 = env.decode_action({0, 1}, raw2);
    const StepOutcome o1 = env.step(a1);
    const StepOutcome o2 = env.step(a2);  // same channels (per-episode refresh)
    CHECK(o1.per_user_rates == o2.per_user_rates);

    // reflected-channel features are zeroed in the state
    const StateLayout l = env.layout();
    CHECK(o1.next_state.segment(l.H_br, l.total - l.H_br).isZero());
}

TEST_CASE("env: per-step refresh redraws the channel features") {
    EnvConfig cfg = small_config();
    cfg.channel_refresh = ChannelRefresh::PerStep;
    OfdmEnv env(cfg, Rng(19));
    const Eigen::VectorXd s0 = env.reset();
    const Action act = env.decode_action({0, 1}, Eigen::VectorXd::Zero(cfg.a2_dim()));
    const StepOutcome out = env.step(act);
    const StateLayout l = env.layout();
    CHECK(s0.segment(l.h_bu, l.total - l.h_bu) != out.next_state.segment(l.h_bu, l.total - l.h_bu));
}

TEST_CASE("discounted return: trivial and hand-computed values") {
    CHECK(discounted_return({}, 0.5) == 0.0);
    CHECK(discounted_return({3.0, 9.0, 27.0}, 0.0) == 3.0);
    CHECK(discounted_return({1.0, 1.0, 1.0}, 0.5) == doctest::Approx(1.75));
    CHECK_THROWS_AS(discounted_return({1.0}, 1.0), std::domain_error);
    CHECK_THROWS_AS(discounted_return({1.0}, -0.1), std::domain_error);
}

TEST_CASE("env config: invariant violations are rejected") {
    EnvConfig bad = small_config();
    bad.C = 1;  // C < K
    CHECK_THROWS_AS(bad.finalize(), std::invalid_argument);

    EnvConfig bad2 = small_config();
    bad2.w1 = 0.0;
    CHECK_THROWS_AS(bad2.finalize(), std::invalid_argument);

    EnvConfig bad3 = small_config();
    bad3.b = Eigen::VectorXd::Zero(2);
    CHECK_THROWS_AS(bad3.finalize(), std::invalid_argument);
}
