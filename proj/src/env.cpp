#include "irsalloc/env.hpp"

#include <cmath>
#include <stdexcept>

namespace irsalloc {

void EnvConfig::finalize() {
    if (M < 1 || N < 1 || K < 1 || C < 1)
        throw std::invalid_argument("EnvConfig: all dimension counts must be >= 1");
    if (C < K) throw std::invalid_argument("EnvConfig: C >= K required for constraint feasibility");
    if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("EnvConfig: bandwidth must be positive");
    if (!(w1 > 0.0) || !(w2 > 0.0)) throw std::invalid_argument("EnvConfig: w1, w2 must be positive");
    if (steps_per_episode < 1) throw std::invalid_argument("EnvConfig: steps_per_episode >= 1");
    path_loss.validate();
    fading.validate();

    if (p_t_watts <= 0.0) p_t_watts = dbm_to_watts(p_t_dbm);
    if (sigma2.size() == 0) sigma2 = Eigen::VectorXd::Constant(K, dbm_to_watts(noise_dbm));
    if (sigma2.size() != K) throw std::invalid_argument("EnvConfig: sigma2 size mismatch");
    for (int k = 0; k < K; ++k)
        if (!(sigma2(k) > 0.0)) throw std::invalid_argument("EnvConfig: sigma2 must be positive");

    // nominal link attenuations from the user-area center
    const Vec3 center = topology.user_area.center();
    const double d_bu = (center - topology.bs_position).norm();
    const double d_ru = (center - topology.irs_position).norm();
    const double d_br = (topology.irs_position - topology.bs_position).norm();
    const double g_bu = db_to_linear(-path_attenuation_db(d_bu, path_loss.tau_bu, path_loss));
    feature_scale_bu = 1.0 / std::sqrt(g_bu);
    feature_scale_br = 1.0 / std::sqrt(db_to_linear(-path_attenuation_db(d_br, path_loss.tau_br, path_loss)));
    feature_scale_ru = 1.0 / std::sqrt(db_to_linear(-path_attenuation_db(d_ru, path_loss.tau_ru, path_loss)));

    if (r_min.size() == 0) {
        // equal-share single-user capacity estimate: C/K channels, per-channel
        // power p_t/C, nominal direct gain with full array gain M
        r_min.resize(K);
        for (int k = 0; k < K; ++k) {
            const double snr = (p_t_watts / C) * M * g_bu / sigma2(k);
            const double cap = (static_cast<double>(C) / K) * (bandwidth_hz / C) * std::log2(1.0 + snr);
            r_min(k) = r_min_fraction * cap;
        }
    }
    if (r_min.size() != K) throw std::invalid_argument("EnvConfig: r_min size mismatch");
    if (b.size() == 0) b = r_min;
    if (b.size() != K) throw std::invalid_argument("EnvConfig: b size mismatch");
    for (int k = 0; k < K; ++k)
        if (!(b(k) > 0.0)) throw std::invalid_argument("EnvConfig: b must be positive");

    finalized_ = true;
}

double EnvConfig::rate_norm(int k) const {
    return (bandwidth_hz / C) * std::log2(1.0 + p_t_watts / sigma2(k));
}

double compute_reward(const Eigen::VectorXd& rates, const EnvConfig& cfg) {
    double penalty = 0.0;
    for (int k = 0; k < cfg.K; ++k) {
        const double r = rates(k);
        if (r == 0.0) {
            penalty -= cfg.b(k);
        } else if (r < cfg.r_min(k)) {
            penalty -= r;
        }
    }
    return cfg.w1 * rates.sum() + cfg.w2 * penalty;
}

double discounted_return(const std::vector<double>& rewards, double gamma) {
    if (!(gamma >= 0.0) || !(gamma < 1.0))
        throw std::domain_error("discounted_return: gamma must be in [0, 1)");
    double acc = 0.0;
    double g = 1.0;
    for (double r : rewards) {
        acc += g * r;
        g *= gamma;
    }
    return acc;
}

OfdmEnv::OfdmEnv(EnvConfig config, Rng channel_rng)
    : cfg_(std::move(config)), channel_rng_(channel_rng) {
    if (!cfg_.finalized()) cfg_.finalize();
    if (cfg_.topology.num_users() == 0) {
        Rng user_rng = channel_rng_.fork(0x75736572);  // placement stream
        cfg_.topology = Topology::with_random_users(cfg_.K, user_rng, cfg_.topology);
    }
    if (cfg_.topology.num_users() != cfg_.K)
        throw std::invalid_argument("OfdmEnv: topology user count differs from K");
}

StateLayout OfdmEnv::layout() const {
    StateLayout l;
    l.assignment_onehot = 0;
    l.beams = cfg_.C * cfg_.K;
    l.phases = l.beams + 2 * cfg_.M * cfg_.C;
    l.rates = l.phases + cfg_.N;
    l.h_bu = l.rates + cfg_.K;
    l.H_br = l.h_bu + 2 * cfg_.M * cfg_.K * cfg_.C;
    l.h_ru = l.H_br + 2 * cfg_.M * cfg_.N * cfg_.C;
    l.total = l.h_ru + 2 * cfg_.N * cfg_.K * cfg_.C;
    return l;
}

void OfdmEnv::draw_channels() {
    Rng ep_rng = channel_rng_.fork(episode_index_);
    ++episode_index_;
    channels_ = generate_channels(cfg_.topology, cfg_.path_loss, cfg_.fading, cfg_.M, cfg_.N,
                                  cfg_.C, ep_rng);
}

namespace {

// column-major complex matrix into interleaved (re, im) features
void put_features(Eigen::VectorXd& state, int& pos, const CMat& m, double scale) {
    for (int j = 0; j < m.cols(); ++j)
        for (int i = 0; i < m.rows(); ++i) {
            state(pos++) = m(i, j).real() * scale;
            state(pos++) = m(i, j).imag() * scale;
        }
}

}  // namespace

Eigen::VectorXd OfdmEnv::encode_state(const Action& prev, const Eigen::VectorXd& prev_rates) const {
    const StateLayout l = layout();
    Eigen::VectorXd s = Eigen::VectorXd::Zero(l.total);

    if (!prev.a1.lambda.empty()) {
        for (int c = 0; c < cfg_.C; ++c) s(l.assignment_onehot + c * cfg_.K + prev.a1.lambda[c]) = 1.0;
    }
    if (prev.beams.f.size() > 0) {
        const double inv_scale = 1.0 / cfg_.beam_scale();
        int pos = l.beams;
        for (int c = 0; c < cfg_.C; ++c)
            for (int m = 0; m < cfg_.M; ++m) {
                s(pos++) = prev.beams.f(m, c).real() * inv_scale;
                s(pos++) = prev.beams.f(m, c).imag() * inv_scale;
            }
    }
    if (prev.phase.theta.size() > 0) s.segment(l.phases, cfg_.N) = prev.phase.theta;
    for (int k = 0; k < cfg_.K; ++k) s(l.rates + k) = prev_rates(k) / cfg_.rate_norm(k);

    int pos = l.h_bu;
    for (int c = 0; c < cfg_.C; ++c) put_features(s, pos, channels_.h_bu[c], cfg_.feature_scale_bu);
    if (cfg_.irs_enabled) {
        for (int c = 0; c < cfg_.C; ++c) put_features(s, pos, channels_.H_br[c], cfg_.feature_scale_br);
        for (int c = 0; c < cfg_.C; ++c) put_features(s, pos, channels_.h_ru[c], cfg_.feature_scale_ru);
    }
    return s;
}

Assignment OfdmEnv::extract_assignment(const Eigen::VectorXd& state) const {
    const StateLayout l = layout();
    Assignment a;
    a.lambda.resize(cfg_.C, 0);
    for (int c = 0; c < cfg_.C; ++c)
        for (int k = 0; k < cfg_.K; ++k)
            if (state(l.assignment_onehot + c * cfg_.K + k) == 1.0) a.lambda[c] = k;
    return a;
}

BeamformerSet OfdmEnv::extract_beams(const Eigen::VectorXd& state) const {
    const StateLayout l = layout();
    BeamformerSet beams = BeamformerSet::zeros(cfg_.M, cfg_.C);
    const double scale = cfg_.beam_scale();
    int pos = l.beams;
    for (int c = 0; c < cfg_.C; ++c)
        for (int m = 0; m < cfg_.M; ++m) {
            const double re = state(pos++) * scale;
            const double im = state(pos++) * scale;
            beams.f(m, c) = Cx(re, im);
        }
    return beams;
}

PhaseShift OfdmEnv::extract_phases(const Eigen::VectorXd& state) const {
    const StateLayout l = layout();
    return {state.segment(l.phases, cfg_.N)};
}

Eigen::VectorXd OfdmEnv::extract_rates(const Eigen::VectorXd& state) const {
    const StateLayout l = layout();
    Eigen::VectorXd rates(cfg_.K);
    for (int k = 0; k < cfg_.K; ++k) rates(k) = state(l.rates + k) * cfg_.rate_norm(k);
    return rates;
}

Eigen::VectorXd OfdmEnv::reset() {
    draw_channels();
    step_count_ = 0;
    state_ = encode_state(Action{}, Eigen::VectorXd::Zero(cfg_.K));
    return state_;
}

Action OfdmEnv::decode_action(const std::vector<int>& a1, const Eigen::VectorXd& a2_raw) const {
    if (static_cast<int>(a1.size()) != cfg_.C)
        throw std::invalid_argument("decode_action: assignment length mismatch");
    if (a2_raw.size() != cfg_.a2_dim())
        throw std::invalid_argument("decode_action: a2_raw length mismatch");

    Action act;
    act.a1.lambda = a1;
    act.a1.validate(cfg_.K);
    act.a2_raw = a2_raw;

    const double scale = cfg_.beam_scale();
    act.beams = BeamformerSet::zeros(cfg_.M, cfg_.C);
    int pos = 0;
    for (int c = 0; c < cfg_.C; ++c)
        for (int m = 0; m < cfg_.M; ++m) {
            const double re = a2_raw(pos++) * scale;
            const double im = a2_raw(pos++) * scale;
            act.beams.f(m, c) = Cx(re, im);
        }
    act.phase.theta.resize(cfg_.N);
    for (int n = 0; n < cfg_.N; ++n) {
        double th = M_PI * (a2_raw(pos++) + 1.0);
        th = std::fmod(th, 2.0 * M_PI);
        if (th < 0.0) th += 2.0 * M_PI;
        act.phase.theta(n) = th;
    }
    act.beams = project_power(act.beams, act.a1, cfg_.p_t_watts);
    return act;
}

void OfdmEnv::check_constraints(const Action& act) {
    ++stats_.steps_checked;
    if (total_power(act.a1, act.beams) > cfg_.p_t_watts * (1.0 + 1e-9)) ++stats_.power_violations;
    const CVec ph = act.phase.phasors();
    for (int n = 0; n < ph.size(); ++n)
        if (std::abs(std::abs(ph(n)) - 1.0) > 1e-12) {
            ++stats_.unit_modulus_violations;
            break;
        }
    for (int c = 0; c < cfg_.C; ++c)
        if (act.a1.lambda[c] < 0 || act.a1.lambda[c] >= cfg_.K) {
            ++stats_.occupancy_violations;
            break;
        }
}

StepOutcome OfdmEnv::step(const Action& action) {
    if (state_.size() == 0) throw std::logic_error("OfdmEnv::step before reset");
    check_constraints(action);

    const RateReport rates = sum_rate(action.a1, channels_, action.phase, action.beams, cfg_.sigma2,
                                      cfg_.bandwidth_hz, cfg_.irs_enabled);

    StepOutcome out;
    out.per_user_rates = rates.per_user;
    out.sum_rate = rates.sum_rate;
    out.reward = compute_reward(rates.per_user, cfg_);
    for (int k = 0; k < cfg_.K; ++k)
        if (rates.per_user(k) < cfg_.r_min(k)) ++out.min_rate_violations;

    ++step_count_;
    out.done = step_count_ >= cfg_.steps_per_episode;
    if (cfg_.channel_refresh == ChannelRefresh::PerStep) draw_channels();
    state_ = encode_state(action, rates.per_user);
    out.next_state = state_;
    return out;
}

}  // namespace irsalloc
