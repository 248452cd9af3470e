#include "irsalloc/phy.hpp"

#include <stdexcept>

namespace irsalloc {

void Assignment::validate(int num_users) const {
    for (int v : lambda)
        if (v < 0 || v >= num_users) throw std::out_of_range("Assignment: user index out of range");
}

CVec effective_channel(int c, int k, const ChannelSet& ch, const PhaseShift& phase,
                       bool include_irs) {
    if (c < 0 || c >= ch.num_channels()) throw std::out_of_range("effective_channel: channel index");
    if (k < 0 || k >= ch.num_users()) throw std::out_of_range("effective_channel: user index");
    CVec h = ch.h_bu[c].col(k);
    if (include_irs) {
        if (phase.size() != ch.num_irs_elements())
            throw std::invalid_argument("effective_channel: phase size mismatch");
        // entry m of the reflected path: sum_n H_br(m, n) e^{j theta_n} h_ru(n, k);
        // plain transposition, no conjugation
        const CVec reflected = phase.phasors().cwiseProduct(ch.h_ru[c].col(k));
        h += ch.H_br[c] * reflected;
    }
    return h;
}

double user_rate(int c, int k, const ChannelSet& ch, const PhaseShift& phase, const CVec& f_c,
                 double sigma2, double bandwidth_hz, int num_channels, bool include_irs) {
    if (!(sigma2 > 0.0)) throw std::domain_error("user_rate: sigma2 must be positive");
    if (!(bandwidth_hz > 0.0)) throw std::domain_error("user_rate: bandwidth must be positive");
    if (num_channels < 1) throw std::domain_error("user_rate: channel count must be >= 1");
    const CVec h = effective_channel(c, k, ch, phase, include_irs);
    const Cx g = h.transpose() * f_c;
    const double snr = std::norm(g) / sigma2;
    return bandwidth_hz / num_channels * std::log2(1.0 + snr);
}

RateReport sum_rate(const Assignment& assignment, const ChannelSet& ch, const PhaseShift& phase,
                    const BeamformerSet& beams, const Eigen::VectorXd& sigma2, double bandwidth_hz,
                    bool include_irs) {
    const int C = ch.num_channels();
    const int K = ch.num_users();
    if (assignment.num_channels() != C || beams.num_channels() != C)
        throw std::invalid_argument("sum_rate: channel count mismatch");
    if (sigma2.size() != K) throw std::invalid_argument("sum_rate: sigma2 size mismatch");
    assignment.validate(K);

    RateReport report;
    report.per_user = Eigen::VectorXd::Zero(K);
    for (int c = 0; c < C; ++c) {
        const int k = assignment.lambda[c];
        const double r =
            user_rate(c, k, ch, phase, beams.f.col(c), sigma2(k), bandwidth_hz, C, include_irs);
        report.per_user(k) += r;
        report.sum_rate += r;
    }
    return report;
}

double total_power(const Assignment& assignment, const BeamformerSet& beams) {
    (void)assignment;  // every channel carries exactly one assigned user
    return beams.f.squaredNorm();
}

BeamformerSet project_power(const BeamformerSet& beams, const Assignment& assignment, double p_t) {
    if (!(p_t > 0.0)) throw std::domain_error("project_power: p_t must be positive");
    const double total = total_power(assignment, beams);
    if (total <= p_t) return beams;
    BeamformerSet out = beams;
    out.f *= std::sqrt(p_t / total);
    return out;
}

}  // namespace irsalloc
