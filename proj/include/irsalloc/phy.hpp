#pragma once

#include <Eigen/Dense>
#include <vector>

#include "irsalloc/channel.hpp"

namespace irsalloc {

// IRS reflection phases theta_n in [0, 2*pi); reflection amplitude is fixed
// at 1, so each coefficient is exp(j*theta_n).
struct PhaseShift {
    Eigen::VectorXd theta;

    int size() const { return static_cast<int>(theta.size()); }
    CVec phasors() const {
        CVec p(theta.size());
        for (int n = 0; n < theta.size(); ++n) p(n) = Cx(std::cos(theta(n)), std::sin(theta(n)));
        return p;
    }
    static PhaseShift zeros(int n) { return {Eigen::VectorXd::Zero(n)}; }
};

// One beamforming vector per subcarrier (column c serves the user assigned to
// channel c).
struct BeamformerSet {
    CMat f;  // M x C

    int num_channels() const { return static_cast<int>(f.cols()); }
    static BeamformerSet zeros(int m, int c) { return {CMat::Zero(m, c)}; }
};

// lambda[c] names the user served on channel c; exactly one user per channel,
// so the occupancy constraints hold by construction.
struct Assignment {
    std::vector<int> lambda;

    int num_channels() const { return static_cast<int>(lambda.size()); }
    void validate(int num_users) const;
};

// Composite channel whose transpose multiplies f_c: h_bu + H_br^T * diag(e^{j theta}) * h_ru.
// With include_irs false the reflected term is omitted.
CVec effective_channel(int c, int k, const ChannelSet& ch, const PhaseShift& phase,
                       bool include_irs = true);

// (B/C) * log2(1 + |h_eff^T f|^2 / sigma2), bits/s
double user_rate(int c, int k, const ChannelSet& ch, const PhaseShift& phase, const CVec& f_c,
                 double sigma2, double bandwidth_hz, int num_channels, bool include_irs = true);

struct RateReport {
    double sum_rate = 0.0;        // bits/s
    Eigen::VectorXd per_user;     // K entries, bits/s
};

RateReport sum_rate(const Assignment& assignment, const ChannelSet& ch, const PhaseShift& phase,
                    const BeamformerSet& beams, const Eigen::VectorXd& sigma2, double bandwidth_hz,
                    bool include_irs = true);

// sum over channels of ||f_c||^2, watts
double total_power(const Assignment& assignment, const BeamformerSet& beams);

// Common-scale projection onto the power budget: unchanged when already within
// p_t, otherwise every beamformer scaled by sqrt(p_t / total).
BeamformerSet project_power(const BeamformerSet& beams, const Assignment& assignment, double p_t);

}  // namespace irsalloc
