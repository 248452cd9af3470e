#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "irsalloc/rng.hpp"

namespace irsalloc {

using Cx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using Vec3 = Eigen::Vector3d;

// Axis-aligned rectangle in the z = height plane, given by opposite corners.
struct Rect {
    double x0 = 100.0, y0 = 0.0;
    double x1 = 200.0, y1 = 100.0;
    double height = 0.0;

    Vec3 center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1), height}; }
    bool contains(const Vec3& p) const {
        return p.x() >= x0 && p.x() <= x1 && p.y() >= y0 && p.y() <= y1;
    }
};

struct Topology {
    Vec3 bs_position{0.0, 0.0, 30.0};
    Vec3 irs_position{75.0, 100.0, 50.0};
    std::vector<Vec3> user_positions;
    Rect user_area{};

    int num_users() const { return static_cast<int>(user_positions.size()); }
    void validate() const;

    // K users placed uniformly inside user_area
    static Topology with_random_users(int num_users, Rng& rng);
    static Topology with_random_users(int num_users, Rng& rng, Topology base);
};

struct PathLossModel {
    double pl0_db = 30.0;  // reference attenuation at d0
    double d0 = 1.0;       // reference distance, meters
    double tau_bu = 3.75;
    double tau_br = 2.2;
    double tau_ru = 2.2;

    void validate() const;
};

enum class FadingKind { Rayleigh, Rician };
enum class LosMode { GeometricSteering, AllOnes };

// Fading law for the IRS links (BS->IRS, IRS->user). The direct BS->user link
// is always Rayleigh.
struct FadingSpec {
    FadingKind kind = FadingKind::Rician;
    double rician_k_factor = 10.0;  // linear power ratio
    LosMode los_mode = LosMode::GeometricSteering;

    void validate() const;
};

// Per-subcarrier channel matrices, index c in [0, C).
struct ChannelSet {
    std::vector<CMat> h_bu;  // M x K, BS -> user (direct)
    std::vector<CMat> H_br;  // M x N, BS -> IRS
    std::vector<CMat> h_ru;  // N x K, IRS -> user

    int num_channels() const { return static_cast<int>(h_bu.size()); }
    int num_bs_antennas() const { return h_bu.empty() ? 0 : static_cast<int>(h_bu[0].rows()); }
    int num_irs_elements() const { return H_br.empty() ? 0 : static_cast<int>(H_br[0].cols()); }
    int num_users() const { return h_bu.empty() ? 0 : static_cast<int>(h_bu[0].cols()); }
};

// Log-distance attenuation in dB: pl0 + 10*tau*log10(d/d0). Throws
// std::domain_error for d < d0 or non-finite inputs.
double path_attenuation_db(double d, double tau, const PathLossModel& model);

// dB/dBm helpers (dB appears only at configuration boundaries)
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

// i.i.d. CN(0,1) entries: real and imaginary parts N(0, 1/2)
CMat sample_rayleigh(Rng& rng, int rows, int cols);

// sqrt(k/(1+k))*los + sqrt(1/(1+k))*rayleigh, same shape as los
CMat sample_rician(Rng& rng, double kappa, const CMat& los);

// Unit-modulus steering phases for a half-wavelength ULA along x: entry p is
// exp(j*pi*p*cos(angle to `toward`)).
CVec steering_vector(int num_elements, const Vec3& from, const Vec3& toward);

// Small-scale fading composed with path-loss amplitudes, independent draws per
// subcarrier. Direct link Rayleigh; IRS links per `fading`.
ChannelSet generate_channels(const Topology& topology, const PathLossModel& model,
                             const FadingSpec& fading, int num_bs_antennas,
                             int num_irs_elements, int num_channels, Rng& rng);

// Flat binary dump: header (M, N, K, C, seed) then interleaved re/im doubles,
// tensors in order h_bu, H_br, h_ru, each subcarrier-major and column-major
// within a matrix.
void write_channels(const std::string& path, const ChannelSet& channels, std::uint64_t seed);
ChannelSet read_channels(const std::string& path, std::uint64_t* seed_out = nullptr);

}  // namespace irsalloc
