#include "irsalloc/channel.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace irsalloc {

void Topology::validate() const {
    if (user_positions.empty()) throw std::invalid_argument("Topology: K >= 1 required");
    auto finite3 = [](const Vec3& v) { return v.allFinite(); };
    if (!finite3(bs_position) || !finite3(irs_position))
        throw std::invalid_argument("Topology: non-finite node position");
    for (const auto& u : user_positions)
        if (!finite3(u)) throw std::invalid_argument("Topology: non-finite user position");
    if (!(user_area.x1 >= user_area.x0) || !(user_area.y1 >= user_area.y0))
        throw std::invalid_argument("Topology: degenerate user_area");
}

Topology Topology::with_random_users(int num_users, Rng& rng) {
    return with_random_users(num_users, rng, Topology{});
}

Topology Topology::with_random_users(int num_users, Rng& rng, Topology base) {
    if (num_users < 1) throw std::invalid_argument("Topology: K >= 1 required");
    base.user_positions.clear();
    base.user_positions.reserve(num_users);
    for (int k = 0; k < num_users; ++k) {
        const double x = rng.uniform(base.user_area.x0, base.user_area.x1);
        const double y = rng.uniform(base.user_area.y0, base.user_area.y1);
        base.user_positions.emplace_back(x, y, base.user_area.height);
    }
    base.validate();
    return base;
}

void PathLossModel::validate() const {
    if (!(pl0_db >= 0.0)) throw std::invalid_argument("PathLossModel: pl0_db >= 0 required");
    if (!(d0 > 0.0)) throw std::invalid_argument("PathLossModel: d0 > 0 required");
    if (!(tau_bu > 0.0) || !(tau_br > 0.0) || !(tau_ru > 0.0))
        throw std::invalid_argument("PathLossModel: exponents must be positive");
}

void FadingSpec::validate() const {
    if (!std::isfinite(rician_k_factor) || rician_k_factor < 0.0)
        throw std::invalid_argument("FadingSpec: kappa must be finite and non-negative");
}

double path_attenuation_db(double d, double tau, const PathLossModel& model) {
    if (!std::isfinite(d) || !std::isfinite(tau))
        throw std::domain_error("path_attenuation_db: non-finite input");
    if (d < model.d0) throw std::domain_error("path_attenuation_db: d < d0");
    return model.pl0_db + 10.0 * tau * std::log10(d / model.d0);
}

CMat sample_rayleigh(Rng& rng, int rows, int cols) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("sample_rayleigh: invalid dimensions");
    CMat h(rows, cols);
    const double s = std::sqrt(0.5);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) h(i, j) = Cx(s * rng.normal(), s * rng.normal());
    return h;
}

CMat sample_rician(Rng& rng, double kappa, const CMat& los) {
    if (!std::isfinite(kappa) || kappa < 0.0)
        throw std::invalid_argument("sample_rician: kappa must be finite and non-negative");
    const CMat nlos = sample_rayleigh(rng, static_cast<int>(los.rows()), static_cast<int>(los.cols()));
    const double a = std::sqrt(kappa / (1.0 + kappa));
    const double b = std::sqrt(1.0 / (1.0 + kappa));
    return a * los + b * nlos;
}

CVec steering_vector(int num_elements, const Vec3& from, const Vec3& toward) {
    const Vec3 d = toward - from;
    const double norm = d.norm();
    // cos of the angle between the array axis (x) and the outgoing direction
    const double cos_phi = norm > 0.0 ? d.x() / norm : 0.0;
    CVec a(num_elements);
    for (int p = 0; p < num_elements; ++p) {
        const double phase = M_PI * p * cos_phi;
        a(p) = Cx(std::cos(phase), std::sin(phase));
    }
    return a;
}

namespace {

double amplitude_from_db(double att_db) { return std::sqrt(db_to_linear(-att_db)); }

}  // namespace

ChannelSet generate_channels(const Topology& topology, const PathLossModel& model,
                             const FadingSpec& fading, int num_bs_antennas,
                             int num_irs_elements, int num_channels, Rng& rng) {
    topology.validate();
    model.validate();
    fading.validate();
    const int M = num_bs_antennas, N = num_irs_elements, C = num_channels;
    const int K = topology.num_users();
    if (M < 1 || N < 1 || C < 1)
        throw std::invalid_argument("generate_channels: dimensions must be >= 1");

    // per-link attenuation amplitudes
    const double d_br = (topology.irs_position - topology.bs_position).norm();
    const double amp_br = amplitude_from_db(path_attenuation_db(d_br, model.tau_br, model));
    Eigen::VectorXd amp_bu(K), amp_ru(K);
    for (int k = 0; k < K; ++k) {
        const double d_bu = (topology.user_positions[k] - topology.bs_position).norm();
        const double d_ru = (topology.user_positions[k] - topology.irs_position).norm();
        amp_bu(k) = amplitude_from_db(path_attenuation_db(d_bu, model.tau_bu, model));
        amp_ru(k) = amplitude_from_db(path_attenuation_db(d_ru, model.tau_ru, model));
    }

    // LOS components for the IRS links (unit-modulus entries)
    CMat los_br = CMat::Ones(M, N);
    CMat los_ru = CMat::Ones(N, K);
    if (fading.los_mode == LosMode::GeometricSteering) {
        const CVec a_bs = steering_vector(M, topology.bs_position, topology.irs_position);
        const CVec a_irs = steering_vector(N, topology.irs_position, topology.bs_position);
        los_br = a_bs * a_irs.transpose();
        for (int k = 0; k < K; ++k)
            los_ru.col(k) = steering_vector(N, topology.irs_position, topology.user_positions[k]);
    }

    auto small_scale = [&](const CMat& los) {
        if (fading.kind == FadingKind::Rayleigh)
            return sample_rayleigh(rng, static_cast<int>(los.rows()), static_cast<int>(los.cols()));
        return sample_rician(rng, fading.rician_k_factor, los);
    };

    ChannelSet ch;
    ch.h_bu.reserve(C);
    ch.H_br.reserve(C);
    ch.h_ru.reserve(C);
    for (int c = 0; c < C; ++c) {
        CMat bu = sample_rayleigh(rng, M, K);
        for (int k = 0; k < K; ++k) bu.col(k) *= amp_bu(k);
        ch.h_bu.push_back(std::move(bu));

        ch.H_br.push_back(amp_br * small_scale(los_br));

        CMat ru = small_scale(los_ru);
        for (int k = 0; k < K; ++k) ru.col(k) *= amp_ru(k);
        ch.h_ru.push_back(std::move(ru));
    }
    return ch;
}

namespace {

constexpr char kChannelMagic[8] = {'I', 'R', 'S', 'C', 'H', 'N', '1', '\n'};

void write_cmat(std::ofstream& out, const CMat& m) {
    for (int j = 0; j < m.cols(); ++j)
        for (int i = 0; i < m.rows(); ++i) {
            const double re = m(i, j).real(), im = m(i, j).imag();
            out.write(reinterpret_cast<const char*>(&re), sizeof re);
            out.write(reinterpret_cast<const char*>(&im), sizeof im);
        }
}

CMat read_cmat(std::ifstream& in, int rows, int cols) {
    CMat m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) {
            double re = 0.0, im = 0.0;
            in.read(reinterpret_cast<char*>(&re), sizeof re);
            in.read(reinterpret_cast<char*>(&im), sizeof im);
            m(i, j) = Cx(re, im);
        }
    return m;
}

}  // namespace

void write_channels(const std::string& path, const ChannelSet& ch, std::uint64_t seed) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_channels: cannot open " + path);
    out.write(kChannelMagic, sizeof kChannelMagic);
    const std::int32_t dims[4] = {ch.num_bs_antennas(), ch.num_irs_elements(), ch.num_users(),
                                  ch.num_channels()};
    out.write(reinterpret_cast<const char*>(dims), sizeof dims);
    out.write(reinterpret_cast<const char*>(&seed), sizeof seed);
    for (const auto& m : ch.h_bu) write_cmat(out, m);
    for (const auto& m : ch.H_br) write_cmat(out, m);
    for (const auto& m : ch.h_ru) write_cmat(out, m);
    if (!out) throw std::runtime_error("write_channels: write failed for " + path);
}

ChannelSet read_channels(const std::string& path, std::uint64_t* seed_out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_channels: cannot open " + path);
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kChannelMagic, sizeof magic) != 0)
        throw std::runtime_error("read_channels: bad header in " + path);
    std::int32_t dims[4];
    in.read(reinterpret_cast<char*>(dims), sizeof dims);
    std::uint64_t seed = 0;
    in.read(reinterpret_cast<char*>(&seed), sizeof seed);
    if (seed_out) *seed_out = seed;
    const int M = dims[0], N = dims[1], K = dims[2], C = dims[3];
    if (M < 1 || N < 1 || K < 1 || C < 1) throw std::runtime_error("read_channels: bad dimensions");
    ChannelSet ch;
    for (int c = 0; c < C; ++c) ch.h_bu.push_back(read_cmat(in, M, K));
    for (int c = 0; c < C; ++c) ch.H_br.push_back(read_cmat(in, M, N));
    for (int c = 0; c < C; ++c) ch.h_ru.push_back(read_cmat(in, N, K));
    if (!in) throw std::runtime_error("read_channels: truncated file " + path);
    return ch;
}

}  // namespace irsalloc
