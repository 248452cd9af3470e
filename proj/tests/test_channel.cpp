#include <doctest.h>

#include <cstdio>

#include "irsalloc/channel.hpp"

using namespace irsalloc;

namespace {

Topology two_user_topology() {
    Topology t;
    t.user_positions = {{150.0, 50.0, 0.0}, {120.0, 80.0, 0.0}};
    return t;
}

}  // namespace

TEST_CASE("path attenuation: reference cases") {
    PathLossModel model;
    CHECK(path_attenuation_db(1.0, 2.2, model) == doctest::Approx(30.0));
    CHECK(path_attenuation_db(model.d0, 3.75, model) == doctest::Approx(model.pl0_db));
    CHECK(path_attenuation_db(100.0, 3.75, model) == doctest::Approx(105.0));
}

TEST_CASE("path attenuation: domain errors") {
    PathLossModel model;
    CHECK_THROWS_AS(path_attenuation_db(0.5, 2.2, model), std::domain_error);
    CHECK_THROWS_AS(path_attenuation_db(std::nan(""), 2.2, model), std::domain_error);
    CHECK_THROWS_AS(path_attenuation_db(10.0, std::nan(""), model), std::domain_error);
}

TEST_CASE("path attenuation: strictly increasing in d and tau beyond d0") {
    PathLossModel model;
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        const double d = rng.uniform(1.5, 300.0);
        const double tau = rng.uniform(1.5, 4.0);
        CHECK(path_attenuation_db(d * 1.01, tau, model) > path_attenuation_db(d, tau, model));
        CHECK(path_attenuation_db(d, tau + 0.1, model) > path_attenuation_db(d, tau, model));
    }
}

TEST_CASE("rayleigh: determinism and moments") {
    Rng a(123), b(123);
    const CMat h1 = sample_rayleigh(a, 8, 8);
    const CMat h2 = sample_rayleigh(b, 8, 8);
    CHECK(h1 == h2);

    Rng rng(77);
    const int n = 100000;
    const CMat h = sample_rayleigh(rng, n, 1);
    double power = 0.0, re_mean = 0.0, re_var = 0.0;
    for (int i = 0; i < n; ++i) {
        power += std::norm(h(i, 0));
        re_mean += h(i, 0).real();
    }
    power /= n;
    re_mean /= n;
    for (int i = 0; i < n; ++i) re_var += (h(i, 0).real() - re_mean) * (h(i, 0).real() - re_mean);
    re_var /= n;
    CHECK(power == doctest::Approx(1.0).epsilon(0.02));
    CHECK(re_var == doctest::Approx(0.5).epsilon(0.02));
    CHECK_THROWS_AS(sample_rayleigh(rng, 0, 3), std::invalid_argument);
}

TEST_CASE("rician: limit cases") {
    const CMat los = CMat::Ones(4, 4);
    // kappa = 0 degenerates to the same Rayleigh draw
    Rng a(9), b(9);
    CHECK(sample_rician(a, 0.0, los) == sample_rayleigh(b, 4, 4));
    // kappa -> infinity pins the sample to the LOS component
    Rng c(10);
    const CMat h = sample_rician(c, 1e9, los);
    for (int j = 0; j < 4; ++j)
        for (int i = 0; i < 4; ++i) CHECK(std::abs(h(i, j) - los(i, j)) < 1e-4);
    Rng d(11);
    CHECK_THROWS_AS(sample_rician(d, -1.0, los), std::invalid_argument);
}

TEST_CASE("rician: kappa=10 power split") {
    Rng rng(21);
    const int n = 100000;
    const CMat los = CMat::Ones(n, 1);
    const CMat h = sample_rician(rng, 10.0, los);
    Cx mean = 0.0;
    for (int i = 0; i < n; ++i) mean += h(i, 0);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (int i = 0; i < n; ++i) var += std::norm(h(i, 0) - mean);
    var /= n;
    CHECK(std::norm(mean) == doctest::Approx(10.0 / 11.0).epsilon(0.012));
    CHECK(var == doctest::Approx(1.0 / 11.0).epsilon(0.05));
}

TEST_CASE("steering vector has unit modulus entries") {
    const CVec a = steering_vector(16, {0, 0, 30}, {75, 100, 50});
    for (int i = 0; i < a.size(); ++i) CHECK(std::abs(std::abs(a(i)) - 1.0) < 1e-12);
}

TEST_CASE("generate_channels: determinism") {
    const Topology topo = two_user_topology();
    PathLossModel model;
    FadingSpec fading;
    Rng a(2024), b(2024);
    const ChannelSet ch1 = generate_channels(topo, model, fading, 3, 5, 2, a);
    const ChannelSet ch2 = generate_channels(topo, model, fading, 3, 5, 2, b);
    for (int c = 0; c < 2; ++c) {
        CHECK(ch1.h_bu[c] == ch2.h_bu[c]);
        CHECK(ch1.H_br[c] == ch2.H_br[c]);
        CHECK(ch1.h_ru[c] == ch2.h_ru[c]);
    }
    CHECK(ch1.num_bs_antennas() == 3);
    CHECK(ch1.num_irs_elements() == 5);
    CHECK(ch1.num_users() == 2);
    CHECK(ch1.num_channels() == 2);
}

TEST_CASE("generate_channels: per-entry power matches the attenuation") {
    Topology topo;
    topo.user_positions = {{150.0, 50.0, 0.0}};
    PathLossModel model;
    FadingSpec fading;
    const double d = (topo.user_positions[0] - topo.bs_position).norm();
    const double expected = db_to_linear(-path_attenuation_db(d, model.tau_bu, model));

    double power = 0.0;
    long count = 0;
    for (int seed = 0; seed < 200; ++seed) {
        Rng rng(1000 + seed);
        const ChannelSet ch = generate_channels(topo, model, fading, 5, 2, 100, rng);
        for (const auto& m : ch.h_bu) {
            power += m.squaredNorm();
            count += m.size();
        }
    }
    power /= static_cast<double>(count);
    CHECK(power == doctest::Approx(expected).epsilon(0.02));
}

TEST_CASE("generate_channels: larger direct exponent weakens the direct link") {
    const Topology topo = two_user_topology();
    PathLossModel model;
    PathLossModel steeper = model;
    steeper.tau_bu *= 2.0;
    FadingSpec fading;
    Rng a(5), b(5);  // identical small-scale draws
    const ChannelSet base = generate_channels(topo, model, fading, 4, 4, 4, a);
    const ChannelSet atten = generate_channels(topo, steeper, fading, 4, 4, 4, b);
    for (int c = 0; c < 4; ++c) {
        CHECK(atten.h_bu[c].squaredNorm() < base.h_bu[c].squaredNorm());
    }
}

TEST_CASE("channel dump round-trips bitwise") {
    const Topology topo = two_user_topology();
    Rng rng(31337);
    const ChannelSet ch = generate_channels(topo, PathLossModel{}, FadingSpec{}, 3, 4, 2, rng);
    const std::string path = "channels_test.bin";
    write_channels(path, ch, 31337);
    std::uint64_t seed = 0;
    const ChannelSet back = read_channels(path, &seed);
    CHECK(seed == 31337);
    for (int c = 0; c < 2; ++c) {
        CHECK(ch.h_bu[c] == back.h_bu[c]);
        CHECK(ch.H_br[c] == back.H_br[c]);
        CHECK(ch.h_ru[c] == back.h_ru[c]);
    }
    std::remove(path.c_str());
}

TEST_CASE("random user placement stays inside the area") {
    Rng rng(4);
    const Topology t = Topology::with_random_users(50, rng);
    for (const auto& u : t.user_positions) CHECK(t.user_area.contains(u));
}
