#include <doctest.h>

#include "fourwave/bath.hpp"
#include "fourwave/fock.hpp"
#include "fourwave/units.hpp"
#include "test_helpers.hpp"

using namespace fourwave;

namespace {

std::vector<CouplingChannel> single_channel(double weight, Eigen::Index n_modes = 1) {
    CouplingChannel ch;
    ch.system_op = Eigen::MatrixXcd::Identity(1, 1);
    ch.mode_weights = Eigen::VectorXd::Constant(n_modes, weight);
    return {ch};
}

// independent route: Tr{rho B~(t) B} in a truncated oscillator
complexd correlation_fock(double omega, double coupling, double beta, double t,
                          int levels) {
    const Eigen::MatrixXd b = fock::boson_lowering(levels);
    const Eigen::MatrixXd bop = omega * coupling * (b + b.transpose());
    Eigen::VectorXd energy(levels);
    for (int n = 0; n < levels; ++n) energy[n] = omega * (n + 0.5);
    Eigen::VectorXd rho = (-beta * (energy.array() - energy.minCoeff())).exp();
    rho /= rho.sum();

    complexd acc(0.0, 0.0);
    for (int m = 0; m < levels; ++m)
        for (int n = 0; n < levels; ++n) {
            const complexd phase = std::exp(complexd(0.0, (energy[m] - energy[n]) * t));
            acc += rho[m] * phase * bop(m, n) * bop(n, m);
        }
    return acc;
}

} // namespace

TEST_CASE("zero-temperature limit: C(t) = w^2 c^2 e^{-iwt}") {
    const double omega = 0.21, c = 0.7;
    const auto channels = single_channel(c);
    const Eigen::VectorXd freqs = Eigen::VectorXd::Constant(1, omega);
    for (double t : {0.0, 3.0, 11.5}) {
        const complexd got = correlation(channels, freqs, 1e6, t)(0, 0);
        const complexd expected =
            omega * omega * c * c * std::exp(complexd(0.0, -omega * t));
        CHECK(std::abs(got - expected) < 1e-12);
    }
}

TEST_CASE("C(0) is real and matches the coth sum") {
    const double omega = 0.15, c = 0.4, beta = 7.0;
    const auto channels = single_channel(c);
    const Eigen::VectorXd freqs = Eigen::VectorXd::Constant(1, omega);
    const complexd c0 = correlation(channels, freqs, beta, 0.0)(0, 0);
    CHECK(c0.imag() == 0.0);
    CHECK(c0.real() ==
          doctest::Approx(omega * omega * c * c / std::tanh(0.5 * beta * omega)));
    CHECK(c0.real() >= 0.0);
}

TEST_CASE("single mode at finite temperature matches the Fock-space trace") {
    const double omega = 0.3, c = 0.55;
    const double beta = 1.0 / omega;  // beta hbar w = 1
    const auto channels = single_channel(c);
    const Eigen::VectorXd freqs = Eigen::VectorXd::Constant(1, omega);
    for (double t : {0.0, 1.7, 6.4, 20.0}) {
        const complexd got = correlation(channels, freqs, beta, t)(0, 0);
        const complexd oracle = correlation_fock(omega, c, beta, t, 40);
        CHECK(std::abs(got - oracle) < 1e-8 * std::abs(oracle));
    }
}

TEST_CASE("hermiticity C_ab(-t) = C_ba(t)* at 100 random times") {
    SplitMix64 rng(99);
    std::vector<CouplingChannel> channels(2);
    const Eigen::VectorXd freqs =
        (Eigen::VectorXd(3) << 0.11, 0.23, 0.4).finished();
    for (auto& ch : channels) {
        ch.system_op = Eigen::MatrixXcd::Identity(2, 2);
        ch.mode_weights.resize(3);
        for (int n = 0; n < 3; ++n) ch.mode_weights[n] = rng.gaussian();
    }
    for (int trial = 0; trial < 100; ++trial) {
        const double t = 40.0 * (rng.uniform() - 0.5);
        const Eigen::MatrixXcd plus = correlation(channels, freqs, 3.0, t);
        const Eigen::MatrixXcd minus = correlation(channels, freqs, 3.0, -t);
        CHECK((minus - plus.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("correlation is bilinear in the channel weights") {
    const Eigen::VectorXd freqs = Eigen::VectorXd::Constant(1, 0.17);
    std::vector<CouplingChannel> channels(2);
    channels[0].system_op = Eigen::MatrixXcd::Identity(1, 1);
    channels[0].mode_weights = Eigen::VectorXd::Constant(1, 0.6);
    channels[1].system_op = Eigen::MatrixXcd::Identity(1, 1);
    channels[1].mode_weights = Eigen::VectorXd::Constant(1, -0.35);
    const Eigen::MatrixXcd base = correlation(channels, freqs, 2.0, 4.2);
    channels[0].mode_weights *= 2.0;  // power of two: scaling is exact
    const Eigen::MatrixXcd scaled = correlation(channels, freqs, 2.0, 4.2);
    CHECK(scaled(0, 1) == base(0, 1) * 2.0);
    CHECK(scaled(1, 0) == base(1, 0) * 2.0);
    CHECK(scaled(0, 0) == base(0, 0) * 4.0);
    CHECK(scaled(1, 1) == base(1, 1));
}

TEST_CASE("high-temperature limit approaches 2 w c^2 / beta") {
    const double omega = 0.2, c = 0.3;
    const double beta = 0.01 / omega;  // beta hbar w = 0.01
    const auto channels = single_channel(c);
    const Eigen::VectorXd freqs = Eigen::VectorXd::Constant(1, omega);
    const double got = correlation(channels, freqs, beta, 0.0)(0, 0).real();
    const double classical = 2.0 * omega * c * c / beta;
    CHECK(std::abs(got - classical) < 0.01 * classical);
}

TEST_CASE("coth guard holds at large argument") {
    CHECK(units::coth_clamped(51.0) == 1.0);
    CHECK(units::coth_clamped(49.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("beta validation") {
    const auto channels = single_channel(0.5);
    const Eigen::VectorXd freqs = Eigen::VectorXd::Constant(1, 0.2);
    CHECK_THROWS_AS(correlation(channels, freqs, 0.0, 1.0), validation_error);
    CHECK_THROWS_AS(correlation(channels, freqs, -2.0, 1.0), validation_error);
}

TEST_CASE("drude-lorentz discretization reproduces the reorganization energy") {
    const double lambda = units::wavenumber_to_angular(35.0);
    const double gamma = units::wavenumber_to_angular(50.0);
    const BathSpec bath =
        discretize_spectral_density(SpectralDensityKind::drude_lorentz, lambda, gamma, 100);
    const double recovered =
        (bath.diagonal_couplings.row(0).transpose().array().square() *
         bath.mode_freqs.array())
            .sum();
    const double recovered_invcm = units::angular_to_wavenumber(recovered);
    CHECK(recovered_invcm > 34.65);
    CHECK(recovered_invcm < 35.35);
    CHECK((bath.mode_freqs.array() > 0.0).all());
}

TEST_CASE("single-mode discretization carries the full reorganization energy") {
    const double lambda = units::wavenumber_to_angular(35.0);
    const double gamma = units::wavenumber_to_angular(50.0);
    const BathSpec bath =
        discretize_spectral_density(SpectralDensityKind::drude_lorentz, lambda, gamma, 1);
    REQUIRE(bath.mode_freqs.size() == 1);
    CHECK(bath.diagonal_couplings(0, 0) * bath.diagonal_couplings(0, 0) *
              bath.mode_freqs[0] ==
          doctest::Approx(lambda).epsilon(1e-12));
    // midpoint quantile of the Drude weight sits at the cutoff frequency
    CHECK(bath.mode_freqs[0] == doctest::Approx(gamma).epsilon(1e-12));
}

TEST_CASE("ohmic discretization matches the analytic reorganization energy") {
    const double lambda = units::wavenumber_to_angular(20.0);
    const double wc = units::wavenumber_to_angular(80.0);
    const BathSpec bath =
        discretize_spectral_density(SpectralDensityKind::ohmic_exp, lambda, wc, 64);
    const double recovered =
        (bath.diagonal_couplings.row(0).transpose().array().square() *
         bath.mode_freqs.array())
            .sum();
    CHECK(std::abs(recovered - lambda) < 0.01 * lambda);
    CHECK_THROWS_AS(spectral_density_from_name("square"), validation_error);
}

TEST_CASE("diagonal couplings become orthogonal projector channels") {
    BathSpec bath;
    bath.mode_freqs = (Eigen::VectorXd(2) << 0.1, 0.3).finished();
    bath.diagonal_couplings.resize(2, 2);
    bath.diagonal_couplings << 0.2, 0.1, -0.4, 0.3;
    bath.beta = 2.0;

    const auto channels = diagonal_to_channels(bath);
    REQUIRE(channels.size() == 2);
    Eigen::MatrixXcd sum = channels[0].system_op + channels[1].system_op;
    CHECK((sum - Eigen::MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((channels[0].system_op * channels[1].system_op).cwiseAbs().maxCoeff() == 0.0);
    CHECK((channels[0].mode_weights - bath.diagonal_couplings.row(0).transpose()).norm() ==
          0.0);

    BathSpec single;
    single.mode_freqs = Eigen::VectorXd::Constant(1, 0.2);
    single.diagonal_couplings = Eigen::MatrixXd::Constant(1, 1, 0.5);
    single.beta = 1.0;
    const auto one = diagonal_to_channels(single);
    REQUIRE(one.size() == 1);
    CHECK(one[0].system_op(0, 0) == complexd(1.0, 0.0));
}

TEST_CASE("channels reproduce the diagonal coupling Hamiltonian exactly") {
    // H_eb = sum_j sum_n w_n g_{j,n} (b_n + b_n^+) |j><j|, built both ways
    BathSpec bath;
    bath.mode_freqs = Eigen::VectorXd::Constant(1, 0.25);
    bath.diagonal_couplings.resize(2, 1);
    bath.diagonal_couplings << 0.3, -0.2;
    bath.beta = 1.0;
    const int levels = 4;

    const Eigen::MatrixXd b = fock::boson_lowering(levels);
    const Eigen::MatrixXd x = b + b.transpose();
    Eigen::MatrixXd direct = Eigen::MatrixXd::Zero(2 * levels, 2 * levels);
    for (int j = 0; j < 2; ++j)
        direct.block(j * levels, j * levels, levels, levels) =
            bath.mode_freqs[0] * bath.diagonal_couplings(j, 0) * x;

    Eigen::MatrixXcd from_channels = Eigen::MatrixXcd::Zero(2 * levels, 2 * levels);
    for (const auto& ch : diagonal_to_channels(bath)) {
        const Eigen::MatrixXd bop = bath.mode_freqs[0] * ch.mode_weights[0] * x;
        for (int j = 0; j < 2; ++j)
            for (int jp = 0; jp < 2; ++jp)
                from_channels.block(j * levels, jp * levels, levels, levels) +=
                    ch.system_op(j, jp) * bop;
    }
    CHECK((from_channels - direct.cast<complexd>()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("correlation table: symmetry, interpolation, range checks") {
    SplitMix64 rng(123);
    std::vector<CouplingChannel> channels(2);
    const Eigen::VectorXd freqs = (Eigen::VectorXd(2) << 0.12, 0.31).finished();
    for (auto& ch : channels) {
        ch.system_op = Eigen::MatrixXcd::Identity(1, 1);
        ch.mode_weights.resize(2);
        for (int n = 0; n < 2; ++n) ch.mode_weights[n] = rng.gaussian();
    }
    const double beta = 4.0;

    const CorrelationTable table(channels, freqs, beta, 0.5, 80);
    CHECK(table.at_step(0, 1, -7) == std::conj(table.at_step(1, 0, 7)));

    // off-grid cubic interpolation against the closed form
    double coarse_err = 0.0;
    for (double t : {3.21, 11.77, 26.4}) {
        const complexd exact = correlation(channels, freqs, beta, t)(0, 1);
        coarse_err = std::max(coarse_err, std::abs(table.at_time(0, 1, t) - exact));
    }
    const CorrelationTable fine(channels, freqs, beta, 0.25, 160);
    double fine_err = 0.0;
    for (double t : {3.21, 11.77, 26.4}) {
        const complexd exact = correlation(channels, freqs, beta, t)(0, 1);
        fine_err = std::max(fine_err, std::abs(fine.at_time(0, 1, t) - exact));
    }
    CHECK(coarse_err < 1e-4);
    CHECK(fine_err < coarse_err / 6.0);

    CHECK_THROWS_AS(table.at_step(0, 0, 81), validation_error);
    CHECK_THROWS_AS(table.at_time(0, 0, 40.3), validation_error);
}
