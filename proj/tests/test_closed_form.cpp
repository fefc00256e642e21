#include <doctest.h>

#include "fourwave/closed_form.hpp"
#include "fourwave/fock.hpp"
#include "fourwave/oracle.hpp"
#include "test_helpers.hpp"

using namespace fourwave;

namespace {

// e^{S} for anti-Hermitian S via the Hermitian eigendecomposition of iS
Eigen::MatrixXcd exp_antihermitian(const Eigen::MatrixXcd& s) {
    const Eigen::MatrixXcd herm = complexd(0.0, 1.0) * s;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(herm);
    Eigen::VectorXcd phases(solver.eigenvalues().size());
    for (Eigen::Index i = 0; i < phases.size(); ++i)
        phases[i] = std::exp(complexd(0.0, -solver.eigenvalues()[i]));
    return solver.eigenvectors() * phases.asDiagonal() * solver.eigenvectors().adjoint();
}

// S(t) = -g (b e^{-iwt} - b^+ e^{iwt}) in a truncated oscillator
Eigen::MatrixXcd displacement_generator(double g, double omega, double t, int levels) {
    const Eigen::MatrixXd b = fock::boson_lowering(levels);
    const complexd down = std::exp(complexd(0.0, -omega * t));
    return -g * (down * b.cast<complexd>() -
                 std::conj(down) * b.transpose().cast<complexd>());
}

struct Dimer {
    Eigen::VectorXd energies;
    BathSpec bath;
    DipoleProjection dipoles;
};

Dimer make_dimer(double g_scale, std::uint64_t seed) {
    SplitMix64 rng(seed);
    Dimer d;
    d.energies = (Eigen::VectorXd(2) << -0.06, 0.09).finished();
    d.bath.mode_freqs = (Eigen::VectorXd(2) << 0.12, 0.21).finished();
    d.bath.diagonal_couplings.resize(2, 2);
    for (int j = 0; j < 2; ++j)
        for (int n = 0; n < 2; ++n)
            d.bath.diagonal_couplings(j, n) = g_scale * (0.5 + 0.5 * rng.uniform());
    d.bath.beta = 8.0;
    d.dipoles.d1 = (Eigen::VectorXd(2) << 0.9, 0.4).finished();
    d.dipoles.d2 = (Eigen::VectorXd(2) << 0.7, -0.3).finished();
    d.dipoles.d3 = (Eigen::VectorXd(2) << 0.2, 1.1).finished();
    d.dipoles.dm = (Eigen::VectorXd(2) << 1.0, 0.5).finished();
    return d;
}

complexd dipole_product_sum(int k, const DipoleProjection& d) {
    switch (k) {
        case 1: return complexd(d.d2.dot(d.d1) * d.d3.dot(d.dm), 0.0);
        case 2: return complexd(d.d3.dot(d.d1) * d.d2.dot(d.dm), 0.0);
        case 3: return complexd(d.d3.dot(d.d2) * d.d1.dot(d.dm), 0.0);
        default: return complexd(d.d1.dot(d.d2) * d.d3.dot(d.dm), 0.0);
    }
}

} // namespace

TEST_CASE("displacement trace trivial limits") {
    const Eigen::VectorXd freqs = (Eigen::VectorXd(2) << 0.1, 0.4).finished();
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
    CHECK(displacement_trace(zero, zero, 1.0, 2.0, 0.5, 3.0, 2.0, freqs) ==
          complexd(1.0, 0.0));

    // degenerate arguments: x = x' and y = y' cancel every exponent
    const Eigen::VectorXd g = (Eigen::VectorXd(2) << 0.4, -0.25).finished();
    const complexd val = displacement_trace(g, g, 1.7, 1.7, 0.6, 0.6, 2.0, freqs);
    CHECK(std::abs(val - complexd(1.0, 0.0)) < 1e-15);
}

TEST_CASE("displacement trace matches the truncated-oscillator product trace") {
    const double omega = 0.3, g = 0.3;
    const double beta = 1.0 / omega;  // beta hbar w = 1
    const int levels = 30;

    Eigen::VectorXd energy(levels);
    for (int n = 0; n < levels; ++n) energy[n] = omega * (n + 0.5);
    Eigen::VectorXd rho = (-beta * (energy.array() - energy.minCoeff())).exp();
    rho /= rho.sum();

    const Eigen::VectorXd grow = Eigen::VectorXd::Constant(1, g);
    const Eigen::VectorXd freqs = Eigen::VectorXd::Constant(1, omega);
    for (double t : {0.8, 3.5, 9.0}) {
        // (x, x', y, y') = (t, 0, 0, 0): the product collapses to e^{-S(t)} e^{S(0)}
        const Eigen::MatrixXcd product =
            exp_antihermitian(-displacement_generator(g, omega, t, levels)) *
            exp_antihermitian(displacement_generator(g, omega, 0.0, levels));
        complexd oracle(0.0, 0.0);
        for (int n = 0; n < levels; ++n) oracle += product(n, n) * rho[n];

        const complexd closed =
            displacement_trace(grow, grow, t, 0.0, 0.0, 0.0, beta, freqs);
        CHECK(std::abs(closed - oracle) < 1e-8);
    }
}

TEST_CASE("chi at the time origin equals the channel dipole-product sum") {
    const Dimer d = make_dimer(0.4, 3);
    for (int k = 1; k <= 4; ++k) {
        const complexd chi = chi_closed(k, 0.0, 0.0, 0.0, d.energies, d.bath, d.dipoles);
        CHECK(std::abs(chi - dipole_product_sum(k, d.dipoles)) < 1e-12);
    }
}

TEST_CASE("bare-exciton limit: pure phases, magnitude constant along Tp") {
    Dimer d = make_dimer(0.0, 4);
    // channels 1 and 4 carry no Tp phase at all once the coupling vanishes
    for (int k : {1, 4}) {
        const complexd at0 = chi_closed(k, 2.0, 0.0, 3.0, d.energies, d.bath, d.dipoles);
        const complexd at1 = chi_closed(k, 2.0, 40.0, 3.0, d.energies, d.bath, d.dipoles);
        CHECK(std::abs(at0 - at1) < 1e-12);
    }
    // channel 1 explicit bare form
    complexd direct(0.0, 0.0);
    for (int j = 0; j < 2; ++j)
        for (int jp = 0; jp < 2; ++jp)
            direct += d.dipoles.d2[j] * d.dipoles.d1[j] * d.dipoles.d3[jp] *
                      d.dipoles.dm[jp] *
                      std::exp(complexd(0.0, d.energies[jp] * 2.0 - d.energies[j] * 3.0));
    CHECK(std::abs(chi_closed(1, 2.0, 7.0, 3.0, d.energies, d.bath, d.dipoles) - direct) <
          1e-12);
}

TEST_CASE("single exciton with one mode matches the Fock oracle on a grid") {
    Eigen::VectorXd energies = Eigen::VectorXd::Constant(1, 0.05);
    BathSpec bath;
    bath.mode_freqs = Eigen::VectorXd::Constant(1, 0.25);
    bath.diagonal_couplings = Eigen::MatrixXd::Constant(1, 1, 0.3);
    bath.beta = 2.0 / 0.25;  // beta hbar w = 2
    DipoleProjection dip;
    dip.d1 = dip.d2 = dip.d3 = dip.dm = Eigen::VectorXd::Constant(1, 1.0);

    OracleSpec spec;
    spec.fock_cutoff = 25;
    spec.dim_cap = 64;
    const FockOracle oracle(energies, diagonal_to_channels(bath), bath.mode_freqs,
                            bath.beta, dip, spec);

    GridSpec grid;
    grid.dt = 1.4;
    grid.n_tau = 32;
    grid.n_tau_prime = 32;
    grid.tp_steps.resize(32);
    for (int i = 0; i < 32; ++i) grid.tp_steps[static_cast<std::size_t>(i)] = i;

    const ResponseGrid fock = oracle.chi_grid(1, grid);
    const ResponseGrid closed =
        evaluate_closed_grid(1, grid, energies, bath, dip, std::size_t(1) << 30, 2);
    CHECK(testutil::max_abs_diff(fock.values, closed.values) < 1e-7);
}

TEST_CASE("all four channels match the Fock oracle for a coupled dimer") {
    const Dimer d = make_dimer(0.22, 9);
    BathSpec bath = d.bath;
    bath.mode_freqs = Eigen::VectorXd::Constant(1, 0.2);
    bath.diagonal_couplings = d.bath.diagonal_couplings.col(0);
    bath.beta = 1.0 / 0.2;

    OracleSpec spec;
    spec.fock_cutoff = 12;
    spec.dim_cap = 64;
    const FockOracle oracle(d.energies, diagonal_to_channels(bath), bath.mode_freqs,
                            bath.beta, d.dipoles, spec);

    GridSpec grid;
    grid.dt = 2.0;
    grid.n_tau = 6;
    grid.n_tau_prime = 6;
    grid.tp_steps = {0, 3};

    for (int k = 1; k <= 4; ++k) {
        const ResponseGrid fock = oracle.chi_grid(k, grid);
        const ResponseGrid closed =
            evaluate_closed_grid(k, grid, d.energies, bath, d.dipoles);
        CHECK(testutil::max_abs_diff(fock.values, closed.values) < 1e-6);
    }
}

TEST_CASE("grid evaluation is a pointwise map of chi_closed") {
    const Dimer d = make_dimer(0.35, 5);
    GridSpec grid;
    grid.dt = 1.0;
    grid.n_tau = 1;
    grid.n_tau_prime = 1;
    grid.tp_steps = {0};
    const ResponseGrid single =
        evaluate_closed_grid(1, grid, d.energies, d.bath, d.dipoles);
    CHECK(single.values[0] == chi_closed(1, 0.0, 0.0, 0.0, d.energies, d.bath, d.dipoles));

    GridSpec g4;
    g4.dt = 1.7;
    g4.n_tau = 4;
    g4.n_tau_prime = 4;
    g4.tp_steps = {0, 2, 5, 9};
    for (int k = 1; k <= 4; ++k) {
        const ResponseGrid grid_vals = evaluate_closed_grid(
            k, g4, d.energies, d.bath, d.dipoles, std::size_t(1) << 30, 3);
        for (int i = 0; i < 4; ++i)
            for (std::size_t t = 0; t < 4; ++t)
                for (int p = 0; p < 4; ++p)
                    CHECK(grid_vals.at(i, t, p) ==
                          chi_closed(k, i * g4.dt, g4.tp_steps[t] * g4.dt, p * g4.dt,
                                     d.energies, d.bath, d.dipoles));
    }
}

TEST_CASE("splitting a mode into half-weight copies preserves the response") {
    const Dimer d = make_dimer(0.4, 6);
    BathSpec split;
    split.beta = d.bath.beta;
    split.mode_freqs.resize(4);
    split.mode_freqs << d.bath.mode_freqs[0], d.bath.mode_freqs[0], d.bath.mode_freqs[1],
        d.bath.mode_freqs[1];
    split.diagonal_couplings.resize(2, 4);
    const double s = 1.0 / std::sqrt(2.0);
    for (int j = 0; j < 2; ++j) {
        split.diagonal_couplings(j, 0) = s * d.bath.diagonal_couplings(j, 0);
        split.diagonal_couplings(j, 1) = s * d.bath.diagonal_couplings(j, 0);
        split.diagonal_couplings(j, 2) = s * d.bath.diagonal_couplings(j, 1);
        split.diagonal_couplings(j, 3) = s * d.bath.diagonal_couplings(j, 1);
    }
    for (int k = 1; k <= 4; ++k) {
        const complexd orig = chi_closed(k, 3.0, 5.0, 2.0, d.energies, d.bath, d.dipoles);
        const complexd copy = chi_closed(k, 3.0, 5.0, 2.0, d.energies, split, d.dipoles);
        CHECK(std::abs(orig - copy) < 1e-12);
    }
}

TEST_CASE("uniform dipole rescale scales every channel by s^4") {
    const Dimer d = make_dimer(0.3, 7);
    DipoleProjection scaled = d.dipoles;
    const double s = 2.0;
    scaled.d1 *= s;
    scaled.d2 *= s;
    scaled.d3 *= s;
    scaled.dm *= s;
    for (int k = 1; k <= 4; ++k) {
        const complexd base = chi_closed(k, 2.0, 4.0, 1.0, d.energies, d.bath, d.dipoles);
        const complexd big = chi_closed(k, 2.0, 4.0, 1.0, d.energies, d.bath, scaled);
        CHECK(std::abs(big - base * 16.0) < 1e-12 * std::abs(base) * 16.0 + 1e-15);
    }
}

TEST_CASE("grid evaluation guards the memory cap and channel index") {
    const Dimer d = make_dimer(0.3, 8);
    GridSpec grid;
    grid.dt = 1.0;
    grid.n_tau = 64;
    grid.n_tau_prime = 64;
    grid.tp_steps = {0, 1};
    CHECK_THROWS_AS(evaluate_closed_grid(1, grid, d.energies, d.bath, d.dipoles, 1024),
                    resource_error);
    CHECK_THROWS_AS(chi_closed(5, 0, 0, 0, d.energies, d.bath, d.dipoles),
                    validation_error);
    CHECK_THROWS_AS(chi_closed(0, 0, 0, 0, d.energies, d.bath, d.dipoles),
                    validation_error);
}
