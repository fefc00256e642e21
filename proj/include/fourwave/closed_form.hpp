// closed_form.hpp — exact response functions for harmonic baths diagonally
// coupled in the exciton basis
//
// chi^(k)(tau, Tp, tau') is a double sum over exciton pairs (j, j') of a
// dipole product, a polaron-shifted phase, and a thermal trace over a product
// of four displacement operators
//   Tr_b{ e^{-S(x)} e^{S(x')} e^{-S(y)} e^{S(y')} rho_b }.
// The trace factorizes per mode into two single-index lineshape factors and
// two cross factors over the pairwise time differences; each channel has its
// own (x, x', y, y') pattern in the three delay variables.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <vector>

#include "fourwave/bath.hpp"
#include "fourwave/errors.hpp"
#include "fourwave/exciton.hpp"
#include "fourwave/parallel.hpp"
#include "fourwave/response_grid.hpp"
#include "fourwave/units.hpp"

namespace fourwave {

// polaron-shifted exciton energies: E~_j = E_j - sum_n g_{j,n}^2 w_n
inline Eigen::VectorXd polaron_shifted_energies(const Eigen::VectorXd& exciton_energies,
                                                const BathSpec& bath) {
    if (bath.diagonal_couplings.rows() != exciton_energies.size())
        throw validation_error("polaron_shifted_energies: coupling rows must match excitons");
    return exciton_energies -
           (bath.diagonal_couplings.array().square().matrix() * bath.mode_freqs);
}

namespace detail {

// compensated accumulator for long exponent sums
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double v) {
        const double y = v - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

} // namespace detail

// Thermal trace of the four-displacement product.  g_first couples to the
// (x, x') pair and g_second to (y, y'); the imaginary cross factor is not
// symmetric under swapping the pairs, so argument order matters.
inline complexd displacement_trace(const Eigen::VectorXd& g_first,
                                   const Eigen::VectorXd& g_second, double x,
                                   double x_prime, double y, double y_prime,
                                   double beta, const Eigen::VectorXd& mode_freqs) {
    const Eigen::Index nm = mode_freqs.size();
    if (g_first.size() != nm || g_second.size() != nm)
        throw validation_error("displacement_trace: coupling rows must match mode count");
    if (beta <= 0.0) throw validation_error("displacement_trace: beta must be positive");

    detail::KahanSum re, im;
    for (Eigen::Index n = 0; n < nm; ++n) {
        const double w = mode_freqs[n];
        const double g1 = g_first[n];
        const double g2 = g_second[n];
        if (g1 == 0.0 && g2 == 0.0) continue;
        const double co = units::coth_clamped(0.5 * beta * w);

        const double dxx = w * (x - x_prime);
        const double dyy = w * (y - y_prime);
        re.add(-g1 * g1 * co * (1.0 - std::cos(dxx)));
        im.add(-g1 * g1 * std::sin(dxx));
        re.add(-g2 * g2 * co * (1.0 - std::cos(dyy)));
        im.add(-g2 * g2 * std::sin(dyy));

        const double gg = g1 * g2;
        if (gg != 0.0) {
            const double dxy = w * (x - y);
            const double dxpy = w * (x_prime - y);
            const double dxyp = w * (x - y_prime);
            const double dxpyp = w * (x_prime - y_prime);
            re.add(-gg * co *
                   (std::cos(dxy) - std::cos(dxpy) - std::cos(dxyp) + std::cos(dxpyp)));
            im.add(gg * (std::sin(dxy) - std::sin(dxpy) - std::sin(dxyp) + std::sin(dxpyp)));
        }
    }
    return std::exp(complexd(re.sum, im.sum));
}

namespace detail {

// Coefficients of (tau, Tp, tau') for one linear time combination.
struct TimeCombo {
    double tau, tp, tpr;
    double operator()(double t, double p, double q) const {
        return tau * t + tp * p + tpr * q;
    }
};

struct ChannelPattern {
    // dipole product: conj(d[a])_j d[b]_j conj(d[c])_j' d[d]_j'
    int a, b, c, d;
    // phase = exp(i (E~_j' * phase_jp - E~_j * phase_j))
    TimeCombo phase_j, phase_jp;
    // displacement arguments; first pair carries row j' except on channel 4,
    // where the j operators come first
    TimeCombo x, xp, y, yp;
    bool j_first;
};

inline const ChannelPattern& channel_pattern(int k) {
    static const ChannelPattern table[4] = {
        // k = 1: d2* d1 d3* d4, phase E~_j' tau - E~_j tau'
        {2, 1, 3, 4, {0, 0, 1}, {1, 0, 0},
         {0, 1, 1}, {1, 1, 1}, {0, 0, 1}, {0, 0, 0}, false},
        // k = 2: d3* d1 d2* d4, phase E~_j'(tau+Tp) - E~_j(Tp+tau')
        {3, 1, 2, 4, {0, 1, 1}, {1, 1, 0},
         {0, 0, 1}, {1, 1, 1}, {0, 1, 1}, {0, 0, 0}, false},
        // k = 3: d3* d2 d1* d4, phase E~_j'(tau+Tp+tau') - E~_j Tp
        {3, 2, 1, 4, {0, 1, 0}, {1, 1, 1},
         {0, 0, 0}, {1, 1, 1}, {0, 1, 1}, {0, 0, 1}, false},
        // k = 4: d1* d2 d3* d4, phase E~_j tau' + E~_j' tau
        {1, 2, 3, 4, {0, 0, -1}, {1, 0, 0},
         {0, 0, 0}, {0, 0, 1}, {0, 1, 1}, {1, 1, 1}, true},
    };
    if (k < 1 || k > 4) throw validation_error("chi_closed: channel must be 1..4");
    return table[k - 1];
}

} // namespace detail

// One point of the closed-form chi^(k).
inline complexd chi_closed(int k, double tau, double tp, double tau_prime,
                           const Eigen::VectorXd& exciton_energies, const BathSpec& bath,
                           const DipoleProjection& dipoles) {
    const auto& pat = detail::channel_pattern(k);
    bath.validate();
    const Eigen::Index n = exciton_energies.size();
    if (bath.diagonal_couplings.rows() != n)
        throw validation_error("chi_closed: diagonal couplings must match exciton count");

    const Eigen::VectorXd shifted = polaron_shifted_energies(exciton_energies, bath);
    const Eigen::MatrixXd rows = bath.diagonal_couplings.transpose(); // columns are g rows
    const Eigen::VectorXd& da = dipoles.component(pat.a);
    const Eigen::VectorXd& db = dipoles.component(pat.b);
    const Eigen::VectorXd& dc = dipoles.component(pat.c);
    const Eigen::VectorXd& dd = dipoles.component(pat.d);
    if (da.size() != n) throw validation_error("chi_closed: dipole length mismatch");

    const double x = pat.x(tau, tp, tau_prime);
    const double xp = pat.xp(tau, tp, tau_prime);
    const double y = pat.y(tau, tp, tau_prime);
    const double yp = pat.yp(tau, tp, tau_prime);
    const double arg_j = pat.phase_j(tau, tp, tau_prime);
    const double arg_jp = pat.phase_jp(tau, tp, tau_prime);

    complexd total(0.0, 0.0);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double pre_j = da[j] * db[j];
        if (pre_j == 0.0) continue;
        for (Eigen::Index jp = 0; jp < n; ++jp) {
            const double pre = pre_j * dc[jp] * dd[jp];
            if (pre == 0.0) continue;
            const complexd phase =
                std::exp(complexd(0.0, shifted[jp] * arg_jp - shifted[j] * arg_j));
            const Eigen::VectorXd& g_first = pat.j_first ? rows.col(j) : rows.col(jp);
            const Eigen::VectorXd& g_second = pat.j_first ? rows.col(jp) : rows.col(j);
            total += pre * phase *
                     displacement_trace(g_first, g_second, x, xp, y, yp, bath.beta,
                                        bath.mode_freqs);
        }
    }
    return total;
}

// Dense closed-form evaluation over a grid.  Grid points are independent and
// write disjoint slots, so results do not depend on the thread count.
inline ResponseGrid evaluate_closed_grid(int channel, const GridSpec& grid,
                                         const Eigen::VectorXd& exciton_energies,
                                         const BathSpec& bath,
                                         const DipoleProjection& dipoles,
                                         std::size_t memory_cap_bytes = (1u << 30),
                                         int n_threads = 1) {
    grid.validate();
    detail::channel_pattern(channel);
    const std::size_t bytes = grid.n_points() * sizeof(complexd);
    if (bytes > memory_cap_bytes)
        throw resource_error("evaluate_closed_grid: grid needs " + std::to_string(bytes) +
                             " bytes, cap is " + std::to_string(memory_cap_bytes));

    ResponseGrid out(grid, channel, "closed");
    const std::size_t per_tau =
        grid.tp_steps.size() * static_cast<std::size_t>(grid.n_tau_prime);
    parallel_for(out.values.size(), n_threads, [&](std::size_t idx) {
        const int i_tau = static_cast<int>(idx / per_tau);
        const std::size_t rem = idx % per_tau;
        const std::size_t i_tp = rem / grid.n_tau_prime;
        const int i_tpr = static_cast<int>(rem % grid.n_tau_prime);
        out.values[idx] =
            chi_closed(channel, i_tau * grid.dt, grid.tp_steps[i_tp] * grid.dt,
                       i_tpr * grid.dt, exciton_energies, bath, dipoles);
    });
    return out;
}

} // namespace fourwave
