// signal.hpp — phase-matched signal assembly, finite-pulse integration,
// 2D Fourier transforms, and static-disorder averaging
//
// Channel grouping: rephasing = chi1 + chi2 (the -k1+k2+k3 direction),
// nonrephasing = chi3 + chi4 (+k1-k2+k3).  Both operations here work in the
// rotating frame of the detected signal: the detection-time carrier
// e^{i(w3 +- w2 -+ w1)(t_m - tau)} is dropped, while the printed phase
// factors in (Tp, tau') and the (E_e - E_g) phases are applied literally.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "fourwave/errors.hpp"
#include "fourwave/fft.hpp"
#include "fourwave/parallel.hpp"
#include "fourwave/random.hpp"
#include "fourwave/response_grid.hpp"
#include "fourwave/units.hpp"

namespace fourwave {

struct PulseEnvelope {
    enum class Kind { impulsive, gaussian };
    Kind kind = Kind::impulsive;
    double fwhm = 0.0;  // fs, gaussian only

    // unit-area amplitude
    double operator()(double t) const {
        if (kind == Kind::impulsive)
            throw state_error("PulseEnvelope: impulsive envelopes have no amplitude");
        const double a = 4.0 * std::log(2.0) / (fwhm * fwhm);
        return std::sqrt(a / (0.5 * units::two_pi)) * std::exp(-a * t * t);
    }
};

struct PulseSetup {
    double omega1 = 0.0, omega2 = 0.0, omega3 = 0.0;  // carriers, rad/fs
    PulseEnvelope env1, env2, env3;
    double t1 = 0.0, t2 = 0.0, t3 = 0.0;  // pulse centers, fs

    void validate() const {
        if (!(t1 <= t2 && t2 <= t3))
            throw validation_error("PulseSetup: pulse centers must be ordered t1 <= t2 <= t3");
        for (const auto* e : {&env1, &env2, &env3})
            if (e->kind == PulseEnvelope::Kind::gaussian && e->fwhm <= 0.0)
                throw validation_error("PulseSetup: gaussian fwhm must be positive");
    }
};

// rephasing / nonrephasing time-domain signals on a shared grid
struct SignalGrids {
    GridSpec grid;
    std::vector<complexd> rephasing;
    std::vector<complexd> nonrephasing;

    std::size_t index(int i_tau, std::size_t i_tp, int i_tpr) const {
        return (static_cast<std::size_t>(i_tau) * grid.tp_steps.size() + i_tp) *
                   static_cast<std::size_t>(grid.n_tau_prime) +
               static_cast<std::size_t>(i_tpr);
    }
};

namespace detail {

inline void require_shared_axes(const ResponseGrid& a, const ResponseGrid& b) {
    if (a.grid.dt != b.grid.dt || a.grid.n_tau != b.grid.n_tau ||
        a.grid.n_tau_prime != b.grid.n_tau_prime || a.grid.tp_steps != b.grid.tp_steps)
        throw validation_error("signal assembly: response grids must share axes");
}

} // namespace detail

// Impulsive-limit signals: multiply the channel sums by the carrier and
// reference-energy phase factors.  e_eg = (E_e - E_g) / hbar in rad/fs.
inline SignalGrids impulsive_signal(const ResponseGrid& chi1, const ResponseGrid& chi2,
                                    const ResponseGrid& chi3, const ResponseGrid& chi4,
                                    double e_eg, double omega1, double omega2) {
    detail::require_shared_axes(chi1, chi2);
    detail::require_shared_axes(chi1, chi3);
    detail::require_shared_axes(chi1, chi4);

    SignalGrids out;
    out.grid = chi1.grid;
    out.rephasing.resize(chi1.values.size());
    out.nonrephasing.resize(chi1.values.size());
    const double d21 = omega2 - omega1;

    for (int i_tau = 0; i_tau < out.grid.n_tau; ++i_tau) {
        const double tau = i_tau * out.grid.dt;
        for (std::size_t i_tp = 0; i_tp < out.grid.tp_steps.size(); ++i_tp) {
            const double tp = out.grid.tp_steps[i_tp] * out.grid.dt;
            for (int ip = 0; ip < out.grid.n_tau_prime; ++ip) {
                const double tpr = ip * out.grid.dt;
                const std::size_t idx = out.index(i_tau, i_tp, ip);
                const complexd ph_r =
                    std::exp(complexd(0.0, -d21 * tp + omega1 * tpr + e_eg * (tau - tpr)));
                const complexd ph_nr =
                    std::exp(complexd(0.0, d21 * tp - omega1 * tpr + e_eg * (tau + tpr)));
                out.rephasing[idx] = ph_r * (chi1.values[idx] + chi2.values[idx]);
                out.nonrephasing[idx] = ph_nr * (chi3.values[idx] + chi4.values[idx]);
            }
        }
    }
    return out;
}

namespace detail {

struct AxisQuadrature {
    std::vector<int> indices;
    std::vector<double> weights;  // includes the axis step for integrated axes
};

// impulsive pulses pin their delay variable; gaussian pulses integrate over
// the whole axis with trapezoid weights
inline AxisQuadrature axis_quadrature(bool impulsive, double pinned_value, double dt,
                                      int n_points, const std::string& axis_name,
                                      const std::vector<int>* tp_steps = nullptr) {
    AxisQuadrature q;
    auto value_at = [&](int i) { return tp_steps ? (*tp_steps)[i] * dt : i * dt; };
    if (impulsive) {
        for (int i = 0; i < n_points; ++i)
            if (std::abs(value_at(i) - pinned_value) < 1e-9 * std::max(dt, 1.0)) {
                q.indices = {i};
                q.weights = {1.0};
                return q;
            }
        throw validation_error("assemble_polarization: impulsive delay " +
                               std::to_string(pinned_value) + " fs not on the " + axis_name +
                               " axis");
    }
    if (n_points < 2)
        throw validation_error("assemble_polarization: " + axis_name +
                               " axis too short for envelope quadrature");
    double step = value_at(1) - value_at(0);
    for (int i = 0; i < n_points; ++i) {
        if (i + 1 < n_points &&
            std::abs((value_at(i + 1) - value_at(i)) - step) > 1e-9 * std::max(step, 1.0))
            throw validation_error("assemble_polarization: " + axis_name +
                                   " axis must be uniform for envelope quadrature");
        q.indices.push_back(i);
        q.weights.push_back(step * ((i == 0 || i == n_points - 1) ? 0.5 : 1.0));
    }
    return q;
}

inline void require_support(double center, double fwhm, double lo, double hi,
                            const std::string& axis_name) {
    const double pad = 2.5 * fwhm;
    if (center - pad < lo - 1e-9 || center + pad > hi + 1e-9)
        throw validation_error("assemble_polarization: envelope support [" +
                               std::to_string(center - pad) + ", " +
                               std::to_string(center + pad) + "] fs exceeds the " + axis_name +
                               " axis");
}

} // namespace detail

// Detected third-order polarization component at time t_m: triple quadrature
// of envelope products, phase factors, and the four response functions.
inline double assemble_polarization(const ResponseGrid& chi1, const ResponseGrid& chi2,
                                    const ResponseGrid& chi3, const ResponseGrid& chi4,
                                    const PulseSetup& pulses, double e_eg, double t_m) {
    detail::require_shared_axes(chi1, chi2);
    detail::require_shared_axes(chi1, chi3);
    detail::require_shared_axes(chi1, chi4);
    pulses.validate();
    const GridSpec& grid = chi1.grid;

    const bool imp3 = pulses.env3.kind == PulseEnvelope::Kind::impulsive;
    const bool imp2 = pulses.env2.kind == PulseEnvelope::Kind::impulsive;
    const bool imp1 = pulses.env1.kind == PulseEnvelope::Kind::impulsive;

    // impulsive-limit delay centers
    const double tau_c = t_m - pulses.t3;
    const double tp_c = pulses.t3 - pulses.t2;
    const double tpr_c = pulses.t2 - pulses.t1;
    if (tau_c < -1e-9)
        throw validation_error("assemble_polarization: detection time before the third pulse");

    if (!imp3)
        detail::require_support(tau_c, pulses.env3.fwhm, 0.0, (grid.n_tau - 1) * grid.dt,
                                "tau");
    if (!imp2)
        detail::require_support(tp_c, pulses.env2.fwhm, grid.tp_steps.front() * grid.dt,
                                grid.tp_steps.back() * grid.dt, "Tp");
    if (!imp1)
        detail::require_support(tpr_c, pulses.env1.fwhm, 0.0,
                                (grid.n_tau_prime - 1) * grid.dt, "tau_prime");

    const auto q_tau =
        detail::axis_quadrature(imp3, tau_c, grid.dt, grid.n_tau, "tau");
    const auto q_tp =
        detail::axis_quadrature(imp2, tp_c, grid.dt, static_cast<int>(grid.tp_steps.size()),
                                "Tp", &grid.tp_steps);
    const auto q_tpr =
        detail::axis_quadrature(imp1, tpr_c, grid.dt, grid.n_tau_prime, "tau_prime");

    const double d21 = pulses.omega2 - pulses.omega1;
    complexd total(0.0, 0.0);
    for (std::size_t a = 0; a < q_tau.indices.size(); ++a) {
        const int i_tau = q_tau.indices[a];
        const double tau = i_tau * grid.dt;
        const double e3 = imp3 ? 1.0 : pulses.env3(t_m - tau - pulses.t3);
        for (std::size_t b = 0; b < q_tp.indices.size(); ++b) {
            const int i_tp = q_tp.indices[b];
            const double tp = grid.tp_steps[static_cast<std::size_t>(i_tp)] * grid.dt;
            const double e2 = imp2 ? 1.0 : pulses.env2(t_m - tau - tp - pulses.t2);
            for (std::size_t c = 0; c < q_tpr.indices.size(); ++c) {
                const int ip = q_tpr.indices[c];
                const double tpr = ip * grid.dt;
                const double e1 =
                    imp1 ? 1.0 : pulses.env1(t_m - tau - tp - tpr - pulses.t1);
                const double w =
                    q_tau.weights[a] * q_tp.weights[b] * q_tpr.weights[c] * e1 * e2 * e3;
                if (w == 0.0) continue;
                const std::size_t idx =
                    chi1.index(i_tau, static_cast<std::size_t>(i_tp), ip);
                const complexd ph_r = std::exp(
                    complexd(0.0, -d21 * tp + pulses.omega1 * tpr + e_eg * (tau - tpr)));
                const complexd ph_nr = std::exp(
                    complexd(0.0, d21 * tp - pulses.omega1 * tpr + e_eg * (tau + tpr)));
                total += w * (ph_r * (chi1.values[idx] + chi2.values[idx]) +
                              ph_nr * (chi3.values[idx] + chi4.values[idx]));
            }
        }
    }
    return 2.0 * total.imag();
}

enum class SpectrumChannel { rephasing, nonrephasing };

// 2D frequency-domain signal at one population time
struct Spectrum2D {
    Eigen::VectorXd omega_tau;        // detection axis, rad/fs
    Eigen::VectorXd omega_tau_prime;  // excitation axis, rad/fs (carrier offset added)
    Eigen::MatrixXcd values;          // (omega_tau, omega_tau_prime)
};

struct FourierOptions {
    bool window = true;               // 10% raised-cosine edge taper
    double excitation_offset = 0.0;   // added to the excitation axis labels
};

// 2D transform of one Tp slice.  Detection axis uses e^{-i w tau}; the
// excitation axis uses e^{+i w tau'} for the rephasing channel (sign-flipped
// so echo peaks land in the (+,+) quadrant) and e^{-i w tau'} otherwise.
// Zero-padding x2 on both axes.
inline Spectrum2D fourier_2d(const std::vector<complexd>& values, const GridSpec& grid,
                             std::size_t i_tp, SpectrumChannel channel,
                             const FourierOptions& opts = {}) {
    grid.validate();
    if (i_tp >= grid.tp_steps.size())
        throw validation_error("fourier_2d: Tp index out of range");
    if (values.size() != grid.n_points())
        throw validation_error("fourier_2d: value count does not match grid");

    const int n_tau = grid.n_tau;
    const int n_tpr = grid.n_tau_prime;
    auto taper = [](int i, int n) {
        if (n < 2) return 1.0;
        const double x = static_cast<double>(i) / (n - 1);
        if (x <= 0.9) return 1.0;
        return 0.5 * (1.0 + std::cos(units::two_pi * 0.5 * (x - 0.9) / 0.1));
    };

    Eigen::MatrixXcd slice(n_tau, n_tpr);
    for (int i = 0; i < n_tau; ++i)
        for (int j = 0; j < n_tpr; ++j) {
            const std::size_t idx =
                (static_cast<std::size_t>(i) * grid.tp_steps.size() + i_tp) *
                    static_cast<std::size_t>(n_tpr) +
                static_cast<std::size_t>(j);
            complexd v = values[idx];
            if (opts.window) v *= taper(i, n_tau) * taper(j, n_tpr);
            slice(i, j) = v;
        }

    const std::size_t p_tau = fft::next_pow2(2 * static_cast<std::size_t>(n_tau));
    const std::size_t p_tpr = fft::next_pow2(2 * static_cast<std::size_t>(n_tpr));

    // transform rows (tau' axis), then columns (tau axis)
    Eigen::MatrixXcd stage(n_tau, p_tpr);
    std::vector<complexd> buf;
    for (int i = 0; i < n_tau; ++i) {
        buf.assign(p_tpr, complexd(0.0, 0.0));
        for (int j = 0; j < n_tpr; ++j) buf[static_cast<std::size_t>(j)] = slice(i, j);
        if (channel == SpectrumChannel::rephasing)
            fft::backward_unnormalized(buf);
        else
            fft::forward(buf);
        for (std::size_t j = 0; j < p_tpr; ++j) stage(i, static_cast<Eigen::Index>(j)) = buf[j];
    }
    Eigen::MatrixXcd full(p_tau, p_tpr);
    for (std::size_t j = 0; j < p_tpr; ++j) {
        buf.assign(p_tau, complexd(0.0, 0.0));
        for (int i = 0; i < n_tau; ++i)
            buf[static_cast<std::size_t>(i)] = stage(i, static_cast<Eigen::Index>(j));
        fft::forward(buf);
        for (std::size_t i = 0; i < p_tau; ++i)
            full(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = buf[i];
    }

    // fftshift both axes to ascending frequency
    Spectrum2D out;
    out.values.resize(p_tau, p_tpr);
    out.omega_tau.resize(static_cast<Eigen::Index>(p_tau));
    out.omega_tau_prime.resize(static_cast<Eigen::Index>(p_tpr));
    const auto half_tau = static_cast<Eigen::Index>(p_tau / 2);
    const auto half_tpr = static_cast<Eigen::Index>(p_tpr / 2);
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(p_tau); ++i) {
        const Eigen::Index k = (i + half_tau) % static_cast<Eigen::Index>(p_tau);
        out.omega_tau[i] =
            units::two_pi * static_cast<double>(i - half_tau) / (p_tau * grid.dt);
        for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(p_tpr); ++j) {
            const Eigen::Index l = (j + half_tpr) % static_cast<Eigen::Index>(p_tpr);
            out.values(i, j) = full(k, l);
        }
    }
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(p_tpr); ++j)
        out.omega_tau_prime[j] =
            opts.excitation_offset +
            units::two_pi * static_cast<double>(j - half_tpr) / (p_tpr * grid.dt);
    return out;
}

// Per-site Gaussian static disorder with a seeded, sample-split stream.
struct DisorderModel {
    Eigen::VectorXd sigma;       // per-site std dev, internal units
    int samples = 1;
    std::uint64_t seed = 0;

    void validate() const {
        if (samples < 1) throw validation_error("DisorderModel: need at least one sample");
        if ((sigma.array() < 0.0).any())
            throw validation_error("DisorderModel: sigma must be non-negative");
    }

    Eigen::VectorXd offsets(int sample_index) const {
        SplitMix64 rng(seed, static_cast<std::uint64_t>(sample_index));
        Eigen::VectorXd delta(sigma.size());
        for (Eigen::Index l = 0; l < sigma.size(); ++l) delta[l] = sigma[l] * rng.gaussian();
        return delta;
    }
};

struct DisorderResult {
    std::vector<Spectrum2D> mean;
    std::vector<Eigen::MatrixXd> variance;  // per-pixel sample variance of the complex values
};

// Re-run the full pipeline per disorder sample and average in fixed sample
// order.  The pipeline maps per-site energy offsets to a list of spectra
// (fixed length and shapes across samples).
template <class Pipeline>
DisorderResult disorder_average(const DisorderModel& model, Pipeline&& pipeline,
                                int n_threads = 1) {
    model.validate();
    std::vector<std::vector<Spectrum2D>> per_sample(static_cast<std::size_t>(model.samples));
    parallel_for(per_sample.size(), n_threads, [&](std::size_t s) {
        per_sample[s] = pipeline(model.offsets(static_cast<int>(s)));
    });

    const std::size_t n_slots = per_sample.front().size();
    for (const auto& sample : per_sample)
        if (sample.size() != n_slots)
            throw numeric_error("disorder_average: pipeline output shape varies across samples");

    DisorderResult result;
    result.mean = per_sample.front();
    for (std::size_t slot = 0; slot < n_slots; ++slot) {
        Eigen::MatrixXcd acc = per_sample[0][slot].values;
        for (int s = 1; s < model.samples; ++s) acc += per_sample[static_cast<std::size_t>(s)][slot].values;
        result.mean[slot].values = acc / static_cast<double>(model.samples);
    }
    result.variance.resize(n_slots);
    for (std::size_t slot = 0; slot < n_slots; ++slot) {
        Eigen::MatrixXd var = Eigen::MatrixXd::Zero(result.mean[slot].values.rows(),
                                                    result.mean[slot].values.cols());
        if (model.samples > 1) {
            for (int s = 0; s < model.samples; ++s)
                var += (per_sample[static_cast<std::size_t>(s)][slot].values -
                        result.mean[slot].values)
                           .cwiseAbs2();
            var /= static_cast<double>(model.samples - 1);
        }
        result.variance[slot] = std::move(var);
    }
    return result;
}

} // namespace fourwave
