// bath.hpp — discrete harmonic baths, coupling channels, and two-time
// bath correlation functions
//
// Linear coupling H_eb = sum_a A_a (x) B_a with B_a = sum_n hbar w_n c_{a,n}
// (b_n + b_n^+).  All second-order kernels close in terms of
//   C_ab(t) = sum_n w_n^2 c_{a,n} c_{b,n} [coth(beta w_n / 2) cos(w_n t)
//             - i sin(w_n t)]
// normalized so the master-equation kernels use C directly (hbar = 1).

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "fourwave/errors.hpp"
#include "fourwave/units.hpp"

namespace fourwave {

using complexd = std::complex<double>;

// Discrete harmonic modes with per-exciton diagonal couplings g_{j,n}.
struct BathSpec {
    Eigen::VectorXd mode_freqs;          // w_n > 0, rad/fs
    Eigen::MatrixXd diagonal_couplings;  // g_{j,n}, n_excitons x n_modes
    double beta = 1.0;                   // inverse energy, internal units

    Eigen::Index n_modes() const { return mode_freqs.size(); }

    void validate() const {
        if (beta <= 0.0) throw validation_error("BathSpec: beta must be positive");
        if ((mode_freqs.array() <= 0.0).any())
            throw validation_error("BathSpec: mode frequencies must be positive");
        if (!diagonal_couplings.allFinite())
            throw validation_error("BathSpec: couplings must be finite");
        if (diagonal_couplings.size() > 0 && diagonal_couplings.cols() != n_modes())
            throw validation_error("BathSpec: coupling columns must match mode count");
    }
};

// One system-bath coupling channel: Hermitian system operator in the exciton
// basis and dimensionless per-mode weights.
struct CouplingChannel {
    Eigen::MatrixXcd system_op;    // A_a
    Eigen::VectorXd mode_weights;  // c_{a,n}

    void validate(Eigen::Index n_modes) const {
        if (system_op.rows() != system_op.cols())
            throw validation_error("CouplingChannel: system operator must be square");
        if ((system_op - system_op.adjoint()).cwiseAbs().maxCoeff() >
            1e-12 * std::max(1.0, system_op.cwiseAbs().maxCoeff()))
            throw validation_error("CouplingChannel: system operator must be Hermitian");
        if (mode_weights.size() != n_modes)
            throw validation_error("CouplingChannel: weight count must match mode count");
    }
};

// C_ab(t) for every channel pair at one time.
inline Eigen::MatrixXcd correlation(const std::vector<CouplingChannel>& channels,
                                    const Eigen::VectorXd& mode_freqs, double beta,
                                    double t) {
    if (beta <= 0.0) throw validation_error("correlation: beta must be positive");
    if (channels.empty()) throw validation_error("correlation: need at least one channel");
    if (!std::isfinite(t)) throw validation_error("correlation: time must be finite");
    const auto nch = static_cast<Eigen::Index>(channels.size());
    const Eigen::Index nm = mode_freqs.size();
    for (const auto& ch : channels) ch.validate(nm);

    Eigen::VectorXd wc(nm), ws(nm);
    for (Eigen::Index n = 0; n < nm; ++n) {
        const double w = mode_freqs[n];
        wc[n] = w * w * units::coth_clamped(0.5 * beta * w) * std::cos(w * t);
        ws[n] = w * w * std::sin(w * t);
    }
    Eigen::MatrixXcd c(nch, nch);
    for (Eigen::Index a = 0; a < nch; ++a)
        for (Eigen::Index b = 0; b < nch; ++b) {
            const Eigen::ArrayXd gg =
                channels[a].mode_weights.array() * channels[b].mode_weights.array();
            c(a, b) = complexd((gg * wc.array()).sum(), -(gg * ws.array()).sum());
        }
    return c;
}

// Correlation functions tabulated on a uniform grid, immutable after build.
// Negative times use C_ab(-t) = C_ba(t)^*; off-grid values by cubic
// (Catmull-Rom) interpolation.
class CorrelationTable {
public:
    CorrelationTable() = default;

    CorrelationTable(const std::vector<CouplingChannel>& channels,
                     const Eigen::VectorXd& mode_freqs, double beta, double dt,
                     int n_steps)
        : dt_(dt), nch_(static_cast<Eigen::Index>(channels.size())) {
        if (dt <= 0.0) throw validation_error("CorrelationTable: dt must be positive");
        if (n_steps < 1) throw validation_error("CorrelationTable: need at least one step");
        samples_.reserve(static_cast<std::size_t>(n_steps) + 1);
        for (int m = 0; m <= n_steps; ++m)
            samples_.push_back(correlation(channels, mode_freqs, beta, m * dt));
    }

    double dt() const { return dt_; }
    int max_step() const { return static_cast<int>(samples_.size()) - 1; }
    Eigen::Index n_channels() const { return nch_; }

    // exact grid lookup, signed step index
    complexd at_step(Eigen::Index a, Eigen::Index b, int m) const {
        if (m < 0) return std::conj(at_step(b, a, -m));
        if (m >= static_cast<int>(samples_.size()))
            throw validation_error("CorrelationTable: step " + std::to_string(m) +
                                   " outside tabulated range");
        return samples_[static_cast<std::size_t>(m)](a, b);
    }

    // off-grid evaluation by cubic interpolation of the tabulated samples
    complexd at_time(Eigen::Index a, Eigen::Index b, double t) const {
        if (t < 0.0) return std::conj(at_time(b, a, -t));
        const double x = t / dt_;
        const int m1 = static_cast<int>(std::floor(x));
        const double u = x - m1;
        const int last = max_step();
        if (m1 > last || (m1 == last && u > 1e-9))
            throw validation_error("CorrelationTable: time outside tabulated range");
        if (u < 1e-12) return samples_[static_cast<std::size_t>(m1)](a, b);
        auto sample = [&](int m) { return at_step(a, b, std::min(m, last)); };
        const complexd p0 = sample(m1 - 1), p1 = sample(m1), p2 = sample(m1 + 1),
                       p3 = sample(m1 + 2);
        // Catmull-Rom in the sample index
        return 0.5 * ((2.0 * p1) + (-p0 + p2) * u + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * u * u +
                      (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * u * u * u);
    }

private:
    double dt_ = 0.0;
    Eigen::Index nch_ = 0;
    std::vector<Eigen::MatrixXcd> samples_;
};

enum class SpectralDensityKind { drude_lorentz, ohmic_exp };

// One equal-reorganization-energy mode per quantile of J(w)/w: mode k sits at
// the midpoint quantile F^-1((k - 1/2)/n) of the normalized weight
// F(w) = (1/lambda) int_0^w J(w')/w' dw', and carries g_k^2 w_k = lambda / n.
// Closed-form quantiles for both supported families.
inline BathSpec discretize_spectral_density(SpectralDensityKind kind, double lambda,
                                            double width, int n_modes) {
    if (n_modes < 1)
        throw validation_error("discretize_spectral_density: need at least one mode");
    if (lambda <= 0.0 || width <= 0.0)
        throw validation_error("discretize_spectral_density: parameters must be positive");

    BathSpec bath;
    bath.mode_freqs.resize(n_modes);
    bath.diagonal_couplings.resize(1, n_modes);
    const double lam_per_mode = lambda / n_modes;
    for (int k = 0; k < n_modes; ++k) {
        const double p = (k + 0.5) / n_modes;
        double w = 0.0;
        switch (kind) {
            case SpectralDensityKind::drude_lorentz:
                // J(w) = 2 lambda width w / (w^2 + width^2); F(w) = (2/pi) atan(w/width)
                w = width * std::tan(0.25 * units::two_pi * p);
                break;
            case SpectralDensityKind::ohmic_exp:
                // J(w) = (pi lambda / width) w exp(-w/width); F(w) = 1 - exp(-w/width)
                w = -width * std::log1p(-p);
                break;
        }
        bath.mode_freqs[k] = w;
        bath.diagonal_couplings(0, k) = std::sqrt(lam_per_mode / w);
    }
    return bath;
}

inline SpectralDensityKind spectral_density_from_name(const std::string& name) {
    if (name == "drude-lorentz") return SpectralDensityKind::drude_lorentz;
    if (name == "ohmic-exp") return SpectralDensityKind::ohmic_exp;
    throw validation_error("unsupported spectral density model: " + name);
}

// Diagonal exciton-bath coupling as channels: one projector |phi_j><phi_j|
// per exciton with weights g_{j,.}.
inline std::vector<CouplingChannel> diagonal_to_channels(const BathSpec& bath) {
    bath.validate();
    if (bath.diagonal_couplings.size() == 0)
        throw validation_error("diagonal_to_channels: no diagonal couplings present");
    const Eigen::Index n = bath.diagonal_couplings.rows();
    std::vector<CouplingChannel> channels;
    channels.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) {
        CouplingChannel ch;
        ch.system_op = Eigen::MatrixXcd::Zero(n, n);
        ch.system_op(j, j) = 1.0;
        ch.mode_weights = bath.diagonal_couplings.row(j);
        channels.push_back(std::move(ch));
    }
    return channels;
}

} // namespace fourwave
