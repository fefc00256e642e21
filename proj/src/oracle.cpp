#include "fourwave/oracle.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "fourwave/fock.hpp"

namespace fourwave {

namespace {

long long double_bits(double x) {
    long long bits;
    static_assert(sizeof(bits) == sizeof(x));
    std::memcpy(&bits, &x, sizeof(bits));
    return bits;
}

} // namespace

bool FockOracle::BlockKey::operator<(const BlockKey& o) const {
    if (alpha != o.alpha) return alpha < o.alpha;
    if (beta != o.beta) return beta < o.beta;
    if (sign != o.sign) return sign < o.sign;
    return time_bits < o.time_bits;
}

FockOracle::FockOracle(const Eigen::VectorXd& exciton_energies,
                       const std::vector<CouplingChannel>& channels,
                       const Eigen::VectorXd& mode_freqs, double beta,
                       const DipoleProjection& dipoles, const OracleSpec& spec)
    : n_exc_(exciton_energies.size()), beta_(beta) {
    if (beta <= 0.0) throw validation_error("FockOracle: beta must be positive");
    if (spec.fock_cutoff < 2) throw validation_error("FockOracle: cutoff must be >= 2");
    const auto n_modes = static_cast<std::size_t>(mode_freqs.size());
    for (const auto& ch : channels) ch.validate(mode_freqs.size());

    bath_dim_ = 1;
    for (std::size_t k = 0; k < n_modes; ++k) {
        bath_dim_ *= spec.fock_cutoff;
        if (bath_dim_ * n_exc_ > spec.dim_cap)
            throw resource_error("FockOracle: dimension " +
                                 std::to_string(bath_dim_ * n_exc_) + " exceeds cap " +
                                 std::to_string(spec.dim_cap));
    }
    full_dim_ = n_exc_ * bath_dim_;

    // bath operators in the number basis
    const std::vector<int> levels(n_modes, spec.fock_cutoff);
    hb_diag_ = Eigen::VectorXd::Zero(bath_dim_);
    std::vector<Eigen::MatrixXd> displacement(n_modes);
    for (std::size_t k = 0; k < n_modes; ++k) {
        const Eigen::MatrixXd b = fock::embedded_lowering(levels, k);
        displacement[k] = b + b.transpose();
        const Eigen::MatrixXd number = b.transpose() * b;
        hb_diag_ += mode_freqs[static_cast<Eigen::Index>(k)] *
                    (number.diagonal().array() + 0.5).matrix();
    }

    rho_ = (-beta * (hb_diag_.array() - hb_diag_.minCoeff())).exp().matrix();
    rho_ /= rho_.sum();

    // h_ex = h_e (x) 1 + sum_a A_a (x) B_a + 1 (x) H_b
    Eigen::MatrixXcd h_ex = Eigen::MatrixXcd::Zero(full_dim_, full_dim_);
    for (Eigen::Index j = 0; j < n_exc_; ++j) {
        auto block = h_ex.block(j * bath_dim_, j * bath_dim_, bath_dim_, bath_dim_);
        block.diagonal().array() += exciton_energies[j];
        block.diagonal() += hb_diag_.cast<complexd>();
    }
    for (const auto& ch : channels) {
        Eigen::MatrixXd b_op = Eigen::MatrixXd::Zero(bath_dim_, bath_dim_);
        for (std::size_t k = 0; k < n_modes; ++k)
            b_op += mode_freqs[static_cast<Eigen::Index>(k)] *
                    ch.mode_weights[static_cast<Eigen::Index>(k)] * displacement[k];
        for (Eigen::Index j = 0; j < n_exc_; ++j)
            for (Eigen::Index jp = 0; jp < n_exc_; ++jp) {
                const complexd a_jjp = ch.system_op(j, jp);
                if (std::abs(a_jjp) == 0.0) continue;
                h_ex.block(j * bath_dim_, jp * bath_dim_, bath_dim_, bath_dim_) +=
                    a_jjp * b_op.cast<complexd>();
            }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h_ex);
    if (solver.info() != Eigen::Success)
        throw numeric_error("FockOracle: eigendecomposition of h_ex failed");
    lambda_ = solver.eigenvalues();
    const Eigen::MatrixXcd v_dag = solver.eigenvectors().adjoint();

    const Eigen::VectorXd* d[4] = {&dipoles.d1, &dipoles.d2, &dipoles.d3, &dipoles.dm};
    for (int alpha = 0; alpha < 4; ++alpha) {
        if (d[alpha]->size() != n_exc_)
            throw validation_error("FockOracle: dipole projection length mismatch");
        w_[alpha] = Eigen::MatrixXcd::Zero(full_dim_, bath_dim_);
        for (Eigen::Index j = 0; j < n_exc_; ++j)
            w_[alpha] += (*d[alpha])[j] * v_dag.middleCols(j * bath_dim_, bath_dim_);
    }
}

double FockOracle::thermal_ground_weight() const {
    Eigen::Index ground = 0;
    hb_diag_.minCoeff(&ground);
    return rho_[ground];
}

// <D_alpha| e^{sign * i h_ex t} |D_beta> as a bath-space matrix
Eigen::MatrixXcd FockOracle::coherence_block(int alpha, int beta, int sign, double t) const {
    Eigen::VectorXcd phases(full_dim_);
    for (Eigen::Index f = 0; f < full_dim_; ++f)
        phases[f] = std::exp(complexd(0.0, sign * lambda_[f] * t));
    return w_[alpha].adjoint() * phases.asDiagonal() * w_[beta];
}

complexd FockOracle::evaluate(int channel, double tau, double tp, double tau_prime,
                              std::map<BlockKey, Eigen::MatrixXcd>* cache) const {
    auto block = [&](int alpha, int beta, int sign, double t) -> const Eigen::MatrixXcd& {
        static thread_local Eigen::MatrixXcd scratch;
        if (cache == nullptr) {
            scratch = coherence_block(alpha - 1, beta - 1, sign, t);
            return scratch;
        }
        const BlockKey key{alpha, beta, sign, double_bits(t)};
        auto it = cache->find(key);
        if (it == cache->end())
            it = cache->emplace(key, coherence_block(alpha - 1, beta - 1, sign, t)).first;
        return it->second;
    };

    // trace of diag(left) * M_first * diag(mid) * M_second
    auto assemble = [&](const Eigen::VectorXcd& left, const Eigen::MatrixXcd& first,
                        const Eigen::VectorXcd& mid, const Eigen::MatrixXcd& second) {
        const Eigen::MatrixXcd a = left.asDiagonal() * first * mid.asDiagonal();
        return (a.array() * second.transpose().array()).sum();
    };

    auto bath_phase = [&](double t, int sign) {
        Eigen::VectorXcd v(bath_dim_);
        for (Eigen::Index u = 0; u < bath_dim_; ++u)
            v[u] = std::exp(complexd(0.0, sign * hb_diag_[u] * t));
        return v;
    };

    switch (channel) {
        case 1: {
            // Tr{ e^{-i H_b (tau+Tp)} <D2|e^{-i h_ex tau'}|D1> rho
            //     e^{i H_b (Tp+tau')} <D3|e^{i h_ex tau}|D4> }
            const Eigen::VectorXcd f1 = bath_phase(tau + tp, -1);
            Eigen::VectorXcd f2 = bath_phase(tp + tau_prime, +1);
            f2.array() *= rho_.array();
            return assemble(f1, block(2, 1, -1, tau_prime), f2, block(3, 4, +1, tau));
        }
        case 2: {
            const Eigen::VectorXcd f1 = bath_phase(tau, -1);
            Eigen::VectorXcd f2 = bath_phase(tau_prime, +1);
            f2.array() *= rho_.array();
            return assemble(f1, block(3, 1, -1, tp + tau_prime), f2,
                            block(2, 4, +1, tau + tp));
        }
        case 3: {
            const Eigen::VectorXcd f1 = bath_phase(tau, -1);
            Eigen::VectorXcd f2 = bath_phase(tau_prime, -1);
            f2.array() *= rho_.array();
            return assemble(f1, block(3, 2, -1, tp), f2,
                            block(1, 4, +1, tau + tp + tau_prime));
        }
        case 4: {
            Eigen::VectorXcd f1 = bath_phase(tau + tp + tau_prime, -1);
            f1.array() *= rho_.array();
            const Eigen::VectorXcd f2 = bath_phase(tp, +1);
            return assemble(f1, block(1, 2, +1, tau_prime), f2, block(3, 4, +1, tau));
        }
        default:
            throw validation_error("FockOracle: channel must be 1..4");
    }
}

complexd FockOracle::chi(int channel, double tau, double tp, double tau_prime) const {
    return evaluate(channel, tau, tp, tau_prime, nullptr);
}

ResponseGrid FockOracle::chi_grid(int channel, const GridSpec& grid) const {
    grid.validate();
    std::map<BlockKey, Eigen::MatrixXcd> cache;
    ResponseGrid out(grid, channel, "fock");
    for (int i_tau = 0; i_tau < grid.n_tau; ++i_tau)
        for (std::size_t i_tp = 0; i_tp < grid.tp_steps.size(); ++i_tp)
            for (int ip = 0; ip < grid.n_tau_prime; ++ip)
                out.at(i_tau, i_tp, ip) =
                    evaluate(channel, i_tau * grid.dt, grid.tp_steps[i_tp] * grid.dt,
                             ip * grid.dt, &cache);
    return out;
}

complexd fock_oracle(const Eigen::VectorXd& exciton_energies,
                     const std::vector<CouplingChannel>& channels,
                     const Eigen::VectorXd& mode_freqs, double beta,
                     const DipoleProjection& dipoles, int channel, double tau, double tp,
                     double tau_prime, const OracleSpec& spec) {
    FockOracle oracle(exciton_energies, channels, mode_freqs, beta, dipoles, spec);
    return oracle.chi(channel, tau, tp, tau_prime);
}

} // namespace fourwave
