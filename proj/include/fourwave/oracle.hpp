// oracle.hpp — brute-force Fock-space evaluation of the response functions
//
// Builds the full exciton (x) truncated-oscillator Hamiltonian, exponentiates
// by dense eigendecomposition, and evaluates the defining operator products
// and bath traces literally.  Validates both the closed forms and the QME
// route; supports diagonal and general linear coupling.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <map>
#include <vector>

#include "fourwave/bath.hpp"
#include "fourwave/errors.hpp"
#include "fourwave/exciton.hpp"
#include "fourwave/response_grid.hpp"

namespace fourwave {

struct OracleSpec {
    int fock_cutoff = 20;        // levels per mode
    Eigen::Index dim_cap = 4096; // full Hilbert-space dimension cap
};

class FockOracle {
public:
    FockOracle(const Eigen::VectorXd& exciton_energies,
               const std::vector<CouplingChannel>& channels,
               const Eigen::VectorXd& mode_freqs, double beta,
               const DipoleProjection& dipoles, const OracleSpec& spec = {});

    complexd chi(int channel, double tau, double tp, double tau_prime) const;

    // dense evaluation with per-call caching of the coherence blocks
    ResponseGrid chi_grid(int channel, const GridSpec& grid) const;

    Eigen::Index full_dim() const { return full_dim_; }
    Eigen::Index bath_dim() const { return bath_dim_; }

    // thermal weight of the bath ground state (for convergence checks)
    double thermal_ground_weight() const;

private:
    struct BlockKey {
        int alpha, beta, sign;
        long long time_bits;
        bool operator<(const BlockKey& o) const;
    };

    Eigen::MatrixXcd coherence_block(int alpha, int beta, int sign, double t) const;
    complexd evaluate(int channel, double tau, double tp, double tau_prime,
                      std::map<BlockKey, Eigen::MatrixXcd>* cache) const;

    Eigen::Index n_exc_ = 0;
    Eigen::Index bath_dim_ = 0;
    Eigen::Index full_dim_ = 0;
    double beta_ = 1.0;
    Eigen::VectorXd hb_diag_;       // bath energies in the number basis
    Eigen::VectorXd rho_;           // thermal weights
    Eigen::VectorXd lambda_;        // eigenvalues of h_ex
    Eigen::MatrixXcd w_[4];         // W_alpha = V^+ (d_alpha (x) I_b)
};

// single-point convenience wrapper
complexd fock_oracle(const Eigen::VectorXd& exciton_energies,
                     const std::vector<CouplingChannel>& channels,
                     const Eigen::VectorXd& mode_freqs, double beta,
                     const DipoleProjection& dipoles, int channel, double tau, double tp,
                     double tau_prime, const OracleSpec& spec = {});

} // namespace fourwave
