// exciton.hpp — single-exciton Hamiltonian, its eigenbasis, and projected dipoles

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "fourwave/errors.hpp"

namespace fourwave {

// Site-basis description of the single-exciton manifold.  Energies and
// couplings are in internal units (rad/fs); site_energies are measured
// relative to reference_energy.
struct SiteSystem {
    Eigen::VectorXd site_energies;                    // E_l, length n
    Eigen::MatrixXd couplings;                        // symmetric, zero diagonal
    Eigen::Matrix<double, 3, Eigen::Dynamic> dipoles; // mu_l as columns
    double reference_energy = 0.0;
    double ground_energy = 0.0;

    Eigen::Index n_sites() const { return site_energies.size(); }

    // site Hamiltonian without the reference-energy shift
    Eigen::MatrixXd hamiltonian() const {
        Eigen::MatrixXd h = couplings;
        h.diagonal() = site_energies;
        return h;
    }

    void validate() const {
        const Eigen::Index n = n_sites();
        if (n < 1) throw validation_error("SiteSystem: need at least one site");
        if (couplings.rows() != n || couplings.cols() != n)
            throw validation_error("SiteSystem: coupling matrix must be n_sites x n_sites");
        if (dipoles.cols() != n)
            throw validation_error("SiteSystem: need one dipole per site");
        if (!site_energies.allFinite() || !couplings.allFinite() || !dipoles.allFinite() ||
            !std::isfinite(reference_energy) || !std::isfinite(ground_energy))
            throw validation_error("SiteSystem: non-finite entries");
        const double scale = std::max(1.0, couplings.cwiseAbs().maxCoeff());
        if ((couplings - couplings.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
            throw validation_error("SiteSystem: coupling matrix must be symmetric");
        if (couplings.diagonal().cwiseAbs().maxCoeff() > 1e-12 * scale)
            throw validation_error("SiteSystem: coupling diagonal must be zero");
    }
};

// Eigenbasis of the site Hamiltonian.  U columns are exciton states,
// U(l, j) = <l|phi_j>; exciton_dipoles columns are D_j = sum_l mu_l U(l, j).
struct ExcitonBasis {
    Eigen::VectorXd eigenvalues;                                // ascending
    Eigen::MatrixXd transform;                                  // U
    Eigen::Matrix<double, 3, Eigen::Dynamic> exciton_dipoles;   // D_j as columns
    double reference_energy = 0.0;
    double ground_energy = 0.0;

    Eigen::Index n_excitons() const { return eigenvalues.size(); }
};

// Diagonalize the real-symmetric site Hamiltonian.  Ascending eigenvalues;
// sign convention: the largest-magnitude component of each eigenvector is
// positive, ties broken by lowest site index.
inline ExcitonBasis diagonalize(const SiteSystem& system) {
    system.validate();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(system.hamiltonian());
    if (solver.info() != Eigen::Success) {
        const Eigen::MatrixXd h = system.hamiltonian();
        throw numeric_error("diagonalize: eigensolver failed; max |h| = " +
                            std::to_string(h.cwiseAbs().maxCoeff()) +
                            ", n = " + std::to_string(h.rows()));
    }

    ExcitonBasis basis;
    basis.eigenvalues = solver.eigenvalues();
    basis.transform = solver.eigenvectors();
    for (Eigen::Index j = 0; j < basis.transform.cols(); ++j) {
        Eigen::Index lmax = 0;
        double amax = -1.0;
        for (Eigen::Index l = 0; l < basis.transform.rows(); ++l) {
            const double a = std::abs(basis.transform(l, j));
            if (a > amax + 1e-14) {
                amax = a;
                lmax = l;
            }
        }
        if (basis.transform(lmax, j) < 0.0) basis.transform.col(j) = -basis.transform.col(j);
    }
    basis.exciton_dipoles = system.dipoles * basis.transform;
    basis.reference_energy = system.reference_energy;
    basis.ground_energy = system.ground_energy;
    return basis;
}

// Polarization-projected transition dipoles d_{alpha,j} = eps_alpha . D_j
// for the three pulses (1,2,3) and the detection direction (m).
struct DipoleProjection {
    Eigen::VectorXd d1, d2, d3, dm;

    const Eigen::VectorXd& component(int alpha) const {
        switch (alpha) {
            case 1: return d1;
            case 2: return d2;
            case 3: return d3;
            case 4: return dm;
        }
        throw validation_error("DipoleProjection: index must be 1..4");
    }
};

inline DipoleProjection project_dipoles(const ExcitonBasis& basis,
                                        const Eigen::Vector3d& eps1,
                                        const Eigen::Vector3d& eps2,
                                        const Eigen::Vector3d& eps3,
                                        const Eigen::Vector3d& eps_m) {
    for (const auto* e : {&eps1, &eps2, &eps3, &eps_m}) {
        if (std::abs(e->norm() - 1.0) > 1e-12)
            throw validation_error("project_dipoles: polarization vectors must have unit norm");
    }
    DipoleProjection p;
    p.d1 = basis.exciton_dipoles.transpose() * eps1;
    p.d2 = basis.exciton_dipoles.transpose() * eps2;
    p.d3 = basis.exciton_dipoles.transpose() * eps3;
    p.dm = basis.exciton_dipoles.transpose() * eps_m;
    return p;
}

} // namespace fourwave
