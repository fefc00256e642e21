// fock.hpp — truncated occupation-number-basis building blocks

#pragma once

#include <Eigen/Dense>

#include "fourwave/errors.hpp"

namespace fourwave::fock {

// lowering operator b in an n_levels-dimensional truncated Fock space
inline Eigen::MatrixXd boson_lowering(int n_levels) {
    if (n_levels < 1) throw validation_error("boson_lowering: need at least one level");
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n_levels, n_levels);
    for (int n = 1; n < n_levels; ++n) b(n - 1, n) = std::sqrt(static_cast<double>(n));
    return b;
}

template <class ScalarMatrix>
ScalarMatrix kron(const ScalarMatrix& a, const ScalarMatrix& b) {
    ScalarMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// b for mode k embedded in a product space of per-mode level counts
inline Eigen::MatrixXd embedded_lowering(const std::vector<int>& levels, std::size_t k) {
    Eigen::MatrixXd op = Eigen::MatrixXd::Identity(1, 1);
    for (std::size_t m = 0; m < levels.size(); ++m) {
        const Eigen::MatrixXd factor = (m == k)
                                           ? boson_lowering(levels[m])
                                           : Eigen::MatrixXd::Identity(levels[m], levels[m]);
        op = kron(op, factor);
    }
    return op;
}

} // namespace fourwave::fock
