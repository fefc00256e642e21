// volterra.hpp — second-order solver for Volterra integro-differential
// equations  dX/dt = I(t) - int_0^t K(t, s) X(s) ds
//
// Trapezoidal quadrature of the memory integral with one predictor-corrector
// (Heun) pass per step.  State is any type with +, -, scalar *, and copy
// (std::complex<double> or dense Eigen matrices).

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "fourwave/errors.hpp"

namespace fourwave {

namespace detail {

inline bool finite_state(const std::complex<double>& x) {
    return std::isfinite(x.real()) && std::isfinite(x.imag());
}
inline bool finite_state(double x) { return std::isfinite(x); }
template <class Derived>
bool finite_state(const Eigen::MatrixBase<Derived>& x) {
    return x.allFinite();
}

} // namespace detail

// Right-hand side of one Volterra problem.  kernel(m, l, X) applies
// K(t_m, t_l) to X (including any left/right multiplication structure);
// source may be empty for homogeneous equations.
template <class State>
struct VolterraRHS {
    std::function<State(int m, int l, const State&)> kernel;
    std::function<State(int m)> source;
};

// Integrate n_steps steps of size dt from the initial state; returns the
// n_steps + 1 grid samples.  Deterministic: fixed evaluation order.
template <class State>
std::vector<State> volterra_solve(const VolterraRHS<State>& rhs, const State& initial,
                                  double dt, int n_steps) {
    if (dt <= 0.0) throw validation_error("volterra_solve: dt must be positive");
    if (n_steps < 0) throw validation_error("volterra_solve: negative step count");
    if (!rhs.kernel) throw validation_error("volterra_solve: kernel is required");

    std::vector<State> x;
    x.reserve(static_cast<std::size_t>(n_steps) + 1);
    x.push_back(initial);

    // memory integral at t_m; x_of_m lets the corrector substitute a predictor
    auto derivative = [&](int m, const State& x_at_m) -> State {
        State acc = initial * 0.0;
        if (m > 0) {
            acc = rhs.kernel(m, 0, x[0]) * 0.5;
            for (int l = 1; l < m; ++l) acc = acc + rhs.kernel(m, l, x[static_cast<std::size_t>(l)]);
            acc = acc + rhs.kernel(m, m, x_at_m) * 0.5;
            acc = acc * dt;
        }
        State f = acc * (-1.0);
        if (rhs.source) f = f + rhs.source(m);
        return f;
    };

    for (int m = 0; m < n_steps; ++m) {
        const State f0 = derivative(m, x.back());
        const State predictor = x.back() + f0 * dt;
        const State f1 = derivative(m + 1, predictor);
        State next = x.back() + (f0 + f1) * (0.5 * dt);
        if (!detail::finite_state(next))
            throw numeric_error("volterra_solve: non-finite state at step " +
                                std::to_string(m + 1));
        x.push_back(std::move(next));
    }
    return x;
}

} // namespace fourwave
