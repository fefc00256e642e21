// response_grid.hpp — uniform (tau, Tp, tau') grids of response-function samples

#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "fourwave/errors.hpp"

namespace fourwave {

// Axes for chi^(k)(tau, Tp, tau'): tau and tau' are dense with step dt
// starting at 0; Tp is a small list of population times given as grid
// multiples of dt.
struct GridSpec {
    double dt = 1.0;               // fs
    int n_tau = 1;                 // points along tau (tau = 0 .. (n-1) dt)
    int n_tau_prime = 1;           // points along tau'
    std::vector<int> tp_steps{0};  // population times as multiples of dt

    std::size_t n_points() const {
        return static_cast<std::size_t>(n_tau) * tp_steps.size() *
               static_cast<std::size_t>(n_tau_prime);
    }

    void validate() const {
        if (dt <= 0.0) throw validation_error("GridSpec: dt must be positive");
        if (n_tau < 1 || n_tau_prime < 1)
            throw validation_error("GridSpec: axes need at least one point");
        if (tp_steps.empty()) throw validation_error("GridSpec: need at least one Tp value");
        for (int s : tp_steps)
            if (s < 0) throw validation_error("GridSpec: Tp steps must be non-negative");
    }

    int max_tp_step() const {
        int m = 0;
        for (int s : tp_steps) m = std::max(m, s);
        return m;
    }
};

// Dense complex samples of one response-function channel on a GridSpec.
// Storage is row-major in (tau, Tp, tau').
struct ResponseGrid {
    GridSpec grid;
    int channel = 0;                   // 1..4
    std::string provenance;            // "closed" or "qme"
    std::vector<std::complex<double>> values;

    ResponseGrid() = default;
    ResponseGrid(const GridSpec& g, int k, std::string prov)
        : grid(g), channel(k), provenance(std::move(prov)), values(g.n_points()) {}

    std::size_t index(int i_tau, std::size_t i_tp, int i_tau_prime) const {
        return (static_cast<std::size_t>(i_tau) * grid.tp_steps.size() + i_tp) *
                   static_cast<std::size_t>(grid.n_tau_prime) +
               static_cast<std::size_t>(i_tau_prime);
    }

    std::complex<double>& at(int i_tau, std::size_t i_tp, int i_tau_prime) {
        return values[index(i_tau, i_tp, i_tau_prime)];
    }
    const std::complex<double>& at(int i_tau, std::size_t i_tp, int i_tau_prime) const {
        return values[index(i_tau, i_tp, i_tau_prime)];
    }
};

} // namespace fourwave
