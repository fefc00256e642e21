#include <doctest.h>

#include <cmath>
#include <complex>
#include <limits>

#include "fourwave/volterra.hpp"

using namespace fourwave;
using state = std::complex<double>;

namespace {

// dy/dt = -int_0^t e^{-(t-s)} y(s) ds, y(0) = 1; Laplace transform gives
// y(t) = e^{-t/2} [cos(sqrt(3) t / 2) + sin(sqrt(3) t / 2) / sqrt(3)]
double exact_solution(double t) {
    const double r = 0.5 * std::sqrt(3.0) * t;
    return std::exp(-0.5 * t) * (std::cos(r) + std::sin(r) / std::sqrt(3.0));
}

double max_error(double dt) {
    const int steps = static_cast<int>(std::lround(10.0 / dt));
    VolterraRHS<state> rhs;
    rhs.kernel = [dt](int m, int l, const state& x) {
        return std::exp(-(m - l) * dt) * x;
    };
    const auto y = volterra_solve(rhs, state(1.0, 0.0), dt, steps);
    double err = 0.0;
    for (int m = 0; m <= steps; ++m)
        err = std::max(err, std::abs(y[static_cast<std::size_t>(m)] - exact_solution(m * dt)));
    return err;
}

} // namespace

TEST_CASE("zero kernel and zero source keep the state constant") {
    VolterraRHS<state> rhs;
    rhs.kernel = [](int, int, const state&) { return state(0.0, 0.0); };
    const auto y = volterra_solve(rhs, state(0.7, -0.2), 0.1, 50);
    for (const auto& v : y) CHECK(v == state(0.7, -0.2));
}

TEST_CASE("analytic memory-kernel benchmark converges at second order") {
    const double err = max_error(0.01);
    CHECK(err < 1e-4);
    const double err_half = max_error(0.005);
    const double ratio = err / err_half;
    CHECK(ratio > 3.5);
    CHECK(ratio < 4.5);
}

TEST_CASE("non-finite states report the failing step") {
    VolterraRHS<state> rhs;
    rhs.kernel = [](int m, int, const state& x) {
        if (m >= 5) return state(std::numeric_limits<double>::infinity(), 0.0);
        return x;
    };
    CHECK_THROWS_AS(volterra_solve(rhs, state(1.0, 0.0), 0.1, 20), numeric_error);
    try {
        volterra_solve(rhs, state(1.0, 0.0), 0.1, 20);
    } catch (const numeric_error& e) {
        CHECK(std::string(e.what()).find("step") != std::string::npos);
    }
}
