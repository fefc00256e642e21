// shared fixtures and generators for the unit tests

#pragma once

#include <Eigen/Dense>

#include <complex>

#include "fourwave/bath.hpp"
#include "fourwave/exciton.hpp"
#include "fourwave/random.hpp"

namespace testutil {

using fourwave::complexd;

inline fourwave::SiteSystem random_system(int n_sites, std::uint64_t seed) {
    fourwave::SplitMix64 rng(seed);
    fourwave::SiteSystem sys;
    sys.site_energies.resize(n_sites);
    for (int l = 0; l < n_sites; ++l) sys.site_energies[l] = 0.2 * rng.gaussian();
    sys.couplings = Eigen::MatrixXd::Zero(n_sites, n_sites);
    for (int l = 0; l < n_sites; ++l)
        for (int m = l + 1; m < n_sites; ++m) {
            const double v = 0.05 * rng.gaussian();
            sys.couplings(l, m) = v;
            sys.couplings(m, l) = v;
        }
    sys.dipoles.resize(3, n_sites);
    for (int l = 0; l < n_sites; ++l)
        for (int c = 0; c < 3; ++c) sys.dipoles(c, l) = rng.gaussian();
    return sys;
}

inline Eigen::Vector3d unit3(double x, double y, double z) {
    Eigen::Vector3d v(x, y, z);
    return v / v.norm();
}

// rotation matrix about a random axis (Rodrigues)
inline Eigen::Matrix3d random_rotation(std::uint64_t seed) {
    fourwave::SplitMix64 rng(seed);
    Eigen::Vector3d axis(rng.gaussian(), rng.gaussian(), rng.gaussian());
    axis.normalize();
    const double angle = rng.uniform() * 6.28318530717958648;
    Eigen::Matrix3d k;
    k << 0, -axis.z(), axis.y(), axis.z(), 0, -axis.x(), -axis.y(), axis.x(), 0;
    return Eigen::Matrix3d::Identity() + std::sin(angle) * k +
           (1.0 - std::cos(angle)) * (k * k);
}

inline double max_abs_diff(const std::vector<complexd>& a, const std::vector<complexd>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double max_abs(const std::vector<complexd>& a) {
    double m = 0.0;
    for (const auto& v : a) m = std::max(m, std::abs(v));
    return m;
}

} // namespace testutil
