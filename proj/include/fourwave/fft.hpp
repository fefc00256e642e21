// fft.hpp — iterative radix-2 complex FFT (power-of-two lengths)

#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "fourwave/errors.hpp"
#include "fourwave/units.hpp"

namespace fourwave::fft {

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// in-place forward transform: X_k = sum_m x_m e^{-i 2 pi k m / N}
inline void forward(std::vector<std::complex<double>>& x) {
    const std::size_t n = x.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw validation_error("fft: length must be a power of two");
    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double angle = -units::two_pi / static_cast<double>(len);
        const std::complex<double> step(std::cos(angle), std::sin(angle));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = x[i + k];
                const std::complex<double> v = x[i + k + len / 2] * w;
                x[i + k] = u + v;
                x[i + k + len / 2] = u - v;
                w *= step;
            }
        }
    }
}

// inverse kernel without the 1/N normalization: X_k = sum_m x_m e^{+i ...}
inline void backward_unnormalized(std::vector<std::complex<double>>& x) {
    for (auto& v : x) v = std::conj(v);
    forward(x);
    for (auto& v : x) v = std::conj(v);
}

} // namespace fourwave::fft
