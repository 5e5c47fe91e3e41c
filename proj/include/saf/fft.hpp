#pragma once

#include <bit>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "saf/field.hpp"

namespace saf {
namespace detail {

// In-place iterative radix-2 Cooley-Tukey, unnormalized. Twiddles are
// evaluated with polar() per index rather than by recurrence, keeping
// round-off near machine precision for the 1e-12 energy invariants.
inline void fft_pow2(std::vector<cx>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n <= 1) return;
    if (!std::has_single_bit(n)) throw std::invalid_argument("fft_pow2: size not a power of two");

    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double base = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                const cx w = std::polar(1.0, base * static_cast<double>(k));
                const cx u = a[i + k];
                const cx v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
            }
        }
    }
}

// Bluestein's chirp-z transform: DFT of arbitrary length via one
// power-of-two convolution. j^2 is reduced mod 2n before the angle so
// large sizes do not lose precision.
inline void fft_bluestein(std::vector<cx>& a, bool inverse) {
    const std::size_t n = a.size();
    const double sign = inverse ? 1.0 : -1.0;
    std::vector<cx> chirp(n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t j2 = (j * j) % (2 * n);
        chirp[j] = std::polar(1.0, sign * std::numbers::pi * static_cast<double>(j2) / static_cast<double>(n));
    }
    std::size_t conv = 1;
    while (conv < 2 * n - 1) conv <<= 1;
    std::vector<cx> fa(conv), fb(conv);
    for (std::size_t j = 0; j < n; ++j) fa[j] = a[j] * chirp[j];
    fb[0] = std::conj(chirp[0]);
    for (std::size_t j = 1; j < n; ++j) fb[j] = fb[conv - j] = std::conj(chirp[j]);
    fft_pow2(fa, false);
    fft_pow2(fb, false);
    for (std::size_t j = 0; j < conv; ++j) fa[j] *= fb[j];
    fft_pow2(fa, true);
    const double inv = 1.0 / static_cast<double>(conv);
    for (std::size_t j = 0; j < n; ++j) a[j] = fa[j] * inv * chirp[j];
}

}  // namespace detail

/// In-place unitary DFT (1/sqrt(n) both directions), any length.
inline void fft_unitary(std::vector<cx>& a, bool inverse = false) {
    const std::size_t n = a.size();
    if (n <= 1) return;
    if (std::has_single_bit(n)) {
        detail::fft_pow2(a, inverse);
    } else {
        detail::fft_bluestein(a, inverse);
    }
    const double s = 1.0 / std::sqrt(static_cast<double>(n));
    for (auto& x : a) x *= s;
}

/// In-place unitary 2-D DFT of a row-major rows x cols array.
inline void fft2_unitary(std::vector<cx>& a, std::size_t rows, std::size_t cols, bool inverse = false) {
    if (a.size() != rows * cols) throw std::invalid_argument("fft2_unitary: shape mismatch");
    std::vector<cx> buf;
    buf.resize(cols);
    for (std::size_t r = 0; r < rows; ++r) {
        buf.assign(a.begin() + static_cast<std::ptrdiff_t>(r * cols),
                   a.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols));
        fft_unitary(buf, inverse);
        std::copy(buf.begin(), buf.end(), a.begin() + static_cast<std::ptrdiff_t>(r * cols));
    }
    buf.resize(rows);
    for (std::size_t c = 0; c < cols; ++c) {
        for (std::size_t r = 0; r < rows; ++r) buf[r] = a[r * cols + c];
        fft_unitary(buf, inverse);
        for (std::size_t r = 0; r < rows; ++r) a[r * cols + c] = buf[r];
    }
}

}  // namespace saf
