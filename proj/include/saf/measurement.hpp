#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "saf/fft.hpp"
#include "saf/rng.hpp"
#include "saf/vec.hpp"

namespace saf {

/// Amplitude observations b_i >= 0, with noise provenance when present.
struct NoiseMeta {
    double snr_db = 0.0;
    double sigma2 = 0.0;
};

struct Observation {
    std::vector<double> b;
    std::optional<NoiseMeta> noise;

    std::size_t m() const { return b.size(); }
};

/// Dense m x n sensing model. Row i stores the measuring vector a_i;
/// forward applies a_i' z (conjugate transpose convention).
template <Scalar T>
class DenseModel {
  public:
    using signal_t = T;
    using meas_t = T;

    DenseModel(std::size_t m, std::size_t n, std::vector<T> entries)
        : m_(m), n_(n), a_(std::move(entries)) {
        detail::require(m >= 1 && n >= 1, "DenseModel: m and n must be >= 1");
        detail::require(a_.size() == m * n, "DenseModel: entry count != m*n");
        detail::require(all_finite(a_), "DenseModel: non-finite entry");
    }

    std::size_t m() const { return m_; }
    std::size_t n() const { return n_; }

    const T& entry(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

    Vec<T> forward(const Vec<T>& z) const {
        detail::require(z.size() == n_, "forward: dimension mismatch");
        Vec<T> u(m_);
        for (std::size_t i = 0; i < m_; ++i) {
            T acc{};
            const T* row = &a_[i * n_];
            for (std::size_t j = 0; j < n_; ++j) acc += conj_of(row[j]) * z[j];
            u[i] = acc;
        }
        return u;
    }

    Vec<T> adjoint(const Vec<T>& w) const {
        detail::require(w.size() == m_, "adjoint: dimension mismatch");
        Vec<T> v(n_, T{});
        for (std::size_t i = 0; i < m_; ++i) {
            const T* row = &a_[i * n_];
            const T wi = w[i];
            for (std::size_t j = 0; j < n_; ++j) v[j] += row[j] * wi;
        }
        return v;
    }

    std::vector<double> row_norms() const {
        std::vector<double> r(m_);
        for (std::size_t i = 0; i < m_; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n_; ++j) acc += abs2(a_[i * n_ + j]);
            r[i] = std::sqrt(acc);
        }
        return r;
    }

  private:
    std::size_t m_, n_;
    std::vector<T> a_;  // row-major
};

/// Coded-diffraction-pattern model: b^(k) = |F D^(k) x| with unit-modulus
/// masks D^(k) and the unitary DFT, so every row of F D^(k) has norm 1.
/// The signal scalar S may be real (image recovery: the adjoint projects
/// onto R^n, which is the adjoint w.r.t. the real inner product) or
/// complex.
template <Scalar S>
class CdpModel {
  public:
    using signal_t = S;
    using meas_t = cx;

    CdpModel(std::size_t rows, std::size_t cols, std::vector<std::vector<cx>> masks)
        : rows_(rows), cols_(cols), masks_(std::move(masks)) {
        detail::require(rows >= 1 && cols >= 1, "CdpModel: empty shape");
        detail::require(!masks_.empty(), "CdpModel: K must be >= 1");
        for (const auto& d : masks_) {
            detail::require(d.size() == n(), "CdpModel: mask length != n");
            for (const auto& e : d)
                detail::require(std::abs(std::abs(e) - 1.0) < 1e-12, "CdpModel: mask entry not unit modulus");
        }
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t n() const { return rows_ * cols_; }
    std::size_t mask_count() const { return masks_.size(); }
    std::size_t m() const { return mask_count() * n(); }
    const std::vector<cx>& mask(std::size_t k) const { return masks_[k]; }

    Vec<cx> forward(const Vec<S>& z) const {
        detail::require(z.size() == n(), "forward: dimension mismatch");
        Vec<cx> u(m());
        std::vector<cx> blk(n());
        for (std::size_t k = 0; k < mask_count(); ++k) {
            for (std::size_t j = 0; j < n(); ++j) blk[j] = masks_[k][j] * z[j];
            fft2_unitary(blk, rows_, cols_, false);
            std::copy(blk.begin(), blk.end(), u.begin() + static_cast<std::ptrdiff_t>(k * n()));
        }
        return u;
    }

    Vec<S> adjoint(const Vec<cx>& w) const {
        detail::require(w.size() == m(), "adjoint: dimension mismatch");
        Vec<S> v(n(), S{});
        std::vector<cx> blk(n());
        for (std::size_t k = 0; k < mask_count(); ++k) {
            std::copy(w.begin() + static_cast<std::ptrdiff_t>(k * n()),
                      w.begin() + static_cast<std::ptrdiff_t>((k + 1) * n()), blk.begin());
            fft2_unitary(blk, rows_, cols_, true);
            for (std::size_t j = 0; j < n(); ++j) {
                const cx t = std::conj(masks_[k][j]) * blk[j];
                if constexpr (is_complex_v<S>) {
                    v[j] += t;
                } else {
                    v[j] += t.real();
                }
            }
        }
        return v;
    }

    std::vector<double> row_norms() const { return std::vector<double>(m(), 1.0); }

  private:
    std::size_t rows_, cols_;
    std::vector<std::vector<cx>> masks_;
};

template <Scalar T>
DenseModel<T> build_gaussian_model(std::size_t m, std::size_t n, Rng& rng) {
    detail::require(m >= 1 && n >= 1, "build_gaussian_model: m and n must be >= 1");
    std::vector<T> a(m * n);
    for (auto& x : a) x = rng.gaussian<T>();
    return DenseModel<T>(m, n, std::move(a));
}

inline std::vector<std::vector<cx>> sample_cdp_masks(std::size_t n, std::size_t k_masks, Rng& rng) {
    static const cx symbols[4] = {cx(1, 0), cx(-1, 0), cx(0, 1), cx(0, -1)};
    std::vector<std::vector<cx>> masks(k_masks);
    for (auto& d : masks) {
        d.resize(n);
        for (auto& e : d) e = symbols[rng.below(4)];
    }
    return masks;
}

/// 1-D CDP over the plain vectorization (the default; a 2-D transform for
/// images is available through the rows x cols overload).
template <Scalar S = cx>
CdpModel<S> build_cdp_model(std::size_t n, std::size_t k_masks, Rng& rng) {
    detail::require(n >= 1 && k_masks >= 1, "build_cdp_model: n and K must be >= 1");
    return CdpModel<S>(1, n, sample_cdp_masks(n, k_masks, rng));
}

template <Scalar S = cx>
CdpModel<S> build_cdp_model_2d(std::size_t rows, std::size_t cols, std::size_t k_masks, Rng& rng) {
    detail::require(rows >= 1 && cols >= 1 && k_masks >= 1, "build_cdp_model_2d: bad shape");
    return CdpModel<S>(rows, cols, sample_cdp_masks(rows * cols, k_masks, rng));
}

/// Noiseless amplitudes b_i = |forward(x)_i|.
template <typename Model>
Observation observe(const Model& model, const Vec<typename Model::signal_t>& x) {
    const auto u = model.forward(x);
    Observation obs;
    obs.b.resize(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) obs.b[i] = std::abs(u[i]);
    return obs;
}

/// Noisy intensities: b_i = sqrt(max(0, |forward(x)_i|^2 + eta_i)) with
/// eta_i ~ N(0, sigma^2) and sigma^2 = ||forward(x)||^2 / (m 10^(SNR/10)).
/// Intensities are clamped at zero before the square root; additive noise
/// can drive them negative while amplitudes must stay real.
template <typename Model>
Observation observe(const Model& model, const Vec<typename Model::signal_t>& x,
                    std::optional<double> snr_db, Rng& rng) {
    if (!snr_db.has_value() || std::isinf(*snr_db)) return observe(model, x);
    if (norm2(x) <= 0.0) throw std::domain_error("observe: noisy observation of zero signal");
    const auto u = model.forward(x);
    double energy = 0.0;
    for (const auto& ui : u) energy += abs2(ui);
    const double m = static_cast<double>(u.size());
    const double sigma2 = energy / (m * std::pow(10.0, *snr_db / 10.0));
    const double sigma = std::sqrt(sigma2);
    Observation obs;
    obs.b.resize(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double intensity = abs2(u[i]) + sigma * rng.normal();
        obs.b[i] = std::sqrt(std::max(0.0, intensity));
    }
    obs.noise = NoiseMeta{*snr_db, sigma2};
    return obs;
}

}  // namespace saf
