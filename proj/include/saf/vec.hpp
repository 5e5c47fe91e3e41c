#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "saf/field.hpp"
#include "saf/rng.hpp"

namespace saf {

template <Scalar T>
using Vec = std::vector<T>;

namespace detail {

inline void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

template <Scalar T>
void require_same_dim(const Vec<T>& u, const Vec<T>& v) {
    require(u.size() == v.size(), "vector dimension mismatch");
}

}  // namespace detail

/// <u, v> = u' v (conjugate-linear in the first argument).
template <Scalar T>
T dot(const Vec<T>& u, const Vec<T>& v) {
    detail::require_same_dim(u, v);
    T acc{};
    for (std::size_t i = 0; i < u.size(); ++i) acc += conj_of(u[i]) * v[i];
    return acc;
}

template <Scalar T>
double norm2(const Vec<T>& v) {
    double acc = 0.0;
    for (const auto& x : v) acc += abs2(x);
    return acc;
}

template <Scalar T>
double norm(const Vec<T>& v) {
    return std::sqrt(norm2(v));
}

/// y += a * x
template <Scalar T, typename A>
void axpy(A a, const Vec<T>& x, Vec<T>& y) {
    detail::require_same_dim(x, y);
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

template <Scalar T, typename A>
void scale(Vec<T>& v, A a) {
    for (auto& x : v) x *= a;
}

template <Scalar T>
bool all_finite(const Vec<T>& v) {
    for (const auto& x : v) {
        if constexpr (is_complex_v<T>) {
            if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return false;
        } else {
            if (!std::isfinite(x)) return false;
        }
    }
    return true;
}

/// dist(u, v) = min over theta of ||e^{j theta} u - v||.
/// Complex: closed form sqrt(||u||^2 + ||v||^2 - 2 |<u,v>|).
/// Real: e^{j theta} stays in R^n only for theta in {0, pi}, so the
/// minimum is over the sign flip.
template <Scalar T>
double dist_up_to_phase(const Vec<T>& u, const Vec<T>& v) {
    detail::require_same_dim(u, v);
    if constexpr (is_complex_v<T>) {
        const double s = norm2(u) + norm2(v) - 2.0 * std::abs(dot(u, v));
        return std::sqrt(std::max(0.0, s));
    } else {
        double dm = 0.0, dp = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            dm += abs2(u[i] - v[i]);
            dp += abs2(u[i] + v[i]);
        }
        return std::sqrt(std::min(dm, dp));
    }
}

/// NMSE := dist^2(z, x) / ||x||^2. Requires ||x|| > 0.
template <Scalar T>
double nmse(const Vec<T>& z, const Vec<T>& x) {
    const double nx2 = norm2(x);
    if (nx2 <= 0.0) throw std::domain_error("nmse: reference vector has zero norm");
    const double d = dist_up_to_phase(z, x);
    return d * d / nx2;
}

/// i.i.d. unit-variance Gaussian entries of the requested field.
template <Scalar T>
Vec<T> sample_gaussian_vector(std::size_t n, Rng& rng) {
    detail::require(n >= 1, "sample_gaussian_vector: n must be >= 1");
    Vec<T> v(n);
    for (auto& x : v) x = rng.gaussian<T>();
    return v;
}

}  // namespace saf
