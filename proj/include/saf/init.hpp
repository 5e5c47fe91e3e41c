#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "saf/measurement.hpp"
#include "saf/rng.hpp"
#include "saf/vec.hpp"

namespace saf {

struct InitConfig {
    std::size_t truncation_count = 0;  // 0 selects the default floor(3m/13), clamped to [1, m]
    int power_iters_max = 200;
    double power_tol = 1e-6;
    RngSeed rng{};
};

inline std::size_t default_truncation_count(std::size_t m) {
    return std::clamp<std::size_t>(3 * m / 13, 1, m);
}

/// eta = sqrt(sum b_i^2 / m), the norm estimate. Returns 0 for all-zero b
/// (degenerate; the solver rejects such instances).
inline double estimate_norm(const Observation& obs) {
    detail::require(obs.m() >= 1, "estimate_norm: empty observation");
    double acc = 0.0;
    for (const double bi : obs.b) acc += bi * bi;
    return std::sqrt(acc / static_cast<double>(obs.m()));
}

/// Indices of the I largest b_i / ||a_i||, ties broken by lowest index.
/// Rows with ||a_i|| = 0 never qualify.
inline std::vector<std::size_t> select_top_indices(const std::vector<double>& b,
                                                   const std::vector<double>& row_norms,
                                                   std::size_t count) {
    detail::require(b.size() == row_norms.size(), "select_top_indices: size mismatch");
    detail::require(count >= 1 && count <= b.size(), "select_top_indices: count out of range");
    std::vector<std::size_t> idx;
    idx.reserve(b.size());
    for (std::size_t i = 0; i < b.size(); ++i)
        if (row_norms[i] > 0.0) idx.push_back(i);
    const auto mid = idx.begin() + static_cast<std::ptrdiff_t>(std::min(count, idx.size()));
    std::partial_sort(idx.begin(), mid, idx.end(), [&](std::size_t i, std::size_t j) {
        const double ri = b[i] / row_norms[i];
        const double rj = b[j] / row_norms[j];
        if (ri != rj) return ri > rj;
        return i < j;
    });
    idx.resize(std::min(count, idx.size()));
    std::sort(idx.begin(), idx.end());
    return idx;
}

template <typename Model>
std::vector<std::size_t> select_top_indices(const Model& model, const Observation& obs,
                                            std::size_t count) {
    return select_top_indices(obs.b, model.row_norms(), count);
}

namespace detail {

template <Scalar S>
void canonicalize_phase(Vec<S>& v) {
    std::size_t imax = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double a = std::abs(v[i]);
        if (a > best) {
            best = a;
            imax = i;
        }
    }
    if (best <= 0.0) return;
    if constexpr (is_complex_v<S>) {
        const S phase = conj_of(v[imax]) / best;
        scale(v, phase);
    } else {
        if (v[imax] < 0.0) scale(v, -1.0);
    }
}

}  // namespace detail

/// Power iteration for the leading eigenvector of a Hermitian PSD operator
/// given only by its application. Stops once successive iterates agree up
/// to phase within power_tol; the result has unit norm and canonical phase
/// (largest-magnitude entry real positive) so traces are reproducible.
template <Scalar S, typename Apply>
Vec<S> leading_eigenvector(Apply&& apply, std::size_t n, const InitConfig& cfg) {
    Rng rng(cfg.rng);
    Vec<S> v = sample_gaussian_vector<S>(n, rng);
    scale(v, 1.0 / norm(v));
    for (int it = 0; it < cfg.power_iters_max; ++it) {
        Vec<S> w = apply(v);
        const double nw = norm(w);
        if (nw == 0.0) throw std::domain_error("leading_eigenvector: degenerate spectrum");
        scale(w, 1.0 / nw);
        const double step = dist_up_to_phase(w, v);
        v = std::move(w);
        if (step < cfg.power_tol) break;
    }
    detail::canonicalize_phase(v);
    return v;
}

/// Weighted maximal-correlation initializer:
///   z0 = sqrt(sum b_i^2 / m) * z~,
/// z~ the leading eigenvector of M = sum_{i in I} sqrt(b_i) a_i a_i' / ||a_i||^2
/// over the truncated index set. M is applied matrix-free as
/// adjoint(w .* forward(v)) with w_i = sqrt(b_i)/||a_i||^2 on I and 0 off it.
template <typename Model>
Vec<typename Model::signal_t> initialize(const Model& model, const Observation& obs,
                                         const InitConfig& cfg) {
    using S = typename Model::signal_t;
    detail::require(obs.m() == model.m(), "initialize: observation/model size mismatch");
    const std::size_t count =
        cfg.truncation_count == 0
            ? default_truncation_count(model.m())
            : std::clamp<std::size_t>(cfg.truncation_count, 1, model.m());

    const auto row_norms = model.row_norms();
    const auto top = select_top_indices(obs.b, row_norms, count);
    std::vector<double> w(model.m(), 0.0);
    for (const std::size_t i : top) w[i] = std::sqrt(obs.b[i]) / (row_norms[i] * row_norms[i]);

    auto apply = [&](const Vec<S>& v) {
        auto u = model.forward(v);
        for (std::size_t i = 0; i < u.size(); ++i) u[i] *= w[i];
        return model.adjoint(u);
    };
    Vec<S> dir = leading_eigenvector<S>(apply, model.n(), cfg);
    scale(dir, estimate_norm(obs));
    return dir;
}

}  // namespace saf
