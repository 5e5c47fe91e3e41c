#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "saf/measurement.hpp"
#include "saf/rng.hpp"
#include "saf/vec.hpp"

namespace saf {

/// Parameters of the smooth surrogate g_{k,eps}(x) = (|x|^k + eps^k)^(1/k)
/// with per-measurement eps_i = gamma * b_i.
struct SafParams {
    double k = 4.0;
    double gamma = 1.0;

    void validate() const {
        if (!(k >= 2.0)) throw std::invalid_argument("SafParams: k must be >= 2");
        if (!(gamma >= 0.0)) throw std::invalid_argument("SafParams: gamma must be >= 0");
    }
};

enum class ObjectiveKind { saf, af, wf };

struct Objective {
    ObjectiveKind kind = ObjectiveKind::saf;
    SafParams params{};
};

inline std::string objective_name(const Objective& o) {
    switch (o.kind) {
        case ObjectiveKind::saf: return "saf";
        case ObjectiveKind::af: return "af";
        case ObjectiveKind::wf: return "wf";
    }
    return "?";
}

/// (|x|^k + eps^k)^(1/k), computed with the larger magnitude factored out
/// so |x| far above or below eps cannot overflow the k-th powers.
inline double smooth_abs(double x, double eps, double k) {
    const double ax = std::abs(x);
    const double m = std::max(ax, eps);
    if (m == 0.0) return 0.0;
    return m * std::pow(std::pow(ax / m, k) + std::pow(eps / m, k), 1.0 / k);
}

/// The real weight c_i in grad = (1/m) adjoint(c .* u):
///   c = (g(u) - g(b)) * (u^k + eps^k)^(1/k - 1) * u^(k-2),   eps = gamma*b,
/// evaluated as (S - g(b))/S * (u/S)^(k-2) with S = g(u), since u <= S.
/// Finite for all u, b >= 0; returns 0 at u = b = 0.
inline double saf_weight(double u_abs, double b, const SafParams& p = {}) {
    const double eps = p.gamma * b;
    const double s = smooth_abs(u_abs, eps, p.k);
    if (s == 0.0) return 0.0;
    const double gb = smooth_abs(b, eps, p.k);
    const double ratio = u_abs / s;
    return (s - gb) / s * std::pow(ratio, p.k - 2.0);
}

/// Bivariate gradient kernel for the real case: grad l_i = f(a_i'z, b_i) a_i.
inline double saf_kernel(double x, double b, const SafParams& p = {}) {
    return saf_weight(std::abs(x), b, p) * x;
}

namespace detail {

template <typename M>
double loss_term(const Objective& o, double u_abs, double b) {
    switch (o.kind) {
        case ObjectiveKind::saf: {
            const double eps = o.params.gamma * b;
            const double d = smooth_abs(u_abs, eps, o.params.k) - smooth_abs(b, eps, o.params.k);
            return d * d;
        }
        case ObjectiveKind::af: {
            const double d = u_abs - b;
            return d * d;
        }
        case ObjectiveKind::wf: {
            const double d = u_abs * u_abs - b * b;
            return d * d;
        }
    }
    return 0.0;
}

template <typename M>
double grad_weight(const Objective& o, double u_abs, double b) {
    switch (o.kind) {
        case ObjectiveKind::saf:
            return saf_weight(u_abs, b, o.params);
        case ObjectiveKind::af:
            // weight 0 at u = 0 is a valid subgradient choice
            return u_abs > 0.0 ? (u_abs - b) / u_abs : 0.0;
        case ObjectiveKind::wf:
            return 2.0 * (u_abs * u_abs - b * b);
    }
    return 0.0;
}

}  // namespace detail

/// Loss from precomputed measurements u = forward(z): (1/2m) sum term_i.
template <typename MeasVec>
double objective_loss_from_meas(const Objective& o, const std::vector<double>& b, const MeasVec& u) {
    detail::require(b.size() == u.size(), "loss: dimension mismatch");
    const std::size_t m = b.size();
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) acc += detail::loss_term<void>(o, std::abs(u[i]), b[i]);
    return acc / (2.0 * static_cast<double>(m));
}

/// Gradient from precomputed u: (1/m) adjoint(c .* u). For complex signals
/// this is the Wirtinger gradient w.r.t. conj(z) scaled so that central
/// finite differences of the loss match it componentwise; for real
/// signals the adjoint's real projection makes it the plain gradient.
template <typename Model>
Vec<typename Model::signal_t> objective_grad_from_meas(const Objective& o, const Model& model,
                                                       const std::vector<double>& b,
                                                       const Vec<typename Model::meas_t>& u) {
    detail::require(b.size() == u.size(), "grad: dimension mismatch");
    const std::size_t m = b.size();
    Vec<typename Model::meas_t> weighted(m);
    for (std::size_t i = 0; i < m; ++i)
        weighted[i] = u[i] * detail::grad_weight<void>(o, std::abs(u[i]), b[i]);
    auto g = model.adjoint(weighted);
    scale(g, 1.0 / static_cast<double>(m));
    return g;
}

template <typename Model>
double objective_loss(const Objective& o, const Model& model, const Observation& obs,
                      const Vec<typename Model::signal_t>& z) {
    return objective_loss_from_meas(o, obs.b, model.forward(z));
}

template <typename Model>
Vec<typename Model::signal_t> objective_grad(const Objective& o, const Model& model,
                                             const Observation& obs,
                                             const Vec<typename Model::signal_t>& z) {
    return objective_grad_from_meas(o, model, obs.b, model.forward(z));
}

// Named per-objective entry points.

template <typename Model>
double saf_loss(const Model& model, const Observation& obs, const Vec<typename Model::signal_t>& z,
                const SafParams& p = {}) {
    p.validate();
    return objective_loss(Objective{ObjectiveKind::saf, p}, model, obs, z);
}

template <typename Model>
Vec<typename Model::signal_t> saf_grad(const Model& model, const Observation& obs,
                                       const Vec<typename Model::signal_t>& z, const SafParams& p = {}) {
    p.validate();
    return objective_grad(Objective{ObjectiveKind::saf, p}, model, obs, z);
}

template <typename Model>
double af_loss(const Model& model, const Observation& obs, const Vec<typename Model::signal_t>& z) {
    return objective_loss(Objective{ObjectiveKind::af}, model, obs, z);
}

template <typename Model>
Vec<typename Model::signal_t> af_grad(const Model& model, const Observation& obs,
                                      const Vec<typename Model::signal_t>& z) {
    return objective_grad(Objective{ObjectiveKind::af}, model, obs, z);
}

template <typename Model>
double wf_loss(const Model& model, const Observation& obs, const Vec<typename Model::signal_t>& z) {
    return objective_loss(Objective{ObjectiveKind::wf}, model, obs, z);
}

template <typename Model>
Vec<typename Model::signal_t> wf_grad(const Model& model, const Observation& obs,
                                      const Vec<typename Model::signal_t>& z) {
    return objective_grad(Objective{ObjectiveKind::wf}, model, obs, z);
}

/// Checked properties of the gradient kernel f (k=4, gamma=1):
///   1. f(-x, b) = -f(x, b)                          (odd)
///   2. f(+-b + x, b) x >= 0            for x in [-b, b]
///   3. f(1 + x, 1) x >= 0.18 x^2       for x in [-1/5, 1/5]
///   4. |f(+-b + x, b) / x| <= 1
struct KernelPropertyReport {
    struct Entry {
        bool pass = false;
        double worst_margin = 0.0;  // >= -tol means pass
    };
    Entry oddness;        // worst |f(x,b) + f(-x,b)|, pass if <= tol
    Entry sign;           // worst f(+-b+x,b)x, pass if >= -tol
    Entry quadratic;      // worst f(1+x,1)x - 0.18x^2 on the grid, pass if >= -tol
    Entry slope;          // worst |f(+-b+x,b)/x| - 1, pass if <= tol

    bool all_pass() const { return oddness.pass && sign.pass && quadratic.pass && slope.pass; }
};

inline KernelPropertyReport verify_kernel_properties(std::size_t samples, std::size_t grid_points,
                                                     Rng& rng, double tol = 1e-12) {
    detail::require(samples >= 1 && grid_points >= 2, "verify_kernel_properties: bad sizes");
    const SafParams p{};
    KernelPropertyReport rep;

    double worst_odd = 0.0;
    double worst_sign = 0.0;
    double worst_slope = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double b = 0.05 + 10.0 * rng.uniform01();
        const double x_any = (2.0 * rng.uniform01() - 1.0) * 5.0 * b;
        worst_odd = std::max(worst_odd, std::abs(saf_kernel(x_any, b, p) + saf_kernel(-x_any, b, p)));

        const double x_in = (2.0 * rng.uniform01() - 1.0) * b;
        for (const double c : {b, -b}) {
            worst_sign = std::min(worst_sign, saf_kernel(c + x_in, b, p) * x_in);
            if (x_any != 0.0)
                worst_slope = std::max(worst_slope, std::abs(saf_kernel(c + x_any, b, p) / x_any));
        }
    }

    double worst_quad = 0.0;
    for (std::size_t i = 0; i < grid_points; ++i) {
        const double x = -0.2 + 0.4 * static_cast<double>(i) / static_cast<double>(grid_points - 1);
        worst_quad = std::min(worst_quad, saf_kernel(1.0 + x, 1.0, p) * x - 0.18 * x * x);
    }

    rep.oddness = {worst_odd <= tol, worst_odd};
    rep.sign = {worst_sign >= -tol, worst_sign};
    rep.quadratic = {worst_quad >= -tol, worst_quad};
    rep.slope = {worst_slope <= 1.0 + tol, worst_slope - 1.0};
    return rep;
}

}  // namespace saf
