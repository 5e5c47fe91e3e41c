#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "saf/objective.hpp"

namespace saf {

enum class StepMode { backtracking, fixed_step };

enum class SolveStatus { max_iters, grad_converged, nmse_converged, failed };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::max_iters: return "max_iters";
        case SolveStatus::grad_converged: return "grad_converged";
        case SolveStatus::nmse_converged: return "nmse_converged";
        case SolveStatus::failed: return "failed";
    }
    return "?";
}

/// Base steps the experiments use for unit-variance Gaussian rows.
inline double default_mu(Field field) { return field == Field::real ? 4.0 : 7.0; }

struct SolverConfig {
    Objective objective{};
    double mu = 4.0;
    double alpha = 0.4;
    double beta = 0.2;
    int s_max = 2;
    int max_iters = 5000;
    StepMode mode = StepMode::backtracking;
    double stop_grad_tol = 1e-12;  // relative: ||g|| <= tol * max(1, ||z||)
    std::optional<double> stop_nmse_tol;

    void validate() const {
        if (!(mu > 0.0)) throw std::invalid_argument("SolverConfig: mu must be > 0");
        if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("SolverConfig: alpha in (0,1)");
        if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("SolverConfig: beta in (0,1)");
        if (s_max < 0) throw std::invalid_argument("SolverConfig: s_max must be >= 0");
        if (max_iters < 1) throw std::invalid_argument("SolverConfig: max_iters must be >= 1");
        objective.params.validate();
    }
};

struct IterationRecord {
    int t = 0;
    double loss = 0.0;
    double mu_t = 0.0;  // step taken from this iterate; 0 on the final record
    int backtracks = 0;
    double grad_norm = 0.0;
    std::optional<double> nmse;
    bool armijo_ok = false;
};

struct SolverTrace {
    std::vector<IterationRecord> records;
    SolveStatus status = SolveStatus::max_iters;

    /// Number of gradient steps taken; records.size() == iterations + 1.
    std::size_t iterations() const { return records.empty() ? 0 : records.size() - 1; }
    double final_loss() const { return records.empty() ? 0.0 : records.back().loss; }
};

template <Scalar T>
struct BacktrackResult {
    double mu_t = 0.0;
    int s = 0;
    bool armijo_ok = false;
    Vec<T> z_next;
    double loss_next = 0.0;
};

/// Armijo backtracking over s in {0, ..., s_max}: accepts the smallest s
/// with loss(z - beta^s mu g) <= loss(z) - alpha beta^s mu ||g||^2, or
/// s_max when none qualifies (the step is still taken, matching the
/// search loop's exit condition).
template <Scalar T, typename LossAt>
BacktrackResult<T> backtrack_step(LossAt&& loss_at, const Vec<T>& z, const Vec<T>& g,
                                  double loss_z, const SolverConfig& cfg) {
    const double gn2 = norm2(g);
    BacktrackResult<T> res;
    double step = cfg.mu;
    for (int s = 0;; ++s, step *= cfg.beta) {
        Vec<T> cand = z;
        axpy(-step, g, cand);
        const double lc = loss_at(cand);
        const bool ok = lc <= loss_z - cfg.alpha * step * gn2;
        if (ok || s >= cfg.s_max) {
            res.mu_t = step;
            res.s = s;
            res.armijo_ok = ok;
            res.z_next = std::move(cand);
            res.loss_next = lc;
            return res;
        }
    }
}

/// Gradient descent of Algorithm-1 form: z_{t+1} = z_t - mu_t grad(z_t),
/// with mu_t from backtracking or held fixed. Stops on max_iters, the
/// relative-gradient rule, or (when truth is supplied) the NMSE rule.
/// A non-finite iterate or loss aborts with status failed, trace kept.
template <typename Model>
std::pair<Vec<typename Model::signal_t>, SolverTrace> run(
    const Model& model, const Observation& obs, const SolverConfig& cfg,
    Vec<typename Model::signal_t> z,
    const Vec<typename Model::signal_t>* truth = nullptr) {
    using S = typename Model::signal_t;
    cfg.validate();
    detail::require(z.size() == model.n(), "run: init dimension mismatch");
    detail::require(obs.m() == model.m(), "run: observation dimension mismatch");

    SolverTrace trace;
    trace.records.reserve(static_cast<std::size_t>(cfg.max_iters) + 1);

    auto u = model.forward(z);
    double loss = objective_loss_from_meas(cfg.objective, obs.b, u);

    for (int t = 0;; ++t) {
        const auto g = objective_grad_from_meas(cfg.objective, model, obs.b, u);
        const double gn = norm(g);

        IterationRecord rec;
        rec.t = t;
        rec.loss = loss;
        rec.grad_norm = gn;
        if (truth != nullptr) rec.nmse = nmse(z, *truth);
        trace.records.push_back(rec);

        if (!std::isfinite(loss) || !std::isfinite(gn) || !all_finite(z)) {
            trace.status = SolveStatus::failed;
            break;
        }
        if (truth != nullptr && cfg.stop_nmse_tol.has_value() && *rec.nmse <= *cfg.stop_nmse_tol) {
            trace.status = SolveStatus::nmse_converged;
            break;
        }
        if (gn <= cfg.stop_grad_tol * std::max(1.0, norm(z))) {
            trace.status = SolveStatus::grad_converged;
            break;
        }
        if (t >= cfg.max_iters) {
            trace.status = SolveStatus::max_iters;
            break;
        }

        Vec<typename Model::meas_t> u_cand;
        auto loss_at = [&](const Vec<S>& zc) {
            u_cand = model.forward(zc);
            return objective_loss_from_meas(cfg.objective, obs.b, u_cand);
        };

        if (cfg.mode == StepMode::fixed_step) {
            Vec<S> cand = z;
            axpy(-cfg.mu, g, cand);
            const double lc = loss_at(cand);
            trace.records.back().mu_t = cfg.mu;
            trace.records.back().backtracks = 0;
            trace.records.back().armijo_ok = lc <= loss - cfg.alpha * cfg.mu * gn * gn;
            z = std::move(cand);
        } else {
            auto bt = backtrack_step(loss_at, z, g, loss, cfg);
            // loss_at ran last on the accepted candidate, so u_cand matches it
            trace.records.back().mu_t = bt.mu_t;
            trace.records.back().backtracks = bt.s;
            trace.records.back().armijo_ok = bt.armijo_ok;
            z = std::move(bt.z_next);
        }
        u = std::move(u_cand);
        loss = objective_loss_from_meas(cfg.objective, obs.b, u);
    }
    return {std::move(z), std::move(trace)};
}

}  // namespace saf
