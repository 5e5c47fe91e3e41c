#pragma once

#include <atomic>
#include <bit>
#include <chrono>
#include <condition_variable>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "saf/init.hpp"
#include "saf/io.hpp"
#include "saf/model_io.hpp"
#include "saf/solver.hpp"

namespace saf {

enum class ExperimentKind { success_sweep, snr_sweep, timing_bench, cdp_image, single_solve };

inline const char* to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::success_sweep: return "sweep";
        case ExperimentKind::snr_sweep: return "snr";
        case ExperimentKind::timing_bench: return "bench";
        case ExperimentKind::cdp_image: return "cdp";
        case ExperimentKind::single_solve: return "solve";
    }
    return "?";
}

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::success_sweep;
    Field field = Field::real;
    std::size_t n = 100;
    std::vector<double> ratios;     // m/n grid (Gaussian experiments)
    std::vector<std::size_t> masks; // K grid (CDP)
    std::vector<double> snrs_db;    // SNR grid; infinity means noiseless
    int trials = 1;
    std::vector<Objective> algorithms{Objective{}};
    double success_tol = 1e-5;      // NMSE threshold (sweeps); relative error for cdp
    RngSeed seed{1, 0};
    int workers = 1;
    int max_iters = 5000;
    std::optional<double> mu;       // overrides the per-field default step
    bool paper_scale = false;       // bench: use the larger steps 6 / 10

    void validate() const {
        detail::require(trials >= 1, "ExperimentSpec: trials must be >= 1");
        detail::require(success_tol > 0.0, "ExperimentSpec: success tolerance must be > 0");
        detail::require(!algorithms.empty(), "ExperimentSpec: no algorithms given");
    }
};

/// One outcome per (grid point, trial, algorithm). Wall time is kept out
/// of the deterministic results CSV (it cannot be byte-reproducible) and
/// goes to a timing sidecar instead.
struct ResultRow {
    std::string experiment;
    std::string algorithm;
    Field field = Field::real;
    std::size_t n = 0;
    std::size_t m = 0;
    double snr_db = std::numeric_limits<double>::infinity();
    int trial = 0;
    std::uint64_t stream = 0;
    bool success = false;
    double nmse = std::numeric_limits<double>::quiet_NaN();
    std::size_t iterations = 0;
    std::string status;
    double sigma2 = 0.0;
    double wall_s = 0.0;  // sidecar only
};

inline constexpr const char* kResultCsvHeader =
    "experiment,algorithm,field,n,m,snr_db,trial,stream,success,nmse,iterations,status,sigma2";
inline constexpr const char* kTimingCsvHeader =
    "experiment,algorithm,field,n,m,snr_db,trial,wall_time_s";

inline std::vector<std::string> result_csv_fields(const ResultRow& r) {
    return {r.experiment,
            r.algorithm,
            r.field == Field::real ? "real" : "complex",
            std::to_string(r.n),
            std::to_string(r.m),
            io::fmt_double(r.snr_db),
            std::to_string(r.trial),
            std::to_string(r.stream),
            r.success ? "1" : "0",
            io::fmt_double(r.nmse),
            std::to_string(r.iterations),
            r.status,
            io::fmt_double(r.sigma2)};
}

inline void write_result_csv(const std::string& path, const std::vector<ResultRow>& rows) {
    io::CsvWriter out(path);
    out.header(kResultCsvHeader);
    for (const auto& r : rows) out.row(result_csv_fields(r));
}

inline void write_timing_csv(const std::string& path, const std::vector<ResultRow>& rows) {
    io::CsvWriter out(path);
    out.header(kTimingCsvHeader);
    for (const auto& r : rows)
        out.row({r.experiment, r.algorithm, r.field == Field::real ? "real" : "complex",
                 std::to_string(r.n), std::to_string(r.m), io::fmt_double(r.snr_db),
                 std::to_string(r.trial), io::fmt_double(r.wall_s)});
}

namespace detail {

// Runs tasks 0..count-1 on up to `workers` threads and hands each result
// to `emit` in task order, regardless of completion order.
template <typename TaskFn, typename EmitFn>
void run_ordered(std::size_t count, int workers, TaskFn task, EmitFn emit) {
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) emit(task(i));
        return;
    }
    std::vector<std::optional<std::vector<ResultRow>>> done(count);
    std::mutex mu;
    std::condition_variable cv;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            auto rows = task(i);
            {
                std::lock_guard lk(mu);
                done[i] = std::move(rows);
            }
            cv.notify_all();
        }
    };
    std::vector<std::thread> pool;
    const int nthreads = std::min<std::size_t>(static_cast<std::size_t>(workers), count);
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (std::size_t i = 0; i < count; ++i) {
        std::unique_lock lk(mu);
        cv.wait(lk, [&] { return done[i].has_value(); });
        auto rows = std::move(*done[i]);
        done[i].reset();
        lk.unlock();
        emit(std::move(rows));
    }
    for (auto& t : pool) t.join();
}

// The step-size defaults (4 real / 7 complex) are calibrated for rows of
// norm^2 ~ n (unit-variance Gaussian). Models with other row scales, CDP
// with its exactly unit-norm rows in particular, need the step and the
// norm estimate rescaled accordingly.
template <typename Model>
double row_scale(const Model& model) {
    const auto rn = model.row_norms();
    double acc = 0.0;
    for (const double r : rn) acc += r * r;
    return static_cast<double>(model.n()) * static_cast<double>(rn.size()) / acc;
}

inline std::uint64_t snr_tag(double snr_db) { return std::bit_cast<std::uint64_t>(snr_db); }

constexpr std::uint64_t kTagSweep = 1, kTagSnr = 2, kTagBench = 3, kTagCdp = 4, kTagSolve = 5;

template <typename Model, typename S = typename Model::signal_t>
ResultRow solve_row(const ExperimentSpec& spec, const Model& model, const Observation& obs,
                    const Objective& algo, const SolverConfig& cfg, const Vec<S>& z0,
                    const Vec<S>& truth) {
    ResultRow row;
    row.experiment = to_string(spec.kind);
    row.algorithm = objective_name(algo);
    row.field = field_of<S>();
    row.n = model.n();
    row.m = model.m();
    if (obs.noise) {
        row.snr_db = obs.noise->snr_db;
        row.sigma2 = obs.noise->sigma2;
    }
    const auto t0 = std::chrono::steady_clock::now();
    auto [z, trace] = run(model, obs, cfg, z0, &truth);
    row.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    row.nmse = nmse(z, truth);
    row.iterations = trace.iterations();
    row.status = to_string(trace.status);
    return row;
}

template <Scalar T>
std::vector<ResultRow> gaussian_trial(const ExperimentSpec& spec, std::uint64_t kind_tag,
                                      std::size_t m, double snr_db, int trial,
                                      double success_tol_nmse,
                                      std::optional<double> stop_nmse) {
    const std::uint64_t stream =
        derive_stream(spec.seed.stream_id, kind_tag, m, snr_tag(snr_db),
                      static_cast<std::uint64_t>(trial));
    std::vector<ResultRow> rows;
    try {
        Rng rng_x({spec.seed.seed, derive_stream(stream, 1)});
        const auto x = sample_gaussian_vector<T>(spec.n, rng_x);
        Rng rng_a({spec.seed.seed, derive_stream(stream, 2)});
        const auto model = build_gaussian_model<T>(m, spec.n, rng_a);
        Rng rng_noise({spec.seed.seed, derive_stream(stream, 3)});
        const auto obs =
            std::isinf(snr_db) ? observe(model, x) : observe(model, x, snr_db, rng_noise);

        InitConfig init_cfg;
        init_cfg.rng = {spec.seed.seed, derive_stream(stream, 4)};
        auto z0 = initialize(model, obs, init_cfg);
        scale(z0, std::sqrt(row_scale(model)));

        for (const auto& algo : spec.algorithms) {
            SolverConfig cfg;
            cfg.objective = algo;
            // wf's quartic loss has curvature ~ ||x||^2; its customary step
            // carries a 1/eta^2 normalization that saf and af do not need
            double base = spec.mu ? *spec.mu
                                  : (algo.kind == ObjectiveKind::wf ? 0.4
                                                                    : default_mu(field_of<T>()));
            if (algo.kind == ObjectiveKind::wf)
                base /= std::max(estimate_norm(obs) * estimate_norm(obs), 1e-30);
            cfg.mu = base * row_scale(model);
            cfg.max_iters = spec.max_iters;
            cfg.stop_nmse_tol = stop_nmse;
            auto row = solve_row(spec, model, obs, algo, cfg, z0, x);
            row.trial = trial;
            row.stream = stream;
            row.success = row.nmse < success_tol_nmse;
            rows.push_back(std::move(row));
        }
    } catch (const std::exception&) {
        // a failed trial becomes a row, never aborts the sweep
        for (const auto& algo : spec.algorithms) {
            ResultRow row;
            row.experiment = to_string(spec.kind);
            row.algorithm = objective_name(algo);
            row.field = field_of<T>();
            row.n = spec.n;
            row.m = m;
            row.snr_db = snr_db;
            row.trial = trial;
            row.stream = stream;
            row.status = "failed";
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

template <Scalar T>
std::vector<ResultRow> gaussian_grid(const ExperimentSpec& spec, std::uint64_t kind_tag,
                                     const std::vector<double>& snrs, double success_tol_nmse,
                                     std::optional<double> stop_nmse,
                                     const std::function<void(const ResultRow&)>& emit) {
    struct Point {
        std::size_t m;
        double snr;
        int trial;
    };
    std::vector<Point> grid;
    for (const double r : spec.ratios) {
        const auto m = static_cast<std::size_t>(std::llround(r * static_cast<double>(spec.n)));
        for (const double snr : snrs)
            for (int t = 0; t < spec.trials; ++t) grid.push_back({m, snr, t});
    }
    std::vector<ResultRow> all;
    run_ordered(
        grid.size(), spec.workers,
        [&](std::size_t i) {
            const auto& p = grid[i];
            return gaussian_trial<T>(spec, kind_tag, p.m, p.snr, p.trial, success_tol_nmse,
                                     stop_nmse);
        },
        [&](std::vector<ResultRow> rows) {
            for (auto& r : rows) {
                if (emit) emit(r);
                all.push_back(std::move(r));
            }
        });
    return all;
}

}  // namespace detail

/// Noiseless recovery sweep over the m/n grid (Fig. 2 protocol): fresh
/// instance per trial, all algorithms started from the same initializer,
/// success when final NMSE stays below the threshold.
inline std::vector<ResultRow> run_success_sweep(
    const ExperimentSpec& spec, const std::function<void(const ResultRow&)>& emit = {}) {
    spec.validate();
    detail::require(!spec.ratios.empty(), "run_success_sweep: empty m/n grid");
    const std::vector<double> noiseless{std::numeric_limits<double>::infinity()};
    const auto tol = spec.success_tol;
    if (spec.field == Field::real)
        return detail::gaussian_grid<double>(spec, detail::kTagSweep, noiseless, tol, tol, emit);
    return detail::gaussian_grid<cx>(spec, detail::kTagSweep, noiseless, tol, tol, emit);
}

/// Noisy sweep over (m/n, SNR) recording final NMSE after a full run
/// (no early NMSE stop: the iterate settles at the noise floor).
inline std::vector<ResultRow> run_snr_sweep(
    const ExperimentSpec& spec, const std::function<void(const ResultRow&)>& emit = {}) {
    spec.validate();
    detail::require(!spec.ratios.empty(), "run_snr_sweep: empty m/n grid");
    detail::require(!spec.snrs_db.empty(), "run_snr_sweep: empty SNR list");
    const auto tol = spec.success_tol;
    if (spec.field == Field::real)
        return detail::gaussian_grid<double>(spec, detail::kTagSnr, spec.snrs_db, tol, std::nullopt,
                                             emit);
    return detail::gaussian_grid<cx>(spec, detail::kTagSnr, spec.snrs_db, tol, std::nullopt, emit);
}

/// Iteration/time cost to reach NMSE <= 1e-14 (Table 1 protocol).
/// Unsuccessful trials keep their rows but are excluded from means.
inline std::vector<ResultRow> run_timing_bench(
    const ExperimentSpec& spec, const std::function<void(const ResultRow&)>& emit = {}) {
    spec.validate();
    detail::require(!spec.ratios.empty(), "run_timing_bench: empty m/n grid");
    ExperimentSpec s = spec;
    if (!s.mu && s.paper_scale) s.mu = s.field == Field::real ? 6.0 : 10.0;
    const std::vector<double> noiseless{std::numeric_limits<double>::infinity()};
    const auto tol = s.success_tol;
    if (s.field == Field::real)
        return detail::gaussian_grid<double>(s, detail::kTagBench, noiseless, tol, tol, emit);
    return detail::gaussian_grid<cx>(s, detail::kTagBench, noiseless, tol, tol, emit);
}

struct CdpOutcome {
    io::Image recovered;  // from the first trial of each K, sign-aligned
    std::vector<ResultRow> rows;
};

/// CDP image recovery (Eq. 13 protocol): the image is real, so the solve
/// runs with a real-constrained iterate; K = 3 sits below the complex-field
/// information limit and is only well-posed thanks to that constraint.
inline CdpOutcome run_cdp_image(const ExperimentSpec& spec, const io::Image& image,
                                const std::function<void(const ResultRow&)>& emit = {}) {
    spec.validate();
    detail::require(!spec.masks.empty(), "run_cdp_image: empty mask grid");
    detail::require(image.rows >= 1 && image.cols >= 1, "run_cdp_image: empty image");

    Vec<double> x(image.pixels.begin(), image.pixels.end());
    detail::require(norm2(x) > 0.0, "run_cdp_image: all-black image");

    struct Point {
        std::size_t k;
        int trial;
    };
    std::vector<Point> grid;
    for (const std::size_t k : spec.masks)
        for (int t = 0; t < spec.trials; ++t) grid.push_back({k, t});

    CdpOutcome out;
    std::mutex first_mu;
    auto task = [&](std::size_t i) {
        const auto [k_masks, trial] = grid[i];
        const std::uint64_t stream = derive_stream(spec.seed.stream_id, detail::kTagCdp,
                                                   k_masks, static_cast<std::uint64_t>(trial));
        std::vector<ResultRow> rows;
        try {
            Rng rng_mask({spec.seed.seed, derive_stream(stream, 2)});
            const auto model = build_cdp_model_2d<double>(image.rows, image.cols, k_masks, rng_mask);
            const auto obs = observe(model, x);

            InitConfig init_cfg;
            init_cfg.rng = {spec.seed.seed, derive_stream(stream, 4)};
            auto z0 = initialize(model, obs, init_cfg);
            const double rs = detail::row_scale(model);  // = n for unit-norm CDP rows
            scale(z0, std::sqrt(rs));

            SolverConfig cfg;
            cfg.objective = spec.algorithms.front();
            cfg.mu = (spec.mu ? *spec.mu : default_mu(Field::real)) * rs;
            cfg.max_iters = spec.max_iters;
            cfg.stop_nmse_tol = spec.success_tol * spec.success_tol;  // tol is relative error

            ResultRow row;
            row.experiment = to_string(spec.kind);
            row.algorithm = objective_name(cfg.objective);
            row.field = Field::real;
            row.n = model.n();
            row.m = model.m();
            row.trial = trial;
            row.stream = stream;
            const auto t0 = std::chrono::steady_clock::now();
            auto [z, trace] = run(model, obs, cfg, z0, &x);
            row.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            row.nmse = nmse(z, x);
            row.iterations = trace.iterations();
            row.status = to_string(trace.status);
            row.success = std::sqrt(row.nmse) < spec.success_tol;

            if (i == 0) {
                if (dot(z, x) < 0.0) scale(z, -1.0);  // global sign by correlation
                std::lock_guard lk(first_mu);
                out.recovered.rows = image.rows;
                out.recovered.cols = image.cols;
                out.recovered.pixels.assign(z.begin(), z.end());
            }
            rows.push_back(std::move(row));
        } catch (const std::exception&) {
            ResultRow row;
            row.experiment = to_string(spec.kind);
            row.algorithm = objective_name(spec.algorithms.front());
            row.n = image.rows * image.cols;
            row.m = k_masks * row.n;
            row.trial = trial;
            row.stream = stream;
            row.status = "failed";
            rows.push_back(std::move(row));
        }
        return rows;
    };
    detail::run_ordered(grid.size(), spec.workers, task, [&](std::vector<ResultRow> rows) {
        for (auto& r : rows) {
            if (emit) emit(r);
            out.rows.push_back(std::move(r));
        }
    });
    return out;
}

struct SingleSolveResult {
    std::vector<ResultRow> rows;
    SolverTrace trace;
};

/// Solves one instance from files with no ground truth: initialization
/// plus gradient descent to the relative-gradient stop, solution and the
/// full trace written out.
inline SingleSolveResult run_single_solve(const ExperimentSpec& spec,
                                          const std::string& model_path,
                                          const std::string& obs_path,
                                          const std::string& solution_path,
                                          const std::string& trace_path) {
    auto any_model = io::read_model(model_path);
    Observation obs;
    obs.b = io::read_vector<double>(obs_path);
    for (const double bi : obs.b)
        detail::require(bi >= 0.0 && std::isfinite(bi), "observation values must be finite and >= 0");

    SingleSolveResult result;
    std::visit(
        [&](const auto& model) {
            using S = typename std::decay_t<decltype(model)>::signal_t;
            if (obs.m() != model.m())
                throw std::runtime_error("dimension mismatch: model has m=" +
                                         std::to_string(model.m()) + " rows but observation has m=" +
                                         std::to_string(obs.m()) + " values");
            InitConfig init_cfg;
            init_cfg.rng = {spec.seed.seed,
                            derive_stream(spec.seed.stream_id, detail::kTagSolve)};
            auto z0 = initialize(model, obs, init_cfg);
            const double rs = detail::row_scale(model);
            scale(z0, std::sqrt(rs));

            SolverConfig cfg;
            cfg.objective = spec.algorithms.front();
            cfg.mu = (spec.mu ? *spec.mu : default_mu(field_of<S>())) * rs;
            cfg.max_iters = spec.max_iters;
            auto [z, trace] = run(model, obs, cfg, z0);
            io::write_vector(solution_path, z);

            io::CsvWriter tw(trace_path);
            tw.header("t,loss,step,backtracks,grad_norm,nmse");
            for (const auto& r : trace.records)
                tw.row({std::to_string(r.t), io::fmt_double(r.loss), io::fmt_double(r.mu_t),
                        std::to_string(r.backtracks), io::fmt_double(r.grad_norm),
                        r.nmse ? io::fmt_double(*r.nmse) : ""});

            ResultRow row;
            row.experiment = to_string(ExperimentKind::single_solve);
            row.algorithm = objective_name(cfg.objective);
            row.field = field_of<S>();
            row.n = model.n();
            row.m = model.m();
            row.stream = init_cfg.rng.stream_id;
            row.iterations = trace.iterations();
            row.status = to_string(trace.status);
            row.success = trace.status == SolveStatus::grad_converged;
            result.trace = std::move(trace);
            result.rows.push_back(std::move(row));
        },
        any_model);
    return result;
}

/// Rebuilds the sensing model a given cdp trial used, for dumping or
/// external re-solving; follows the same stream derivation as the driver.
inline CdpModel<double> cdp_trial_model(const ExperimentSpec& spec, std::size_t rows,
                                        std::size_t cols, std::size_t k_masks, int trial) {
    const std::uint64_t stream = derive_stream(spec.seed.stream_id, detail::kTagCdp, k_masks,
                                               static_cast<std::uint64_t>(trial));
    Rng rng_mask({spec.seed.seed, derive_stream(stream, 2)});
    return build_cdp_model_2d<double>(rows, cols, k_masks, rng_mask);
}

/// Deterministic test image: a diagonal luminance ramp over [0, 1].
inline io::Image synthetic_gradient_image(std::size_t rows, std::size_t cols) {
    io::Image img;
    img.rows = rows;
    img.cols = cols;
    img.pixels.resize(rows * cols);
    const double denom = static_cast<double>(rows + cols - 2);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            img.pixels[r * cols + c] = denom > 0.0 ? static_cast<double>(r + c) / denom : 1.0;
    return img;
}

}  // namespace saf
