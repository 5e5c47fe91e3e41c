// Command-line harness for the phase-retrieval experiments: recovery
// sweeps, noise sweeps, timing benchmarks, CDP image recovery, single
// solves from files, and the gradient-kernel property check.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <map>

#include "saf/saf.hpp"

namespace {

using namespace saf;

struct CommonArgs {
    std::size_t n = 100;
    std::vector<double> ratios;
    std::vector<double> snrs;
    std::vector<std::size_t> masks;
    int trials = 1;
    std::uint64_t seed = 1;
    std::string field = "real";
    std::vector<std::string> algos{"saf"};
    std::string out;
    int workers = 1;
    double mu = 0.0;  // 0 = per-field default
    double k = 4.0;
    double gamma = 1.0;
    bool paper_scale = false;
    int iters = 0;  // 0 = per-command default
    double success_tol = 0.0;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("--n", a.n, "signal dimension");
    cmd->add_option("--ratios", a.ratios, "m/n grid")->delimiter(',');
    cmd->add_option("--snr", a.snrs, "SNR grid in dB")->delimiter(',');
    cmd->add_option("--masks", a.masks, "CDP mask counts K")->delimiter(',');
    cmd->add_option("--trials", a.trials, "Monte-Carlo trials per grid point");
    cmd->add_option("--seed", a.seed, "base seed");
    cmd->add_option("--field", a.field, "real|complex")
        ->check(CLI::IsMember({"real", "complex"}));
    cmd->add_option("--algo", a.algos, "algorithms: saf|af|wf")->delimiter(',');
    cmd->add_option("--out", a.out, "output CSV path");
    cmd->add_option("--workers", a.workers, "parallel trial workers");
    cmd->add_option("--mu", a.mu, "base step size (default 4 real / 7 complex)");
    cmd->add_option("--k", a.k, "smoothness exponent (saf)");
    cmd->add_option("--gamma", a.gamma, "epsilon scale eps_i = gamma*b_i (saf)");
    cmd->add_option("--iters", a.iters, "maximum iterations");
    cmd->add_option("--success-tol", a.success_tol, "success threshold");
    cmd->add_flag("--paper-scale", a.paper_scale,
                  "paper-scale sizes (n=1000, 256x256 image) and bench steps 6/10");
    cmd->set_config("--config", "", "plain key=value config file; flags override it");
}

ExperimentSpec to_spec(const CommonArgs& a, ExperimentKind kind) {
    ExperimentSpec spec;
    spec.kind = kind;
    spec.field = a.field == "real" ? Field::real : Field::complex;
    spec.n = a.n;
    spec.ratios = a.ratios;
    spec.masks = a.masks;
    spec.snrs_db = a.snrs;
    spec.trials = a.trials;
    spec.seed = {a.seed, 0};
    spec.workers = a.workers;
    spec.paper_scale = a.paper_scale;
    if (a.mu > 0.0) spec.mu = a.mu;
    if (a.iters > 0) spec.max_iters = a.iters;
    if (a.success_tol > 0.0) spec.success_tol = a.success_tol;

    spec.algorithms.clear();
    for (const auto& name : a.algos) {
        if (name == "saf")
            spec.algorithms.push_back({ObjectiveKind::saf, SafParams{a.k, a.gamma}});
        else if (name == "af")
            spec.algorithms.push_back({ObjectiveKind::af, {}});
        else if (name == "wf")
            spec.algorithms.push_back({ObjectiveKind::wf, {}});
        else
            throw CLI::ValidationError("--algo", "unknown algorithm: " + name);
    }
    return spec;
}

void write_outputs(const std::string& out, const std::vector<ResultRow>& rows) {
    if (out.empty()) return;
    write_result_csv(out, rows);
    write_timing_csv(out + ".timing.csv", rows);
    std::cout << "wrote " << rows.size() << " rows to " << out << "\n";
}

void print_summary(const std::vector<ResultRow>& rows) {
    struct Agg {
        int total = 0, succ = 0;
        double iters = 0.0, wall = 0.0;
    };
    std::map<std::string, Agg> agg;
    for (const auto& r : rows) {
        char key[128];
        std::snprintf(key, sizeof(key), "%-4s m=%-6zu snr=%-6g", r.algorithm.c_str(), r.m,
                      r.snr_db);
        auto& a = agg[key];
        ++a.total;
        if (r.success) {
            ++a.succ;
            a.iters += static_cast<double>(r.iterations);
            a.wall += r.wall_s;
        }
    }
    for (const auto& [key, a] : agg) {
        std::printf("%s  success %3d/%-3d", key.c_str(), a.succ, a.total);
        if (a.succ > 0)
            std::printf("  mean-iters %8.1f  mean-time %.3fs", a.iters / a.succ, a.wall / a.succ);
        std::printf("\n");
    }
}

int cmd_verify_kernel(std::size_t samples, std::size_t grid, std::uint64_t seed) {
    Rng rng({seed, 0});
    const auto rep = verify_kernel_properties(samples, grid, rng);
    const auto line = [](const char* name, const KernelPropertyReport::Entry& e) {
        std::printf("%-38s %s  (worst margin %.3e)\n", name, e.pass ? "PASS" : "FAIL",
                    e.worst_margin);
    };
    line("property 1: f(-x,b) = -f(x,b)", rep.oddness);
    line("property 2: f(+-b+x,b)x >= 0 on [-b,b]", rep.sign);
    line("property 3: f(1+x,1)x >= 0.18x^2", rep.quadratic);
    line("property 4: |f(+-b+x,b)/x| <= 1", rep.slope);
    return rep.all_pass() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"smooth amplitude flow phase retrieval experiments"};
    app.require_subcommand(1);

    CommonArgs a;

    auto* sweep = app.add_subcommand("sweep", "noiseless success-rate sweep over m/n");
    add_common(sweep, a);
    auto* snr = app.add_subcommand("snr", "noisy sweep over (m/n, SNR)");
    add_common(snr, a);
    auto* bench = app.add_subcommand("bench", "iterations/time to NMSE 1e-14");
    add_common(bench, a);

    auto* cdp = app.add_subcommand("cdp", "coded-diffraction image recovery");
    add_common(cdp, a);
    std::string image_path, recovered_path, dump_model_path;
    std::size_t image_size = 64;
    cdp->add_option("--image", image_path, "input PGM image (default: synthetic gradient)");
    cdp->add_option("--size", image_size, "synthetic image side length");
    cdp->add_option("--recovered", recovered_path, "write the recovered image here (PGM)");
    cdp->add_option("--dump-model", dump_model_path, "dump the first trial's masks");

    auto* solve = app.add_subcommand("solve", "solve one instance from files");
    add_common(solve, a);
    std::string model_path, obs_path, solution_path = "solution.txt", trace_path = "trace.csv";
    solve->add_option("--model", model_path, "model file")->required();
    solve->add_option("--obs", obs_path, "observation file (one amplitude per line)")->required();
    solve->add_option("--solution", solution_path, "solution output path");
    solve->add_option("--trace", trace_path, "per-iteration trace CSV path");

    auto* verify = app.add_subcommand("verify-kernel", "check gradient-kernel properties 1-4");
    std::size_t vk_samples = 100000, vk_grid = 10000;
    std::uint64_t vk_seed = 1;
    verify->add_option("--samples", vk_samples, "random sample count");
    verify->add_option("--grid", vk_grid, "grid points for property 3");
    verify->add_option("--seed", vk_seed, "seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sweep->parsed()) {
            auto spec = to_spec(a, ExperimentKind::success_sweep);
            if (a.paper_scale && sweep->count("--n") == 0) spec.n = 1000;
            if (spec.ratios.empty())
                spec.ratios = spec.field == Field::real
                                  ? std::vector<double>{1.8, 2.0, 2.2, 2.6, 3.0}
                                  : std::vector<double>{2.8, 3.2, 3.6, 4.0};
            const auto rows = run_success_sweep(spec);
            write_outputs(a.out, rows);
            print_summary(rows);
        } else if (snr->parsed()) {
            auto spec = to_spec(a, ExperimentKind::snr_sweep);
            if (a.paper_scale && snr->count("--n") == 0) spec.n = 1000;
            if (spec.ratios.empty()) spec.ratios = {4.0};
            if (spec.snrs_db.empty()) spec.snrs_db = {20.0, 30.0, 40.0, 50.0};
            const auto rows = run_snr_sweep(spec);
            write_outputs(a.out, rows);
            print_summary(rows);
        } else if (bench->parsed()) {
            auto spec = to_spec(a, ExperimentKind::timing_bench);
            if (a.paper_scale && bench->count("--n") == 0) spec.n = 1000;
            if (spec.ratios.empty())
                spec.ratios = {spec.field == Field::real ? 2.0 : 4.0};
            if (bench->count("--success-tol") == 0) spec.success_tol = 1e-14;
            const auto rows = run_timing_bench(spec);
            write_outputs(a.out, rows);
            print_summary(rows);
        } else if (cdp->parsed()) {
            auto spec = to_spec(a, ExperimentKind::cdp_image);
            if (spec.masks.empty()) spec.masks = {5};
            if (cdp->count("--iters") == 0) spec.max_iters = 500;
            if (cdp->count("--success-tol") == 0) spec.success_tol = 1e-5;  // relative error
            io::Image img;
            if (!image_path.empty())
                img = io::read_pgm(image_path);
            else
                img = synthetic_gradient_image(a.paper_scale ? 256 : image_size,
                                               a.paper_scale ? 256 : image_size);
            const auto out = run_cdp_image(spec, img);
            write_outputs(a.out, out.rows);
            if (!recovered_path.empty()) io::write_pgm(recovered_path, out.recovered);
            if (!dump_model_path.empty())
                io::write_model(dump_model_path,
                                cdp_trial_model(spec, img.rows, img.cols, spec.masks.front(), 0));
            print_summary(out.rows);
        } else if (solve->parsed()) {
            auto spec = to_spec(a, ExperimentKind::single_solve);
            const auto result =
                run_single_solve(spec, model_path, obs_path, solution_path, trace_path);
            const auto& r = result.rows.front();
            std::printf("solved: n=%zu m=%zu iterations=%zu status=%s\n", r.n, r.m, r.iterations,
                        r.status.c_str());
            std::printf("solution -> %s, trace -> %s\n", solution_path.c_str(),
                        trace_path.c_str());
            if (!a.out.empty()) write_result_csv(a.out, result.rows);
        } else if (verify->parsed()) {
            return cmd_verify_kernel(vk_samples, vk_grid, vk_seed);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
