#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "saf/objective.hpp"

using namespace saf;

namespace {

// Frozen against a 40-digit evaluation of the defining formulas.
constexpr double kFourthRootOf2 = 1.1892071150027210667;
constexpr double kSafLoss1d = 0.35392319122895980;  // (17^(1/4)-2^(1/4))^2 / 2
constexpr double kKernel21 = 0.80393845781234944;   // f(2,1)

// Central finite differences of the loss, the independent oracle for every
// gradient. For complex coordinates the two real partials are taken
// separately; the gradient convention packs them as Re(g), Im(g).
template <typename Model>
Vec<typename Model::signal_t> fd_gradient(const Objective& o, const Model& model,
                                          const Observation& obs,
                                          const Vec<typename Model::signal_t>& z) {
    using S = typename Model::signal_t;
    Vec<S> g(z.size());
    const double h = 1e-5;
    auto loss_at = [&](const Vec<S>& p) { return objective_loss(o, model, obs, p); };
    for (std::size_t j = 0; j < z.size(); ++j) {
        Vec<S> zp = z, zm = z;
        if constexpr (is_complex_v<S>) {
            zp[j] += h;
            zm[j] -= h;
            const double dre = (loss_at(zp) - loss_at(zm)) / (2 * h);
            zp = z;
            zm = z;
            zp[j] += cx(0, h);
            zm[j] -= cx(0, h);
            const double dim = (loss_at(zp) - loss_at(zm)) / (2 * h);
            g[j] = cx(dre, dim);
        } else {
            zp[j] += h;
            zm[j] -= h;
            g[j] = (loss_at(zp) - loss_at(zm)) / (2 * h);
        }
    }
    return g;
}

template <Scalar S>
double rel_err(const Vec<S>& got, const Vec<S>& want) {
    auto d = got;
    axpy(-1.0, want, d);
    return norm(d) / std::max(norm(want), 1e-300);
}

}  // namespace

TEST_CASE("smooth_abs: anchors and degeneracies") {
    CHECK(smooth_abs(0.0, 1.0, 4.0) == Catch::Approx(1.0).epsilon(1e-15));
    CHECK(smooth_abs(1.0, 1.0, 4.0) == Catch::Approx(kFourthRootOf2).epsilon(1e-15));
    for (const double x : {-3.5, -1e-8, 0.0, 0.25, 7.0})
        CHECK(smooth_abs(x, 0.0, 4.0) == Catch::Approx(std::abs(x)).margin(1e-300));
    CHECK(smooth_abs(0.0, 0.0, 4.0) == 0.0);

    // scale safety: k-th powers of the raw arguments would overflow
    CHECK(smooth_abs(1e200, 1.0, 4.0) == Catch::Approx(1e200).epsilon(1e-15));
    CHECK(std::isfinite(smooth_abs(1e-300, 1e-290, 4.0)));
    CHECK(smooth_abs(1e-300, 1e-290, 4.0) == Catch::Approx(1e-290).epsilon(1e-10));
}

TEST_CASE("saf_weight: roots and the frozen kernel value") {
    for (const double b : {0.1, 1.0, 42.0}) {
        CHECK(saf_weight(b, b) == Catch::Approx(0.0).margin(1e-15));
        CHECK(saf_weight(0.0, b) == 0.0);
    }
    CHECK(saf_weight(0.0, 0.0) == 0.0);
    CHECK(saf_kernel(2.0, 1.0) == Catch::Approx(kKernel21).epsilon(1e-14));
    // gamma = 0 reduces the weight to the amplitude-flow form (u-b)/u
    CHECK(saf_weight(2.0, 1.0, {4.0, 0.0}) == Catch::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("saf_loss: global minimum, 1-D anchor, phase invariance") {
    Rng rng({21, 0});
    const auto mdl = build_gaussian_model<cx>(40, 10, rng);
    const auto x = sample_gaussian_vector<cx>(10, rng);
    const auto obs = observe(mdl, x);

    CHECK(saf_loss(mdl, obs, x) <= 1e-24);

    const DenseModel<double> one(1, 1, {1.0});
    Observation ob1;
    ob1.b = {1.0};
    CHECK(saf_loss(one, ob1, {2.0}) == Catch::Approx(kSafLoss1d).epsilon(1e-14));

    auto x_rot = x;
    scale(x_rot, std::polar(1.0, 0.77));
    CHECK(saf_loss(mdl, obs, x_rot) <= 1e-24);
}

TEST_CASE("objective losses are invariant under a global phase of z") {
    Rng rng({21, 5});
    const auto mdl = build_gaussian_model<cx>(30, 8, rng);
    const auto x = sample_gaussian_vector<cx>(8, rng);
    const auto obs = observe(mdl, x);
    const auto z = sample_gaussian_vector<cx>(8, rng);
    auto z_rot = z;
    scale(z_rot, std::polar(1.0, 2.1));
    for (const auto kind : {ObjectiveKind::saf, ObjectiveKind::af, ObjectiveKind::wf}) {
        const Objective o{kind, {}};
        const double l0 = objective_loss(o, mdl, obs, z);
        CHECK(objective_loss(o, mdl, obs, z_rot) == Catch::Approx(l0).margin(1e-12 * (1 + l0)));
    }
}

TEST_CASE("saf_grad: stationary at truth and equal to the 1-D kernel") {
    Rng rng({22, 0});
    const auto mdl = build_gaussian_model<double>(50, 12, rng);
    const auto x = sample_gaussian_vector<double>(12, rng);
    const auto obs = observe(mdl, x);
    CHECK(norm(saf_grad(mdl, obs, x)) <= 1e-12 * norm(x));

    const DenseModel<double> one(1, 1, {1.0});
    Observation ob1;
    ob1.b = {1.0};
    const auto g = saf_grad(one, ob1, {2.0});
    CHECK(g[0] == Catch::Approx(kKernel21).epsilon(1e-14));
}

TEST_CASE("af: truth is a minimizer, gamma->0 degeneracy, zero measurement") {
    Rng rng({23, 0});
    const auto mdl = build_gaussian_model<double>(40, 10, rng);
    const auto x = sample_gaussian_vector<double>(10, rng);
    const auto obs = observe(mdl, x);
    CHECK(af_loss(mdl, obs, x) <= 1e-24);
    CHECK(norm(af_grad(mdl, obs, x)) <= 1e-12 * norm(x));

    const auto z = sample_gaussian_vector<double>(10, rng);  // all u_i != 0 a.s.
    const double saf0 = saf_loss(mdl, obs, z, {4.0, 0.0});
    const double af0 = af_loss(mdl, obs, z);
    CHECK(saf0 == Catch::Approx(af0).epsilon(1e-12));
    CHECK(rel_err(saf_grad(mdl, obs, z, {4.0, 0.0}), af_grad(mdl, obs, z)) < 1e-12);

    // u = 0: the subgradient convention takes weight 0
    const DenseModel<double> one(1, 1, {1.0});
    Observation ob1;
    ob1.b = {3.0};
    CHECK(af_grad(one, ob1, {0.0})[0] == 0.0);
    CHECK(af_loss(one, ob1, {0.0}) == Catch::Approx(4.5));
}

TEST_CASE("wf: truth, finite differences, quartic scaling identity") {
    Rng rng({24, 0});
    const auto mdl = build_gaussian_model<double>(30, 8, rng);
    const auto x = sample_gaussian_vector<double>(8, rng);
    const auto obs = observe(mdl, x);
    CHECK(wf_loss(mdl, obs, x) <= 1e-24);
    CHECK(norm(wf_grad(mdl, obs, x)) <= 1e-12 * norm(x));

    const Objective wf{ObjectiveKind::wf, {}};
    const auto z = sample_gaussian_vector<double>(8, rng);
    CHECK(rel_err(wf_grad(mdl, obs, z), fd_gradient(wf, mdl, obs, z)) < 1e-6);

    // with b = |A z|, scaling z by 2 gives loss (9/2m) sum |u_i|^4
    const auto obz = observe(mdl, z);
    auto z2 = z;
    scale(z2, 2.0);
    const auto u = mdl.forward(z);
    double quartic = 0.0;
    for (const auto& ui : u) quartic += abs2(ui) * abs2(ui);
    CHECK(wf_loss(mdl, obz, z2) ==
          Catch::Approx(4.5 * quartic / static_cast<double>(mdl.m())).epsilon(1e-12));
}

TEST_CASE("finite-difference oracle: every objective, every model variant") {
    Rng rng({25, 0});
    const std::size_t n = 10, m = 30;

    const auto check_all = [&](const auto& model, const auto& z) {
        using S = typename std::decay_t<decltype(model)>::signal_t;
        const auto x = sample_gaussian_vector<S>(model.n(), rng);
        const auto obs = observe(model, x);
        for (const auto kind : {ObjectiveKind::saf, ObjectiveKind::wf}) {
            const Objective o{kind, {}};
            const auto g = objective_grad(o, model, obs, z);
            const auto fd = fd_gradient(o, model, obs, z);
            INFO("kind=" << objective_name(o));
            CHECK(rel_err(g, fd) < 1e-6);
        }
    };

    check_all(build_gaussian_model<double>(m, n, rng), sample_gaussian_vector<double>(n, rng));
    check_all(build_gaussian_model<cx>(m, n, rng), sample_gaussian_vector<cx>(n, rng));
    check_all(build_cdp_model<cx>(n, 3, rng), sample_gaussian_vector<cx>(n, rng));
    check_all(build_cdp_model_2d<double>(2, 5, 3, rng), sample_gaussian_vector<double>(n, rng));
}

TEST_CASE("saf gradient stays consistent where measurements nearly vanish") {
    // SAF is smooth across a_i'z = 0; AF is not, which is the point.
    Rng rng({26, 0});
    const std::size_t n = 8, m = 24;
    const auto mdl = build_gaussian_model<double>(m, n, rng);
    const auto x = sample_gaussian_vector<double>(n, rng);
    const auto obs = observe(mdl, x);

    auto z = sample_gaussian_vector<double>(n, rng);
    // project out row 0 so a_0'z ~ 1e-9
    Vec<double> a0(n);
    for (std::size_t j = 0; j < n; ++j) a0[j] = mdl.entry(0, j);
    const double u0 = dot(a0, z);
    axpy(-u0 / norm2(a0), a0, z);
    axpy(1e-9 / norm2(a0), a0, z);
    REQUIRE(std::abs(mdl.forward(z)[0]) < 1e-3);

    const Objective o{ObjectiveKind::saf, {}};
    CHECK(rel_err(objective_grad(o, mdl, obs, z), fd_gradient(o, mdl, obs, z)) < 1e-6);
}

TEST_CASE("kernel property report") {
    Rng rng({27, 0});
    const auto rep = verify_kernel_properties(20000, 2000, rng);
    CHECK(rep.oddness.pass);
    CHECK(rep.sign.pass);
    CHECK(rep.quadratic.pass);
    CHECK(rep.slope.pass);
    CHECK(rep.all_pass());
    CHECK(rep.oddness.worst_margin <= 1e-12);
    CHECK(rep.slope.worst_margin <= 1e-12);
}

TEST_CASE("objective dimension mismatches are rejected") {
    Rng rng({28, 0});
    const auto mdl = build_gaussian_model<double>(5, 3, rng);
    Observation obs;
    obs.b = {1.0, 2.0};  // wrong m
    CHECK_THROWS_AS(saf_loss(mdl, obs, Vec<double>{1, 2, 3}), std::invalid_argument);
    Observation ok;
    ok.b = {1, 2, 3, 4, 5};
    CHECK_THROWS_AS(saf_loss(mdl, ok, Vec<double>{1, 2}), std::invalid_argument);
    CHECK_THROWS_AS(SafParams(1.5, 1.0).validate(), std::invalid_argument);
    CHECK_THROWS_AS(SafParams(4.0, -0.1).validate(), std::invalid_argument);
}
