#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "saf/rng.hpp"
#include "saf/vec.hpp"

using namespace saf;

namespace {

Vec<cx> random_cvec(std::size_t n, Rng& rng) { return sample_gaussian_vector<cx>(n, rng); }

}  // namespace

TEST_CASE("dist_up_to_phase basic values") {
    Rng rng({42, 0});
    const auto x = random_cvec(16, rng);

    CHECK(dist_up_to_phase(x, x) == Catch::Approx(0.0).margin(1e-12));

    auto neg = x;
    scale(neg, -1.0);
    CHECK(dist_up_to_phase(x, neg) == Catch::Approx(0.0).margin(1e-7));

    const Vec<double> u{1.0, 0.0}, v{0.0, 1.0};
    CHECK(dist_up_to_phase(u, v) == Catch::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("dist_up_to_phase rejects mismatched dimensions") {
    const Vec<double> u{1.0, 2.0}, v{1.0};
    CHECK_THROWS_AS(dist_up_to_phase(u, v), std::invalid_argument);
}

TEST_CASE("nmse values and zero-reference error") {
    Rng rng({7, 1});
    const auto x = random_cvec(32, rng);

    CHECK(nmse(x, x) == Catch::Approx(0.0).margin(1e-15));

    auto two_x = x;
    scale(two_x, 2.0);
    CHECK(nmse(two_x, x) == Catch::Approx(1.0).epsilon(1e-12));

    auto rotated = x;
    scale(rotated, std::polar(1.0, std::numbers::pi / 3.0));
    CHECK(nmse(rotated, x) == Catch::Approx(0.0).margin(1e-12));

    const Vec<cx> zero(32, cx{});
    CHECK_THROWS_AS(nmse(x, zero), std::domain_error);
}

TEST_CASE("dist_up_to_phase properties on random pairs") {
    Rng rng({2024, 3});
    for (int rep = 0; rep < 50; ++rep) {
        const auto u = random_cvec(24, rng);
        const auto v = random_cvec(24, rng);
        const auto w = random_cvec(24, rng);

        const double duv = dist_up_to_phase(u, v);
        CHECK(duv >= 0.0);
        CHECK(duv == Catch::Approx(dist_up_to_phase(v, u)).margin(1e-12));

        auto u_rot = u;
        scale(u_rot, std::polar(1.0, 4.9 * rng.uniform01()));
        CHECK(dist_up_to_phase(u_rot, v) == Catch::Approx(duv).margin(1e-12));

        // triangle-like sanity
        CHECK(dist_up_to_phase(u, w) <= duv + dist_up_to_phase(v, w) + 1e-10);
    }
}

TEST_CASE("complex closed form matches brute-force phase grid") {
    Rng rng({5, 5});
    for (int rep = 0; rep < 5; ++rep) {
        const auto u = random_cvec(12, rng);
        const auto v = random_cvec(12, rng);
        double best = std::numeric_limits<double>::infinity();
        const int grid = 10000;
        for (int g = 0; g < grid; ++g) {
            const double theta = 2.0 * std::numbers::pi * g / grid;
            auto ru = u;
            scale(ru, std::polar(1.0, theta));
            axpy(-1.0, v, ru);
            best = std::min(best, norm(ru));
        }
        CHECK(dist_up_to_phase(u, v) == Catch::Approx(best).margin(1e-6));
    }
}

TEST_CASE("real distance minimizes over the sign flip") {
    Rng rng({5, 6});
    for (int rep = 0; rep < 20; ++rep) {
        const auto u = sample_gaussian_vector<double>(10, rng);
        const auto v = sample_gaussian_vector<double>(10, rng);
        auto diff = u, sum = u;
        axpy(-1.0, v, diff);
        axpy(1.0, v, sum);
        CHECK(dist_up_to_phase(u, v) ==
              Catch::Approx(std::min(norm(diff), norm(sum))).epsilon(1e-14));
    }
}

TEST_CASE("gaussian sampling: moments") {
    Rng rng({99, 0});
    const std::size_t n = 100;

    double acc = 0.0;
    for (int rep = 0; rep < 10000; ++rep) acc += norm2(sample_gaussian_vector<double>(n, rng)) / n;
    CHECK(acc / 10000 == Catch::Approx(1.0).margin(0.02));

    double acc_c = 0.0;
    std::size_t count = 0;
    for (int rep = 0; rep < 200; ++rep) {
        const auto v = random_cvec(n, rng);
        acc_c += norm2(v);
        count += n;
    }
    CHECK(acc_c / count == Catch::Approx(1.0).margin(0.02));
}

TEST_CASE("gaussian sampling: reproducibility per (seed, stream)") {
    Rng a({123, 456});
    Rng b({123, 456});
    const auto va = random_cvec(50, a);
    const auto vb = random_cvec(50, b);
    REQUIRE(va.size() == vb.size());
    for (std::size_t i = 0; i < va.size(); ++i) CHECK(va[i] == vb[i]);

    Rng c({123, 457});
    const auto vc = random_cvec(50, c);
    CHECK(dist_up_to_phase(va, vc) > 1e-3);
}

TEST_CASE("derive_stream separates and reproduces substreams") {
    const auto s1 = derive_stream(10, 1, 2, 3);
    const auto s2 = derive_stream(10, 1, 2, 3);
    const auto s3 = derive_stream(10, 1, 2, 4);
    CHECK(s1 == s2);
    CHECK(s1 != s3);
    CHECK(derive_stream(10, 1) != derive_stream(11, 1));
}
