#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "affine2f/errors.hpp"
#include "affine2f/riccati.hpp"
#include "affine2f/sampler.hpp"
#include "affine2f/stationary.hpp"

using namespace affine2f;

namespace {

struct MeanSe {
    double mean;
    double se;
};

template <class Range>
MeanSe mean_se(const Range& xs) {
    const double n = static_cast<double>(xs.size());
    double s = 0.0, ss = 0.0;
    for (double v : xs) s += v;
    const double mean = s / n;
    for (double v : xs) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (n - 1) / n)};
}

// Two-sample Kolmogorov-Smirnov distance.
double ks_distance(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
    }
    return d;
}

// One-sample KS distance against a cdf.
template <class Cdf>
double ks_distance(std::vector<double> a, Cdf cdf) {
    std::sort(a.begin(), a.end());
    const double n = static_cast<double>(a.size());
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double f = cdf(a[i]);
        d = std::max({d, std::abs(f - i / n), std::abs((i + 1) / n - f)});
    }
    return d;
}

}  // namespace

TEST_CASE("PathGrid") {
    const PathGrid g(2.0, 8);
    CHECK(g.dt() == 0.25);
    CHECK(g.time(8) == 2.0);
    CHECK(g.n_points() == 9);
    CHECK_THROWS_AS(PathGrid(0.0, 3), ValidationError);
    CHECK(scheme_from_string("euler") == Scheme::euler);
    CHECK_THROWS_AS(scheme_from_string("milstein"), ValidationError);
}

TEST_CASE("RngStream is deterministic and streams differ") {
    RngStream a(7, 0), b(7, 0), c(7, 1), d(8, 0);
    for (int i = 0; i < 10; ++i) {
        const double va = a.uniform();
        CHECK(va == b.uniform());
        CHECK(va > 0.0);
        CHECK(va < 1.0);
        CHECK(va != c.uniform());
        CHECK(va != d.uniform());
    }
}

TEST_CASE("Gaussian increments are centred") {
    RngStream rng(11, 0);
    std::vector<double> xs(1'000'000);
    for (double& v : xs) v = sample_stable_increment(rng, 1.0, 2.0);
    const auto [mean, se] = mean_se(xs);
    CHECK(std::abs(mean) <= 4e-3);
    CHECK(se == doctest::Approx(1e-3).epsilon(0.01));
}

TEST_CASE("stable increments have Laplace transform exp(dt u^alpha / alpha)") {
    for (double dt : {1.0, 0.25}) {
        RngStream rng(12, static_cast<std::uint64_t>(dt * 100));
        std::vector<double> xs(200'000);
        for (double& v : xs) v = std::exp(-sample_stable_increment(rng, dt, 1.5));
        const auto [mean, se] = mean_se(xs);
        const double exact = std::exp(dt * std::pow(1.0, 1.5) / 1.5);
        CHECK(std::abs(mean - exact) <= 3 * se);
    }
    CHECK(std::exp(1.0 / 1.5) == doctest::Approx(1.9477340410546757));
}

TEST_CASE("stable increments are centred and totally skewed to the right") {
    RngStream rng(13, 0);
    std::size_t below = 0;
    double min_v = 0.0;
    const int n = 200'000;
    for (int i = 0; i < n; ++i) {
        const double v = sample_stable_increment(rng, 1.0, 1.3);
        min_v = std::min(min_v, v);
        if (v < 0.0) ++below;
    }
    // Mean zero with a heavy right tail and a light left tail: most mass lies below zero.
    CHECK(below > n / 2);
    CHECK(min_v > -20.0);
}

TEST_CASE("exact CIR from zero has the Gamma(2a, 2b/(1-e^{-b})) law") {
    const auto p = validate_params(1.3, 0.8, 0, 1, 2);
    const PathGrid grid(1.0, 1);
    std::vector<double> ys(100'000);
    for (std::size_t k = 0; k < ys.size(); ++k) {
        RngStream rng(21, k);
        ys[k] = simulate_y_exact(rng, 0.0, grid, p).back();
    }
    const GammaLaw law{2 * p.a(), 2 * p.b() / (1 - std::exp(-p.b()))};
    CHECK(ks_distance(ys, [&](double y) { return law.cdf(y); }) <= 1.63 / std::sqrt(ys.size()));
    // degrees of freedom 4a: Bessel order d/2 - 1 = 2a - 1
    CHECK(4 * p.a() / 2 - 1 == doctest::Approx(2 * p.a() - 1));
}

TEST_CASE("exact CIR mean law") {
    const auto p = validate_params(1, 1, 0, 1, 2);
    const PathGrid grid(1.0, 4);
    std::vector<double> ys(100'000);
    for (std::size_t k = 0; k < ys.size(); ++k) {
        RngStream rng(22, k);
        ys[k] = simulate_y_exact(rng, 1.0, grid, p).back();
    }
    const auto [mean, se] = mean_se(ys);
    CHECK(std::abs(mean - 1.0) <= 3 * se);
}

TEST_CASE("exact CIR handles b = 0 and b < 0") {
    for (double b : {0.0, -0.5}) {
        const auto p = validate_params(1, b, 0, 1, 2);
        const PathGrid grid(1.0, 2);
        std::vector<double> ys(50'000);
        for (std::size_t k = 0; k < ys.size(); ++k) {
            RngStream rng(23, k);
            ys[k] = simulate_y_exact(rng, 1.0, grid, p).back();
        }
        const auto [mean, se] = mean_se(ys);
        const double expected = b == 0.0 ? 2.0 : std::exp(-b) + (1 - std::exp(-b)) / b;
        CHECK(std::abs(mean - expected) <= 3 * se);
    }
}

TEST_CASE("Euler with zero noise converges to a/b") {
    const auto p = validate_params(2, 0.5, 0, 1, 1.5);
    const PathGrid grid(60.0, 6000);
    const std::vector<double> zeros(grid.n_steps(), 0.0);
    const auto path = simulate_y_euler(zeros, 0.3, grid, p);
    CHECK(path.back() == doctest::Approx(4.0).epsilon(1e-9));
    CHECK_THROWS_AS(simulate_y_euler(std::vector<double>(3, 0.0), 0.3, grid, p), ValidationError);
}

TEST_CASE("Euler and exact CIR agree in law at dt = 1/512") {
    const auto p = validate_params(1, 1, 0, 1, 2);
    const PathGrid grid(1.0, 512);
    const std::size_t n = 100'000;
    std::vector<double> exact(n), euler(n);
    for (std::size_t k = 0; k < n; ++k) {
        RngStream r1(31, k);
        exact[k] = simulate_y_exact(r1, 1.0, PathGrid(1.0, 1), p).back();
        RngStream r2(32, k);
        euler[k] = simulate_y_euler(r2, 1.0, grid, p).back();
    }
    CHECK(ks_distance(exact, euler) <= 0.02);
}

TEST_CASE("Euler and exact CIR agree in the first two moments at dt = 1/256") {
    const auto p = validate_params(1, 1, 0, 1, 2);
    const std::size_t n = 50'000;
    std::vector<double> e1(n), e2(n), u1(n), u2(n);
    for (std::size_t k = 0; k < n; ++k) {
        RngStream r1(33, k);
        e1[k] = simulate_y_exact(r1, 0.5, PathGrid(1.0, 1), p).back();
        e2[k] = e1[k] * e1[k];
        RngStream r2(34, k);
        u1[k] = simulate_y_euler(r2, 0.5, PathGrid(1.0, 256), p).back();
        u2[k] = u1[k] * u1[k];
    }
    const auto m1 = mean_se(e1), n1 = mean_se(u1), m2 = mean_se(e2), n2 = mean_se(u2);
    CHECK(std::abs(m1.mean - n1.mean) <= 3 * std::hypot(m1.se, n1.se));
    CHECK(std::abs(m2.mean - n2.mean) <= 3 * std::hypot(m2.se, n2.se));
}

TEST_CASE("Euler mean law at alpha = 1.5") {
    const auto p = validate_params(1, 1, 0, 1, 1.5);
    const PathGrid grid(1.0, 128);
    std::vector<double> ys(40'000);
    for (std::size_t k = 0; k < ys.size(); ++k) {
        RngStream rng(41, k);
        ys[k] = simulate_y_euler(rng, 1.0, grid, p).back();
        CHECK(ys[k] >= 0.0);
    }
    const auto [mean, se] = mean_se(ys);
    CHECK(std::abs(mean - 1.0) <= 3 * se);
}

TEST_CASE("X given a vanishing Y path is deterministic") {
    const auto p = validate_params(1, 1, 0.7, 1.3, 2);
    const PathGrid grid(2.0, 20);
    const std::vector<double> zero_y(grid.n_points(), 0.0);
    RngStream rng(51, 0);
    const auto xs = simulate_x_given_y(rng, 2.0, zero_y, grid, p);
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const double t = grid.time(k);
        const double expected = std::exp(-1.3 * t) * 2.0 + 0.7 * (1 - std::exp(-1.3 * t)) / 1.3;
        CHECK(xs[k] == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("X mean relaxes to m/theta") {
    const auto p = validate_params(1, 1, 1, 1, 2);
    const auto sample = simulate_terminal(52, State(1, 0), PathGrid(10.0, 100), 40'000, Scheme::exact, p);
    const auto [mean, se] = mean_se(sample.x);
    CHECK(std::abs(mean - 1.0) <= 3 * se);
}

TEST_CASE("stationary second moment of X") {
    const auto p = validate_params(1, 2, 0.5, 0.8, 2);
    const auto sample = simulate_terminal(53, StationaryStart{}, PathGrid(15.0, 600), 40'000, Scheme::exact, p);
    std::vector<double> x2(sample.x.size());
    std::transform(sample.x.begin(), sample.x.end(), x2.begin(), [](double v) { return v * v; });
    const auto [mean, se] = mean_se(x2);
    const double exact = (p.a() * p.theta() + 2 * p.b() * p.m() * p.m()) / (2 * p.b() * p.theta() * p.theta());
    CHECK(std::abs(mean - exact) <= 3 * se);
}

TEST_CASE("simulate_joint: trivial grid, determinism, thread independence") {
    const auto p = validate_params(1, 1, 0, 1, 2);
    const auto trivial = simulate_joint(1, State(0.4, -0.2), PathGrid(1.0, 0), 1, Scheme::exact, p);
    REQUIRE(trivial.y.size() == 1);
    CHECK(trivial.y[0] == 0.4);
    CHECK(trivial.x[0] == -0.2);

    const auto q = validate_params(1, 1, 0.3, 1, 1.5);
    const auto e1 = simulate_joint(99, State(1, 0), PathGrid(1.0, 50), 37, Scheme::euler, q, 1);
    const auto e2 = simulate_joint(99, State(1, 0), PathGrid(1.0, 50), 37, Scheme::euler, q, 1);
    const auto e3 = simulate_joint(99, State(1, 0), PathGrid(1.0, 50), 37, Scheme::euler, q, 4);
    CHECK(e1.y == e2.y);
    CHECK(e1.x == e2.x);
    CHECK(e1.y == e3.y);
    CHECK(e1.x == e3.x);
    for (double v : e1.y) CHECK(v >= 0.0);
    for (std::size_t k = 0; k < e1.n_paths; ++k) {
        CHECK(e1.y_path(k)[0] == 1.0);
        CHECK(e1.x_path(k)[0] == 0.0);
    }
    const auto other = simulate_joint(100, State(1, 0), PathGrid(1.0, 50), 37, Scheme::euler, q, 1);
    CHECK(other.y != e1.y);

    CHECK_THROWS_AS(simulate_joint(1, State(1, 0), PathGrid(1.0, 2), 2, Scheme::exact, q), ValidationError);
    CHECK_THROWS_AS(simulate_joint(1, StationaryStart{}, PathGrid(1.0, 2), 2, Scheme::euler, q), ValidationError);
}

TEST_CASE("stationary start keeps the Y mean at a/b") {
    const auto p = validate_params(1.5, 0.75, 0, 1, 2);
    const auto ens = simulate_joint(61, StationaryStart{}, PathGrid(4.0, 8), 20'000, Scheme::exact, p);
    for (std::size_t j = 0; j < ens.grid.n_points(); ++j) {
        std::vector<double> col(ens.n_paths);
        for (std::size_t k = 0; k < ens.n_paths; ++k) col[k] = ens.y_path(k)[j];
        const auto [mean, se] = mean_se(col);
        // nine simultaneous checks: Bonferroni-adjusted bound
        CHECK(std::abs(mean - 2.0) <= 3.5 * se);
    }
}

TEST_CASE("empirical transform agrees with the Riccati transform") {
    for (double alpha : {2.0, 1.5}) {
        const auto p = validate_params(1, 1, 0.5, 1, alpha);
        const Scheme scheme = alpha == 2.0 ? Scheme::exact : Scheme::euler;
        const auto sample = simulate_terminal(71, State(1, 0), PathGrid(1.0, 256), 20'000, scheme, p);
        for (auto [l1, l2] : {std::pair{0.5, 0.0}, {1.0, 1.0}, {2.0, -0.5}}) {
            const LambdaPair l(l1, l2);
            const Complex target = std::exp(transform_exponent(l, 1.0, State(1, 0), Tolerance{}, p));
            std::vector<double> re(sample.y.size()), im(sample.y.size());
            for (std::size_t k = 0; k < re.size(); ++k) {
                const Complex z = std::exp(Complex(-l1 * sample.y[k], l2 * sample.x[k]));
                re[k] = z.real();
                im[k] = z.imag();
            }
            const auto r = mean_se(re), i = mean_se(im);
            CHECK(std::abs(r.mean - target.real()) <= 3 * r.se);
            CHECK(std::abs(i.mean - target.imag()) <= 3 * i.se + 1e-12);
        }
    }
}
