#include <doctest.h>

#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <Eigen/Eigenvalues>

#include "affine2f/errors.hpp"
#include "affine2f/riccati.hpp"
#include "affine2f/stationary.hpp"

using namespace affine2f;

namespace {

// Bessel-form density at t = 1 with normalizing factor 2b e^{b(2a+1)/2} / (e^b - 1).
double bessel_form_t1(double y, double y0, double a, double b) {
    const double eb = std::exp(b);
    return 2 * b * std::exp(b * (2 * a + 1) / 2) / (eb - 1) * std::pow(y / y0, a - 0.5) *
           std::exp(-2 * b * (y0 + eb * y) / (eb - 1)) *
           boost::math::cyl_bessel_i(2 * a - 1, 2 * b * std::sqrt(y0 * y) / std::sinh(b / 2));
}

double gamma_form_t1(double y, double a, double b) {
    const double r = 2 * b / (1 - std::exp(-b));
    return std::pow(r, 2 * a) * std::pow(y, 2 * a - 1) * std::exp(-r * y) / std::tgamma(2 * a);
}

}  // namespace

TEST_CASE("GammaLaw of the stationary Y") {
    const auto p = validate_params(1, 2, 0, 1, 2);
    const auto law = y_stationary_law(p);
    CHECK(law.shape == 2.0);
    CHECK(law.rate == 4.0);
    CHECK(law.mean() == doctest::Approx(0.5));
    CHECK(law.raw_moment(2) == doctest::Approx(1.0 * 3.0 / 8.0));
    CHECK(law.laplace(0.7) == doctest::Approx(std::pow(1 + 0.7 / 4, -2)));
    CHECK(law.cdf(0.0) == 0.0);
    CHECK(law.cdf(50.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(y_stationary_law(validate_params(1, 2, 0, 1, 1.5)), ValidationError);
    CHECK_THROWS_AS(y_stationary_law(validate_params(1, -2, 0, 1, 2)), ValidationError);
}

TEST_CASE("log_bessel_i agrees with Boost") {
    for (double nu : {-0.5, 0.0, 0.6, 1.0, 3.7}) {
        for (double z : {1e-3, 0.5, 3.0, 20.0, 80.0, 700.0, 5000.0}) {
            const double ref = std::log(boost::math::cyl_bessel_i(nu, std::min(z, 700.0)));
            if (z > 700.0) continue;
            CHECK(log_bessel_i(nu, z) == doctest::Approx(ref).epsilon(1e-12));
        }
    }
    // Large argument: I_nu(z) ~ e^z / sqrt(2 pi z)
    CHECK(log_bessel_i(0.5, 5000.0) == doctest::Approx(5000.0 - 0.5 * std::log(2 * M_PI * 5000.0)).epsilon(1e-14));
}

TEST_CASE("CIR density at t = 1 reproduces the displayed forms") {
    for (auto [a, b] : {std::pair{1.0, 1.0}, {1.3, 0.8}, {0.7, 2.0}}) {
        const auto p = validate_params(a, b, 0, 1, 2);
        for (double y = 0.01; y <= 10.0; y += 0.0731) {
            const double g = gamma_form_t1(y, a, b);
            CHECK(std::abs(cir_transition_density(y, 0.0, 1.0, p) - g) <= 1e-8 * std::max(1.0, g));
            for (double y0 : {0.2, 1.5, 4.0}) {
                const double ref = bessel_form_t1(y, y0, a, b);
                CHECK(std::abs(cir_transition_density(y, y0, 1.0, p) - ref) <= 1e-8 * std::max(1.0, ref));
            }
        }
    }
}

TEST_CASE("CIR density integrates to one") {
    using boost::math::quadrature::gauss_kronrod;
    for (double y0 : {0.0, 0.5, 3.0}) {
        for (double t : {0.3, 1.0, 4.0}) {
            const auto p = validate_params(1.3, 0.8, 0, 1, 2);
            const auto f = [&](double y) { return y > 0 ? cir_transition_density(y, y0, t, p) : 0.0; };
            double total = 0.0;
            const double edges[] = {0.0, 0.5, 2.0, 6.0, 15.0, 40.0, 100.0};
            for (int i = 0; i + 1 < 7; ++i) total += gauss_kronrod<double, 61>::integrate(f, edges[i], edges[i + 1], 15, 1e-13);
            CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
        }
    }
}

TEST_CASE("CIR density relaxes to the stationary Gamma density") {
    const auto p = validate_params(1, 1, 0, 1, 2);
    const auto law = y_stationary_law(p);
    for (double y : {0.05, 0.5, 1.0, 3.0, 8.0}) {
        for (double y0 : {0.0, 1.0, 5.0}) {
            const double ref = law.pdf(y);
            CHECK(std::abs(cir_transition_density(y, y0, 50.0, p) - ref) <= 1e-6 * ref);
        }
    }
}

TEST_CASE("CIR density errors") {
    const auto p = validate_params(1, 1, 0, 1, 2);
    CHECK_THROWS_AS(cir_transition_density(0.0, 1.0, 1.0, p), ValidationError);
    CHECK_THROWS_AS(cir_transition_density(1.0, 1.0, 0.0, p), ValidationError);
    CHECK_THROWS_AS(cir_transition_density(1.0, 1.0, 1.0, validate_params(1, 1, 0, 1, 1.5)), ValidationError);
    CHECK_THROWS_AS(cir_transition_density(1.0, 1.0, 1.0, p, 0.0), ValidationError);
    CHECK(cir_transition_density(1.0, 1.0, 1.0, p, 1e-300) ==
          doctest::Approx(cir_transition_density(1.0, 1.0, 1.0, p)).epsilon(1e-14));
}

TEST_CASE("moment index ordering") {
    CHECK(moment_index(0, 0) == 0);
    CHECK(moment_index(1, 0) == 1);
    CHECK(moment_index(0, 1) == 2);
    CHECK(moment_index(2, 0) == 3);
    CHECK(moment_index(1, 1) == 4);
    CHECK(moment_index(0, 2) == 5);
    CHECK(moment_count(2) == 6);
    CHECK(moment_count(6) == 28);
}

TEST_CASE("displayed stationary moments") {
    for (auto [a, b, m, th] : {std::tuple{1.0, 1.0, 1.0, 1.0}, {1.3, 0.8, -0.4, 2.1}, {0.5, 3.0, 2.0, 0.6}}) {
        const auto p = validate_params(a, b, m, th, 2);
        CHECK(stationary_moment(0, 0, p) == 1.0);
        CHECK(stationary_moment(1, 0, p) == doctest::Approx(a / b).epsilon(1e-14));
        CHECK(stationary_moment(0, 1, p) == doctest::Approx(m / th).epsilon(1e-14));
        CHECK(stationary_moment(2, 0, p) == doctest::Approx(a * (2 * a + 1) / (2 * b * b)).epsilon(1e-14));
        CHECK(stationary_moment(1, 1, p) == doctest::Approx(m * a / (th * b)).epsilon(1e-14));
        CHECK(stationary_moment(0, 2, p) ==
              doctest::Approx((a * th + 2 * b * m * m) / (2 * b * th * th)).epsilon(1e-14));
        const double yx2 = a * (th * (a * b + 2 * a * th + th) + 2 * m * m * b * (2 * th + b)) /
                           ((b + 2 * th) * 2 * b * b * th * th);
        CHECK(stationary_moment(1, 2, p) == doctest::Approx(yx2).epsilon(1e-14));
    }
    const auto p = validate_params(1, 2, 0, 1, 2);
    CHECK(stationary_moment(1, 0, p) == 0.5);
    CHECK_THROWS_AS(stationary_moment(1, 0, validate_params(1, 2, 0, 1, 1.7)), ValidationError);
    CHECK_THROWS_AS(stationary_moment(1, 0, validate_params(1, 2, 0, -1, 2)), ValidationError);
    CHECK_THROWS_AS(stationary_moment(-1, 0, p), ValidationError);
}

TEST_CASE("Gamma moment identity and odd-moment sign rule") {
    const auto p = validate_params(1.7, 0.9, 0.8, 1.4, 2);
    const auto q = validate_params(1.7, 0.9, -0.8, 1.4, 2);
    const auto law = y_stationary_law(p);
    const auto tp = stationary_moment_table(8, p);
    const auto tq = stationary_moment_table(8, q);
    for (int n = 0; n <= 8; ++n) {
        CHECK(tp.at(n, 0) == doctest::Approx(law.raw_moment(n)).epsilon(1e-13));
        for (int k = 0; n + k <= 8; ++k) {
            const double sign = k % 2 ? -1.0 : 1.0;
            CHECK(tq.at(n, k) == doctest::Approx(sign * tp.at(n, k)).epsilon(1e-13));
        }
    }
    const auto z = stationary_moment_table(5, validate_params(1.7, 0.9, 0, 1.4, 2));
    for (int n = 0; n <= 4; ++n) CHECK(z.at(n, 1) == 0.0);
    CHECK(z.at(0, 3) == 0.0);
    CHECK(z.at(2, 3) == 0.0);
    CHECK_THROWS_AS(tp.at(5, 4), ValidationError);
}

TEST_CASE("M = 2 moment matrix equals the displayed matrix") {
    const double a = 1.3, b = 0.8, m = -0.4, th = 2.1;
    const auto sys = build_moment_ode(2, validate_params(a, b, m, th, 2));
    Eigen::MatrixXd expected(6, 6);
    expected << 0, 0, 0, 0, 0, 0,
                a, -b, 0, 0, 0, 0,
                m, 0, -th, 0, 0, 0,
                0, 2 * a + 1, 0, -2 * b, 0, 0,
                0, m, a, 0, -b - th, 0,
                0, 0, 2 * m, 1, 0, -2 * th;
    // Row f02 couples to f10 through p(p-1)/2 = 1 at (n+1, p-2) = (1, 0).
    expected(5, 3) = 0;
    expected(5, 1) = 1;
    CHECK((sys.matrix - expected).cwiseAbs().maxCoeff() == 0.0);

    Eigen::EigenSolver<Eigen::MatrixXd> es(sys.matrix);
    std::vector<double> ev;
    for (int i = 0; i < 6; ++i) {
        CHECK(std::abs(es.eigenvalues()[i].imag()) < 1e-12);
        ev.push_back(es.eigenvalues()[i].real());
    }
    std::sort(ev.begin(), ev.end());
    std::vector<double> want{0, -b, -th, -2 * b, -b - th, -2 * th};
    std::sort(want.begin(), want.end());
    for (int i = 0; i < 6; ++i) CHECK(ev[i] == doctest::Approx(want[i]).epsilon(1e-12));
}

TEST_CASE("kernel of the moment matrix equals the recursion") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> pos(0.2, 3.0), any(-2.0, 2.0);
    for (int trial = 0; trial < 10; ++trial) {
        const auto p = validate_params(pos(gen), pos(gen), any(gen), pos(gen), 2);
        for (int order = 0; order <= 6; ++order) {
            const auto sys = build_moment_ode(order, p);
            const Eigen::VectorXd v = sys.stationary_vector();
            const auto table = stationary_moment_table(order, p);
            for (int n = 0; n <= order; ++n) {
                for (int k = 0; n + k <= order; ++k) {
                    const double ref = table.at(n, k);
                    CHECK(std::abs(v[moment_index(n, k)] - ref) <= 1e-10 * std::max(1.0, std::abs(ref)));
                }
            }
            CHECK((sys.matrix * v).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, v.cwiseAbs().maxCoeff()));
        }
    }
}

TEST_CASE("transient moments") {
    const double a = 1.3, b = 0.8, m = -0.4, th = 2.1;
    const auto p = validate_params(a, b, m, th, 2);
    const State s0(3.0, 1.5);
    const auto init = initial_moments(s0, 4);
    CHECK(init[moment_index(2, 1)] == doctest::Approx(9.0 * 1.5));
    for (double t : {0.0, 0.3, 1.0, 5.0}) {
        const auto tab = transient_moments(t, init, 4, p);
        CHECK(tab.at(0, 0) == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(tab.at(1, 0) == doctest::Approx(std::exp(-b * t) * 3.0 + a * (1 - std::exp(-b * t)) / b).epsilon(1e-12));
        CHECK(tab.at(0, 1) == doctest::Approx(std::exp(-th * t) * 1.5 + m * (1 - std::exp(-th * t)) / th).epsilon(1e-12));
    }
    const auto stat = stationary_moment_table(4, p);
    const Eigen::VectorXd sv = Eigen::Map<const Eigen::VectorXd>(stat.entries().data(), stat.entries().size());
    for (double t : {0.5, 2.0, 10.0}) {
        const auto tab = transient_moments(t, sv, 4, p);
        for (std::size_t i = 0; i < sv.size(); ++i)
            CHECK(tab.entries()[i] == doctest::Approx(sv[i]).epsilon(1e-10));
    }
    const auto late = transient_moments(40.0, init, 4, p);
    for (std::size_t i = 0; i < sv.size(); ++i)
        CHECK(std::abs(late.entries()[i] - sv[i]) <= 1e-8 * std::max(1.0, std::abs(sv[i])));
    CHECK_THROWS_AS(transient_moments(1.0, Eigen::VectorXd::Ones(3), 4, p), ValidationError);
}

TEST_CASE("mean from the stationary transform") {
    const auto p = validate_params(1.3, 0.8, 0.5, 1.1, 2);
    const auto phi = [&](double l) {
        return std::exp(stationary_exponent(LambdaPair(l, 0.0), Tolerance{1e-13, 1e-12}, p)).real();
    };
    // Richardson-extrapolated one-sided difference.
    const double h = 1e-3;
    const double d1 = (phi(0.0) - phi(h)) / h;
    const double d2 = (phi(0.0) - phi(h / 2)) / (h / 2);
    const double d4 = (phi(0.0) - phi(h / 4)) / (h / 4);
    const double r1 = 2 * d2 - d1, r2 = 2 * d4 - d2;
    const double r = (4 * r2 - r1) / 3;
    CHECK(r == doctest::Approx(1.3 / 0.8).epsilon(1e-6));
}
