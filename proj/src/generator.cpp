#include "affine2f/generator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "affine2f/errors.hpp"

namespace affine2f {

namespace {

// Globally adaptive 31-point Gauss-Kronrod: split the panel with the largest error
// estimate until the summed estimate is below `tol`.
template <class F>
double adaptive_gk(const F& f, double lo, double hi, double tol, double& err) {
    using boost::math::quadrature::gauss_kronrod;
    struct Panel {
        double lo, hi, value, error;
        bool operator<(const Panel& o) const { return error < o.error; }
    };
    auto eval = [&](double a, double b) {
        double e = 0.0;
        const double v = gauss_kronrod<double, 31>::integrate(f, a, b, 0, 0.0, &e);
        return Panel{a, b, v, e};
    };
    std::priority_queue<Panel> panels;
    panels.push(eval(lo, hi));
    double total = panels.top().value;
    double total_err = panels.top().error;
    constexpr int max_panels = 4000;
    for (int n = 1; total_err > tol && n < max_panels; ++n) {
        const Panel worst = panels.top();
        panels.pop();
        const double mid = 0.5 * (worst.lo + worst.hi);
        const Panel left = eval(worst.lo, mid);
        const Panel right = eval(mid, worst.hi);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        panels.push(left);
        panels.push(right);
    }
    err = total_err;
    return total;
}

double ipow(double base, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

}  // namespace

TestFunction monomial(int n, int p) {
    if (n < 0 || p < 0) throw ValidationError("monomial exponents must be nonnegative");
    auto term = [](int k, int order) {
        // d^order/dz^order z^k as a callable coefficient/exponent pair
        double coef = 1.0;
        for (int j = 0; j < order; ++j) coef *= (k - j);
        return std::pair{coef, k - order};
    };
    auto make = [=](int dy, int dx) -> TestFunction::Fn {
        const auto [cy, ey] = term(n, dy);
        const auto [cx, ex] = term(p, dx);
        const double coef = cy * cx;
        if (coef == 0.0) return [](double, double) { return 0.0; };
        return [=](double y, double x) { return coef * ipow(y, ey) * ipow(x, ex); };
    };
    return {make(0, 0), make(1, 0), make(0, 1), make(2, 0), make(0, 2)};
}

TestFunction exponential_y(double lambda) {
    auto zero = [](double, double) { return 0.0; };
    return {[=](double y, double) { return std::exp(-lambda * y); },
            [=](double y, double) { return -lambda * std::exp(-lambda * y); },
            zero,
            [=](double y, double) { return lambda * lambda * std::exp(-lambda * y); },
            zero};
}

TestFunction lyapunov_function(double c1, double c2) {
    return {[=](double y, double x) { return (y - c1) * (y - c1) + (x - c2) * (x - c2); },
            [=](double y, double) { return 2.0 * (y - c1); },
            [=](double, double x) { return 2.0 * (x - c2); },
            [](double, double) { return 2.0; },
            [](double, double) { return 2.0; }};
}

double apply_generator_diffusion(const TestFunction& f, State s, const ModelParams& p) {
    require_diffusion(p, "apply_generator_diffusion");
    const double y = s.y;
    const double x = s.x;
    return (p.a() - p.b() * y) * f.d_y(y, x) + (p.m() - p.theta() * x) * f.d_x(y, x) +
           0.5 * y * (f.d_yy(y, x) + f.d_xx(y, x));
}

double jump_integral(const TestFunction& f, State s, double quad_tol, double alpha) {
    using boost::math::quadrature::gauss;
    if (!(quad_tol > 0.0)) throw ValidationError("quad_tol must be positive");
    const double c_alpha = stable_constant(alpha);
    const double y = s.y;
    const double x = s.x;
    // Each piece gets a share of the budget, relative to the C_alpha prefactor.
    const double piece_tol = 0.25 * quad_tol / c_alpha;

    // (0, 1]: f(y+z) - f(y) - z f_y(y) = z^2 int_0^1 (1 - u) f_yy(y + z u) du, so the
    // integrand is z^{1-alpha} times a smooth remainder. With z = w^{1/(2-alpha)} the
    // weight z^{1-alpha} dz becomes dw / (2 - alpha).
    const double k = 1.0 / (2.0 - alpha);
    auto remainder = [&](double z) {
        return gauss<double, 20>::integrate(
            [&](double u) { return (1.0 - u) * f.d_yy(y + z * u, x); }, 0.0, 1.0);
    };
    double err_small = 0.0;
    const double small = k * adaptive_gk([&](double w) { return remainder(std::pow(w, k)); },
                                         0.0, 1.0, 0.1 * piece_tol / k, err_small);
    err_small *= k;

    // (1, inf): the f(y) and z f_y(y) pieces integrate in closed form; for the remaining
    // f(y+z) z^{-1-alpha} dz, z = s^{-1/alpha} turns the measure into ds / alpha on (0, 1].
    double err_large = 0.0;
    const double large_raw =
        adaptive_gk(
            [&](double u) {
                if (u <= 0.0) return 0.0;
                return f.value(y + std::pow(u, -1.0 / alpha), x);
            },
            0.0, 1.0, 0.1 * piece_tol * alpha, err_large) /
        alpha;
    err_large /= alpha;
    const double large = large_raw - f.value(y, x) / alpha - f.d_y(y, x) / (alpha - 1.0);

    if (!std::isfinite(small) || !std::isfinite(large) || err_small > piece_tol ||
        err_large > piece_tol) {
        throw NumericalError("jump integral quadrature did not reach tolerance " +
                             std::to_string(quad_tol));
    }
    return c_alpha * (small + large);
}

double apply_generator_jump(const TestFunction& f, State s, double quad_tol, const ModelParams& p) {
    if (p.diffusion()) throw ValidationError("apply_generator_jump requires alpha in (1, 2)");
    const double y = s.y;
    const double x = s.x;
    const double local = (p.a() - p.b() * y) * f.d_y(y, x) + (p.m() - p.theta() * x) * f.d_x(y, x) +
                         0.5 * y * f.d_xx(y, x);
    if (y == 0.0) return local;
    return local + y * jump_integral(f, s, quad_tol / y, p.alpha());
}

double drift_offset(double c1, double c, const ModelParams& p) {
    const double k = 1.0 + p.a() + p.b() * c1 - c * c1;
    return -k * k / (c - 2.0 * p.b()) + c * c1 * c1 - 2.0 * p.a() * c1;
}

DriftReport lyapunov_drift_check(double c1, double c, std::span<const State> grid,
                                 const ModelParams& p) {
    require_diffusion(p, "lyapunov_drift_check");
    require_stationary(p, "lyapunov_drift_check");
    const double c_max = 2.0 * std::min(p.b(), p.theta());
    if (!(c > 0.0 && c < c_max)) {
        throw ValidationError("drift rate c must lie in (0, " + std::to_string(c_max) + ")");
    }
    DriftReport report;
    report.c1 = c1;
    report.c2 = p.m() / p.theta();
    report.c = c;
    report.d = drift_offset(c1, c, p);
    report.max_violation = -std::numeric_limits<double>::infinity();
    const TestFunction v = lyapunov_function(report.c1, report.c2);
    for (const State& s : grid) {
        const double lhs = apply_generator_diffusion(v, s, p) + c * v.value(s.y, s.x);
        report.max_violation = std::max(report.max_violation, lhs - report.d);
    }
    return report;
}

}  // namespace affine2f
