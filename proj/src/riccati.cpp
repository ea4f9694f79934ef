#include "affine2f/riccati.hpp"

#include <algorithm>
#include <cmath>

#include "affine2f/errors.hpp"

namespace affine2f {

namespace {

using State2 = ode::Vec<2>;

// v^alpha on R_+, zero at the origin.
double power_alpha(double v, double alpha) {
    if (v <= 0.0) return 0.0;
    if (alpha == 2.0) return v * v;
    return std::exp(alpha * std::log(v));
}

struct RiccatiRhs {
    double b;
    double theta;
    double alpha;
    double half_l2sq;

    void operator()(double t, const State2& s, State2& ds) const {
        const double v = std::max(s[0], 0.0);
        ds[0] = -b * v - power_alpha(v, alpha) / alpha + half_l2sq * std::exp(-2.0 * theta * t);
        ds[1] = v;
    }
};

RiccatiRhs make_rhs(LambdaPair lambda, const ModelParams& p) {
    return {p.b(), p.theta(), p.alpha(), 0.5 * lambda.lambda2 * lambda.lambda2};
}

void clamp_nonnegative(State2& s) {
    if (s[0] < 0.0) s[0] = 0.0;
}

// -expm1(-d t) / d, continuous at d = 0.
double relaxation_factor(double d, double t) {
    if (d == 0.0) return t;
    return -std::expm1(-d * t) / d;
}

}  // namespace

RiccatiCurve solve_v(LambdaPair lambda, double t_end, Tolerance tol, const ModelParams& p) {
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ValidationError("t_end must be >= 0");
    RiccatiCurve curve{lambda, {0.0}, {lambda.lambda1}, {0.0}, tol, p};
    if (t_end == 0.0) return curve;
    const RiccatiRhs rhs = make_rhs(lambda, p);
    ode::DormandPrince<2> stepper(tol);
    State2 s{lambda.lambda1, 0.0};
    stepper.integrate(rhs, 0.0, t_end, s, clamp_nonnegative, [&](double t, const State2& y) {
        curve.times.push_back(t);
        curve.values.push_back(y[0]);
        curve.integrals.push_back(y[1]);
    });
    return curve;
}

RiccatiCurve solve_v(LambdaPair lambda, std::span<const double> times, Tolerance tol,
                     const ModelParams& p) {
    if (times.empty() || times.front() != 0.0) {
        throw ValidationError("time grid must start at 0");
    }
    RiccatiCurve curve{lambda, {}, {}, {}, tol, p};
    curve.times.reserve(times.size());
    curve.values.reserve(times.size());
    curve.integrals.reserve(times.size());
    const RiccatiRhs rhs = make_rhs(lambda, p);
    ode::DormandPrince<2> stepper(tol);
    State2 s{lambda.lambda1, 0.0};
    double t_prev = 0.0;
    for (double t : times) {
        if (!(t >= t_prev) || !std::isfinite(t)) {
            throw ValidationError("time grid must be nondecreasing and finite");
        }
        stepper.integrate(rhs, t_prev, t, s, clamp_nonnegative);
        curve.times.push_back(t);
        curve.values.push_back(s[0]);
        curve.integrals.push_back(s[1]);
        t_prev = t;
    }
    return curve;
}

double v_closed_form(double lambda1, double t, const ModelParams& p) {
    require_diffusion(p, "v_closed_form");
    if (lambda1 < 0.0) throw ValidationError("lambda1 must be nonnegative");
    if (lambda1 == 0.0) return 0.0;
    const double b = p.b();
    if (b == 0.0) return 1.0 / (1.0 / lambda1 + 0.5 * t);
    return 1.0 / ((1.0 / lambda1 + 0.5 / b) * std::exp(b * t) - 0.5 / b);
}

double comparison_bound(LambdaPair lambda, double t, const ModelParams& p) {
    require_stationary(p, "comparison_bound");
    const double decay = std::exp(-p.b() * t);
    const double delta = 2.0 * p.theta() - p.b();
    return lambda.lambda1 * decay +
           0.5 * lambda.lambda2 * lambda.lambda2 * decay * relaxation_factor(delta, t);
}

double envelope_constant(LambdaPair lambda, const ModelParams& p) {
    require_stationary(p, "envelope_constant");
    const double gap = std::abs(p.b() - 2.0 * p.theta());
    const double l2sq = lambda.lambda2 * lambda.lambda2;
    return gap == 0.0 ? lambda.lambda1 + 0.5 * l2sq : lambda.lambda1 + l2sq / (2.0 * gap);
}

double comparison_envelope(LambdaPair lambda, double t, const ModelParams& p) {
    const double rate = std::min(2.0 * p.theta(), p.b());
    return envelope_constant(lambda, p) * (1.0 + t) * std::exp(-rate * t);
}

TransformExponent transform_terms(LambdaPair lambda, double t, Tolerance tol,
                                  const ModelParams& p) {
    if (!(t >= 0.0)) throw ValidationError("t must be >= 0");
    const double times[] = {0.0, t};
    const RiccatiCurve curve = solve_v(lambda, times, tol, p);
    const double v = curve.values.back();
    const double integral = curve.integrals.back();
    // m lambda2 int_0^t e^{-theta s} ds
    const double drift = p.m() * lambda.lambda2 * relaxation_factor(p.theta(), t);
    TransformExponent out;
    out.t = t;
    out.v_t = v;
    out.phase = std::exp(-p.theta() * t) * lambda.lambda2;
    out.g_t = Complex(-p.a() * integral, drift);
    return out;
}

Complex transform_exponent(LambdaPair lambda, double t, State start, Tolerance tol,
                           const ModelParams& p) {
    const TransformExponent e = transform_terms(lambda, t, tol, p);
    return Complex(-start.y * e.v_t, start.x * e.phase) + e.g_t;
}

double stationary_truncation_time(LambdaPair lambda, Tolerance tol, const ModelParams& p) {
    require_stationary(p, "stationary_exponent");
    const double scale = p.a() * envelope_constant(lambda, p);
    if (scale == 0.0) return 0.0;
    const double c = std::min(2.0 * p.theta(), p.b());
    // a M int_T^inf (1 + s) e^{-c s} ds = a M e^{-c T} ((1 + T)/c + 1/c^2), decreasing in T.
    auto tail = [&](double T) { return scale * std::exp(-c * T) * ((1.0 + T) / c + 1.0 / (c * c)); };
    const double target = tol.abs;
    if (tail(0.0) <= target) return 0.0;
    double hi = 1.0 / c;
    while (tail(hi) > target) {
        hi *= 2.0;
        if (hi > 1e12) throw NumericalError("tail truncation horizon diverged");
    }
    double lo = 0.0;
    for (int i = 0; i < 200 && hi - lo > 1e-9 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (tail(mid) > target ? lo : hi) = mid;
    }
    return hi;
}

Complex stationary_exponent(LambdaPair lambda, Tolerance tol, const ModelParams& p) {
    require_stationary(p, "stationary_exponent");
    const double horizon = stationary_truncation_time(lambda, tol, p);
    const double times[] = {0.0, horizon};
    const RiccatiCurve curve = solve_v(lambda, times, tol, p);
    return Complex(-p.a() * curve.integrals.back(), p.m() / p.theta() * lambda.lambda2);
}

double flow_residual(LambdaPair lambda, double s, double t, Tolerance tol, const ModelParams& p) {
    if (!(s >= 0.0) || !(t >= 0.0)) throw ValidationError("s and t must be >= 0");
    const double first[] = {0.0, s};
    const double v_s = solve_v(lambda, first, tol, p).values.back();
    const LambdaPair shifted(v_s, std::exp(-p.theta() * s) * lambda.lambda2);
    const double second[] = {0.0, t};
    const double composed = solve_v(shifted, second, tol, p).values.back();
    const double direct_grid[] = {0.0, s + t};
    const double direct = solve_v(lambda, direct_grid, tol, p).values.back();
    return std::abs(composed - direct);
}

}  // namespace affine2f
