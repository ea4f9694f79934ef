#pragma once

#include <functional>
#include <span>

#include "affine2f/model.hpp"

namespace affine2f {

/// Test function with analytic partial derivatives, all evaluated at (y, x).
struct TestFunction {
    using Fn = std::function<double(double, double)>;
    Fn value;
    Fn d_y;
    Fn d_x;
    Fn d_yy;
    Fn d_xx;
};

/// f(y, x) = y^n x^p.
TestFunction monomial(int n, int p);

/// f(y, x) = exp(-lambda y).
TestFunction exponential_y(double lambda);

/// V(y, x) = (y - c1)^2 + (x - c2)^2.
TestFunction lyapunov_function(double c1, double c2);

/// Generator of the diffusion case (alpha = 2):
/// (a - b y) f_y + (m - theta x) f_x + y (f_yy + f_xx) / 2.
double apply_generator_diffusion(const TestFunction& f, State s, const ModelParams& p);

/// Generator for alpha in (1, 2): drift terms, y f_xx / 2 and the compensated jump integral
///   y C_alpha int_0^inf (f(y+z, x) - f(y, x) - z f_y(y, x)) z^{-1-alpha} dz,
/// evaluated to absolute accuracy `quad_tol`. Throws NumericalError when the quadrature
/// cannot certify that accuracy.
double apply_generator_jump(const TestFunction& f, State s, double quad_tol, const ModelParams& p);

/// Jump integral alone, without the y multiplier.
double jump_integral(const TestFunction& f, State s, double quad_tol, double alpha);

struct DriftReport {
    double c1 = 0.0;
    double c2 = 0.0;
    double c = 0.0;
    double d = 0.0;
    double max_violation = 0.0;  // max over the grid of (A V) + c V - d

    bool satisfied() const { return max_violation <= 1e-12; }
};

/// Offset d such that A V <= -c V + d on R_+ x R, c2 = m / theta.
double drift_offset(double c1, double c, const ModelParams& p);

/// Foster-Lyapunov check for V with centre (c1, m/theta). Requires alpha = 2, b, theta > 0
/// and c in (0, 2 min(b, theta)).
DriftReport lyapunov_drift_check(double c1, double c, std::span<const State> grid,
                                 const ModelParams& p);

}  // namespace affine2f
