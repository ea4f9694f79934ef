#pragma once

#include <span>
#include <vector>

#include "affine2f/model.hpp"
#include "affine2f/ode.hpp"

namespace affine2f {

/// Numerical solution of the generalized Riccati equation
///
///   dv/dt = -b v - v^alpha / alpha + exp(-2 theta t) lambda2^2 / 2,   v(0) = lambda1,
///
/// together with the running integral of v, sampled on `times`.
struct RiccatiCurve {
    LambdaPair lambda;
    std::vector<double> times;
    std::vector<double> values;     // v_t
    std::vector<double> integrals;  // int_0^t v_s ds
    Tolerance tol;
    ModelParams params;
};

/// Pieces of the log-transform -y0 v_t + i x0 e^{-theta t} lambda2 + g_t.
struct TransformExponent {
    double t = 0.0;
    double v_t = 0.0;
    double phase = 0.0;  // e^{-theta t} lambda2
    Complex g_t;
};

/// Solve on the integrator's own accepted steps over [0, t_end].
RiccatiCurve solve_v(LambdaPair lambda, double t_end, Tolerance tol, const ModelParams& p);

/// Solve and report the values exactly at `times` (nondecreasing, starting at 0).
RiccatiCurve solve_v(LambdaPair lambda, std::span<const double> times, Tolerance tol,
                     const ModelParams& p);

/// v_t for lambda2 = 0 at alpha = 2 (Bernoulli equation):
/// ((1/lambda1 + 1/(2b)) e^{bt} - 1/(2b))^{-1}.
double v_closed_form(double lambda1, double t, const ModelParams& p);

/// Solution u_t of the linear comparison equation du/dt = -b u + e^{-2 theta t} lambda2^2 / 2,
/// an upper bound for v_t.
double comparison_bound(LambdaPair lambda, double t, const ModelParams& p);

/// Constant M(lambda) of the envelope M (1 + t) max(e^{-2 theta t}, e^{-b t}).
double envelope_constant(LambdaPair lambda, const ModelParams& p);

/// M(lambda) (1 + t) max(e^{-2 theta t}, e^{-b t}).
double comparison_envelope(LambdaPair lambda, double t, const ModelParams& p);

TransformExponent transform_terms(LambdaPair lambda, double t, Tolerance tol,
                                  const ModelParams& p);

/// log E[exp(-lambda1 Y_t + i lambda2 X_t) | (Y_0, X_0) = start].
Complex transform_exponent(LambdaPair lambda, double t, State start, Tolerance tol,
                           const ModelParams& p);

/// Horizon T* beyond which a * int_T^inf envelope(s) ds <= tol.abs.
double stationary_truncation_time(LambdaPair lambda, Tolerance tol, const ModelParams& p);

/// log E[exp(-lambda1 Y_inf + i lambda2 X_inf)] = -a int_0^inf v_s ds + i (m/theta) lambda2.
Complex stationary_exponent(LambdaPair lambda, Tolerance tol, const ModelParams& p);

/// |v_t(v_s(lambda), e^{-theta s} lambda2) - v_{s+t}(lambda)|.
double flow_residual(LambdaPair lambda, double s, double t, Tolerance tol, const ModelParams& p);

}  // namespace affine2f
