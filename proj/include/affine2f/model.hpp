#pragma once

#include <complex>

namespace affine2f {

using Complex = std::complex<double>;

/// Validated parameter set of the two-factor model
///
///   dY = (a - bY) dt + Y^{1/alpha} dL,    dX = (m - theta X) dt + sqrt(Y) dB,
///
/// where L is spectrally positive alpha-stable (Brownian motion when alpha = 2).
/// Construct only through validate_params(); the fields are read-only afterwards.
class ModelParams {
public:
    double a() const { return a_; }
    double b() const { return b_; }
    double m() const { return m_; }
    double theta() const { return theta_; }
    double alpha() const { return alpha_; }

    /// b > 0 and theta > 0: a unique stationary law exists.
    bool stationary() const { return stationary_; }
    bool diffusion() const { return alpha_ == 2.0; }

    friend bool operator==(const ModelParams&, const ModelParams&) = default;

private:
    friend ModelParams validate_params(double, double, double, double, double);
    ModelParams(double a, double b, double m, double theta, double alpha)
        : a_(a), b_(b), m_(m), theta_(theta), alpha_(alpha), stationary_(b > 0.0 && theta > 0.0) {}

    double a_;
    double b_;
    double m_;
    double theta_;
    double alpha_;
    bool stationary_;
};

/// Throws ValidationError for a <= 0, alpha outside (1, 2], or non-finite input.
ModelParams validate_params(double a, double b, double m, double theta, double alpha);

inline ModelParams validate_params(const ModelParams& p) {
    return validate_params(p.a(), p.b(), p.m(), p.theta(), p.alpha());
}

/// Transform argument: lambda1 >= 0 multiplies -Y, lambda2 multiplies iX.
struct LambdaPair {
    double lambda1 = 0.0;
    double lambda2 = 0.0;

    LambdaPair() = default;
    LambdaPair(double l1, double l2);
};

/// Point of the state space R_+ x R.
struct State {
    double y = 0.0;
    double x = 0.0;

    State() = default;
    State(double y_, double x_);
};

/// Levy-measure constant C_alpha = 1 / (alpha Gamma(-alpha)) for alpha in (1, 2).
double stable_constant(double alpha);

/// Immigration part F(u) = a u1 + m u2.
Complex func_F(Complex u1, Complex u2, const ModelParams& p);

/// Branching part R(u) = -b u1 + (-u1)^alpha / alpha + u2^2 / 2, principal branch.
Complex func_R(Complex u1, Complex u2, const ModelParams& p);

/// Require the stationarity flag; throws ValidationError naming `what` otherwise.
void require_stationary(const ModelParams& p, const char* what);

/// Require alpha = 2; throws ValidationError naming `what` otherwise.
void require_diffusion(const ModelParams& p, const char* what);

}  // namespace affine2f
