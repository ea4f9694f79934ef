#include "affine2f/model.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "affine2f/errors.hpp"

namespace affine2f {

ModelParams validate_params(double a, double b, double m, double theta, double alpha) {
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(m) || !std::isfinite(theta) ||
        !std::isfinite(alpha)) {
        throw ValidationError("parameters must be finite");
    }
    if (a <= 0.0) throw ValidationError("a must be positive");
    if (!(alpha > 1.0 && alpha <= 2.0)) throw ValidationError("alpha must lie in (1, 2]");
    return ModelParams(a, b, m, theta, alpha);
}

LambdaPair::LambdaPair(double l1, double l2) : lambda1(l1), lambda2(l2) {
    if (!std::isfinite(l1) || !std::isfinite(l2)) throw ValidationError("lambda must be finite");
    if (l1 < 0.0) throw ValidationError("lambda1 must be nonnegative");
}

State::State(double y_, double x_) : y(y_), x(x_) {
    if (!std::isfinite(y_) || !std::isfinite(x_)) throw ValidationError("state must be finite");
    if (y_ < 0.0) throw ValidationError("y must be nonnegative");
}

double stable_constant(double alpha) {
    if (!(alpha > 1.0 && alpha < 2.0)) {
        throw ValidationError("stable constant defined for alpha in (1, 2) only");
    }
    // Reflection: Gamma(-alpha) = -pi / (sin(pi alpha) Gamma(1 + alpha)), so
    // 1 / (alpha Gamma(-alpha)) = -sin(pi alpha) Gamma(alpha) / pi.
    return -std::sin(std::numbers::pi * alpha) * std::tgamma(alpha) / std::numbers::pi;
}

Complex func_F(Complex u1, Complex u2, const ModelParams& p) {
    return p.a() * u1 + p.m() * u2;
}

Complex func_R(Complex u1, Complex u2, const ModelParams& p) {
    const Complex w = -u1;
    Complex w_pow = 0.0;
    if (w != 0.0) w_pow = (p.alpha() == 2.0) ? w * w : std::pow(w, p.alpha());
    return -p.b() * u1 + w_pow / p.alpha() + u2 * u2 / 2.0;
}

void require_stationary(const ModelParams& p, const char* what) {
    if (!p.stationary()) {
        throw ValidationError(std::string(what) + " requires b > 0 and theta > 0");
    }
}

void require_diffusion(const ModelParams& p, const char* what) {
    if (!p.diffusion()) throw ValidationError(std::string(what) + " requires alpha = 2");
}

}  // namespace affine2f
