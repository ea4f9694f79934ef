#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "affine2f/errors.hpp"

namespace affine2f {

/// Mixed error control: a step is accepted when every component error is
/// below abs + rel * |y|.
struct Tolerance {
    double abs = 1e-10;
    double rel = 1e-8;
};

namespace ode {

template <std::size_t N>
using Vec = std::array<double, N>;

/// Dormand-Prince 5(4) embedded pair with FSAL. The stepper keeps its last
/// step size so that consecutive integrate() calls over a grid continue
/// smoothly.
template <std::size_t N>
class DormandPrince {
public:
    explicit DormandPrince(Tolerance tol, std::size_t max_steps = 10'000'000)
        : tol_(tol), max_steps_(max_steps) {
        if (!(tol.abs > 0.0) || !(tol.rel >= 0.0)) {
            throw ValidationError("tolerance must be positive");
        }
    }

    std::size_t steps_taken() const { return steps_; }

    /// Advance y from t0 to t1 (t1 >= t0). `project` is applied to every
    /// accepted state; `observe(t, y)` is called after every accepted step.
    template <class Rhs, class Project, class Observe>
    void integrate(Rhs&& rhs, double t0, double t1, Vec<N>& y, Project&& project,
                   Observe&& observe) {
        if (t1 < t0) throw ValidationError("integration interval must be forward in time");
        if (t1 == t0) return;
        double t = t0;
        if (h_ <= 0.0) h_ = initial_step(rhs, t0, y, t1 - t0);
        have_k1_ = false;
        while (t < t1) {
            if (++steps_ > max_steps_) throw NumericalError("ODE step budget exhausted");
            double h = std::min(h_, t1 - t);
            const bool last = (h == t1 - t);
            const double h_floor = 64.0 * std::numeric_limits<double>::epsilon() *
                                   std::max(1.0, std::abs(t));
            if (h < h_floor && !last) {
                throw NumericalError("ODE step size underflow at t = " + std::to_string(t));
            }
            Vec<N> y_new;
            Vec<N> k7;
            const double err = attempt(rhs, t, h, y, y_new, k7);
            if (!std::isfinite(err)) {
                h_ = 0.25 * h;
                have_k1_ = false;
                continue;
            }
            if (err <= 1.0) {
                t = last ? t1 : t + h;
                y = y_new;
                project(y);
                k1_ = k7;
                have_k1_ = true;
                // project() may have moved y; restart FSAL in that case.
                if (y != y_new) have_k1_ = false;
                observe(t, y);
                const double grow = err == 0.0 ? 5.0 : std::min(5.0, 0.9 * std::pow(err, -0.2));
                // Keep the unclipped step when the final step was shortened to land on t1.
                if (!last || h == h_) h_ = h * grow;
            } else {
                h_ = h * std::max(0.2, 0.9 * std::pow(err, -0.2));
                if (h_ < h_floor) {
                    throw NumericalError("ODE step size underflow at t = " + std::to_string(t));
                }
            }
        }
    }

    template <class Rhs, class Project>
    void integrate(Rhs&& rhs, double t0, double t1, Vec<N>& y, Project&& project) {
        integrate(rhs, t0, t1, y, project, [](double, const Vec<N>&) {});
    }

private:
    template <class Rhs>
    double initial_step(Rhs& rhs, double t0, const Vec<N>& y, double span) {
        Vec<N> f0;
        rhs(t0, y, f0);
        double d0 = 0.0;
        double d1 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sc = tol_.abs + tol_.rel * std::abs(y[i]);
            d0 = std::max(d0, std::abs(y[i]) / sc);
            d1 = std::max(d1, std::abs(f0[i]) / sc);
        }
        double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        return std::min(h, span);
    }

    template <class Rhs>
    double attempt(Rhs& rhs, double t, double h, const Vec<N>& y, Vec<N>& y_new, Vec<N>& k7) {
        constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
        constexpr double a21 = 1.0 / 5;
        constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                         a54 = -212.0 / 729;
        constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                         a64 = 49.0 / 176, a65 = -5103.0 / 18656;
        constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                         b5 = -2187.0 / 6784, b6 = 11.0 / 84;
        // Fifth minus fourth order weights.
        constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                         e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

        Vec<N> k1, k2, k3, k4, k5, k6, tmp;
        if (have_k1_) {
            k1 = k1_;
        } else {
            rhs(t, y, k1);
        }
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * a21 * k1[i];
        rhs(t + c2 * h, tmp, k2);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        rhs(t + c3 * h, tmp, k3);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        rhs(t + c4 * h, tmp, k4);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        rhs(t + c5 * h, tmp, k5);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                                 a65 * k5[i]);
        rhs(t + h, tmp, k6);
        for (std::size_t i = 0; i < N; ++i)
            y_new[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        rhs(t + h, y_new, k7);

        double err = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                  e6 * k6[i] + e7 * k7[i]);
            const double sc = tol_.abs + tol_.rel * std::max(std::abs(y[i]), std::abs(y_new[i]));
            err = std::max(err, std::abs(e) / sc);
        }
        return err;
    }

    Tolerance tol_;
    std::size_t max_steps_;
    std::size_t steps_ = 0;
    double h_ = 0.0;
    Vec<N> k1_{};
    bool have_k1_ = false;
};

}  // namespace ode
}  // namespace affine2f
