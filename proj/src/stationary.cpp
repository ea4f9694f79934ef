#include "affine2f/stationary.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/special_functions/gamma.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "affine2f/errors.hpp"

namespace affine2f {

double GammaLaw::pdf(double y) const {
    if (y <= 0.0) return 0.0;
    return std::exp(shape * std::log(rate) + (shape - 1.0) * std::log(y) - rate * y -
                    std::lgamma(shape));
}

double GammaLaw::cdf(double y) const {
    if (y <= 0.0) return 0.0;
    return boost::math::gamma_p(shape, rate * y);
}

double GammaLaw::laplace(double lambda) const { return std::pow(1.0 + lambda / rate, -shape); }

double GammaLaw::raw_moment(int n) const {
    double r = 1.0;
    for (int j = 0; j < n; ++j) r *= (shape + j) / rate;
    return r;
}

double GammaLaw::sample(RngStream& rng) const { return rng.gamma(shape) / rate; }

GammaLaw y_stationary_law(const ModelParams& p) {
    require_diffusion(p, "y_stationary_law");
    require_stationary(p, "y_stationary_law");
    return {2.0 * p.a(), 2.0 * p.b()};
}

namespace {

double log_sum_exp(double a, double b) {
    if (a < b) std::swap(a, b);
    return a + std::log1p(std::exp(b - a));
}

// Hankel expansion of e^{-z} I_nu(z) sqrt(2 pi z); nullopt-like NaN when it has not
// converged before the terms start growing.
double scaled_hankel(double nu, double z, double tol) {
    const double mu = 4.0 * nu * nu;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 200; ++k) {
        const double odd = 2.0 * k - 1.0;
        const double next = -term * (mu - odd * odd) / (k * 8.0 * z);
        if (std::abs(next) > std::abs(term)) return std::nan("");
        term = next;
        sum += term;
        if (std::abs(term) <= tol * std::abs(sum)) return sum;
    }
    return std::nan("");
}

}  // namespace

double log_bessel_i(double nu, double z, double series_tol) {
    if (!(nu > -1.0)) throw ValidationError("Bessel order must exceed -1");
    if (!(z > 0.0)) throw ValidationError("Bessel argument must be positive");
    if (!(series_tol > 0.0)) throw ValidationError("series tolerance must be positive");

    if (z > 50.0 + 2.0 * nu * nu) {
        const double s = scaled_hankel(nu, z, std::max(series_tol, 1e-17));
        if (std::isfinite(s) && s > 0.0) {
            return z - 0.5 * std::log(2.0 * std::numbers::pi * z) + std::log(s);
        }
    }

    // sum_m (z/2)^{2m+nu} / (m! Gamma(m+nu+1)), accumulated in log space.
    const double quarter_sq = 0.25 * z * z;
    double log_term = nu * std::log(0.5 * z) - std::lgamma(nu + 1.0);
    double log_sum = log_term;
    const int max_terms = 1'000'000;
    for (int m = 0; m < max_terms; ++m) {
        const double ratio = quarter_sq / ((m + 1.0) * (m + nu + 1.0));
        log_term += std::log(ratio);
        log_sum = log_sum_exp(log_sum, log_term);
        if (ratio < 1.0 && std::exp(log_term - log_sum) < series_tol) return log_sum;
    }
    throw NumericalError("Bessel series did not converge for z = " + std::to_string(z));
}

double cir_transition_density(double y, double y0, double t, const ModelParams& p,
                              double series_tol) {
    require_diffusion(p, "cir_transition_density");
    if (!(y > 0.0)) throw ValidationError("density evaluated at y > 0 only");
    if (!(y0 >= 0.0)) throw ValidationError("y0 must be nonnegative");
    if (!(t > 0.0)) throw ValidationError("t must be positive");
    const double b = p.b();
    // c = 2b / (1 - e^{-bt}); Y_t c is noncentral chi-square / 2 in Cox's normalization.
    const double c = (b == 0.0) ? 2.0 / t : -2.0 * b / std::expm1(-b * t);
    const double q = 2.0 * p.a() - 1.0;
    const double v = c * y;
    if (y0 == 0.0) {
        return std::exp(std::log(c) + q * std::log(v) - v - std::lgamma(q + 1.0));
    }
    const double u = c * y0 * std::exp(-b * t);
    const double z = 2.0 * std::sqrt(u * v);
    const double log_f = std::log(c) - u - v + 0.5 * q * (std::log(v) - std::log(u)) +
                         log_bessel_i(q, z, series_tol);
    return std::exp(log_f);
}

MomentTable::MomentTable(int max_order, std::vector<double> entries)
    : max_order_(max_order), entries_(std::move(entries)) {
    if (max_order < 0 || entries_.size() != moment_count(max_order)) {
        throw ValidationError("moment table size does not match its order");
    }
}

double MomentTable::at(int n, int p) const {
    if (n < 0 || p < 0) return 0.0;
    if (n + p > max_order_) {
        throw ValidationError("moment order " + std::to_string(n + p) + " exceeds table order " +
                              std::to_string(max_order_));
    }
    return entries_[moment_index(n, p)];
}

MomentTable stationary_moment_table(int max_order, const ModelParams& params) {
    require_diffusion(params, "stationary_moment");
    require_stationary(params, "stationary_moment");
    if (max_order < 0) throw ValidationError("moment order must be nonnegative");
    std::vector<double> e(moment_count(max_order), 0.0);
    auto get = [&](int n, int p) { return (n < 0 || p < 0) ? 0.0 : e[moment_index(n, p)]; };
    e[0] = 1.0;
    const double a = params.a();
    const double b = params.b();
    const double m = params.m();
    const double theta = params.theta();
    for (int d = 1; d <= max_order; ++d) {
        for (int p = 0; p <= d; ++p) {
            const int n = d - p;
            const double rhs = (a * n + 0.5 * n * (n - 1)) * get(n - 1, p) + m * p * get(n, p - 1) +
                               0.5 * p * (p - 1) * get(n + 1, p - 2);
            e[moment_index(n, p)] = rhs / (b * n + p * theta);
        }
    }
    return MomentTable(max_order, std::move(e));
}

double stationary_moment(int n, int p, const ModelParams& params) {
    if (n < 0 || p < 0) throw ValidationError("moment exponents must be nonnegative");
    return stationary_moment_table(n + p, params).at(n, p);
}

MomentOdeSystem build_moment_ode(int order, const ModelParams& params) {
    require_diffusion(params, "build_moment_ode");
    if (order < 0) throw ValidationError("moment order must be nonnegative");
    const auto size = static_cast<Eigen::Index>(moment_count(order));
    MomentOdeSystem sys{order, Eigen::MatrixXd::Zero(size, size)};
    const double a = params.a();
    const double b = params.b();
    const double m = params.m();
    const double theta = params.theta();
    for (int d = 0; d <= order; ++d) {
        for (int p = 0; p <= d; ++p) {
            const int n = d - p;
            const auto row = static_cast<Eigen::Index>(moment_index(n, p));
            sys.matrix(row, row) = -(b * n + p * theta);
            if (n >= 1) {
                sys.matrix(row, static_cast<Eigen::Index>(moment_index(n - 1, p))) +=
                    a * n + 0.5 * n * (n - 1);
            }
            if (p >= 1) sys.matrix(row, static_cast<Eigen::Index>(moment_index(n, p - 1))) += m * p;
            if (p >= 2) {
                sys.matrix(row, static_cast<Eigen::Index>(moment_index(n + 1, p - 2))) +=
                    0.5 * p * (p - 1);
            }
        }
    }
    return sys;
}

Eigen::VectorXd MomentOdeSystem::stationary_vector() const {
    const Eigen::Index size = matrix.rows();
    Eigen::VectorXd f(size);
    f(0) = 1.0;
    if (size == 1) return f;
    const Eigen::Index k = size - 1;
    const Eigen::MatrixXd block = matrix.bottomRightCorner(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        if (block(i, i) == 0.0) {
            throw NumericalError("moment system is singular; stationary moments need b, theta > 0");
        }
    }
    f.tail(k) = block.triangularView<Eigen::Lower>().solve(-matrix.col(0).tail(k));
    return f;
}

Eigen::VectorXd initial_moments(State start, int order) {
    Eigen::VectorXd f(static_cast<Eigen::Index>(moment_count(order)));
    for (int d = 0; d <= order; ++d) {
        for (int p = 0; p <= d; ++p) {
            const int n = d - p;
            f(static_cast<Eigen::Index>(moment_index(n, p))) =
                std::pow(start.y, n) * std::pow(start.x, p);
        }
    }
    return f;
}

MomentTable transient_moments(double t, const Eigen::VectorXd& init, int order,
                              const ModelParams& p) {
    if (!(t >= 0.0)) throw ValidationError("t must be >= 0");
    const MomentOdeSystem sys = build_moment_ode(order, p);
    if (init.size() != sys.matrix.rows()) {
        throw ValidationError("initial moment vector has wrong length");
    }
    const Eigen::MatrixXd propagator = (sys.matrix * t).exp();
    const Eigen::VectorXd f = propagator * init;
    return MomentTable(order, std::vector<double>(f.data(), f.data() + f.size()));
}

}  // namespace affine2f
