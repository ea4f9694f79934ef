#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "affine2f/model.hpp"
#include "affine2f/rng.hpp"

namespace affine2f {

/// Gamma(shape, rate) law with density rate^shape y^{shape-1} e^{-rate y} / Gamma(shape).
struct GammaLaw {
    double shape = 1.0;
    double rate = 1.0;

    double mean() const { return shape / rate; }
    double pdf(double y) const;
    double cdf(double y) const;
    /// E exp(-lambda Y) = (1 + lambda / rate)^{-shape}.
    double laplace(double lambda) const;
    /// E Y^n = prod_{j<n} (shape + j) / rate.
    double raw_moment(int n) const;
    double sample(RngStream& rng) const;
};

/// Law of Y_inf: Gamma(2a, 2b). Requires alpha = 2, b > 0 and theta > 0.
GammaLaw y_stationary_law(const ModelParams& p);

/// log I_nu(z) for nu > -1, z > 0: ascending series with term-ratio stopping, scaled
/// Hankel expansion for large z.
double log_bessel_i(double nu, double z, double series_tol = 1e-16);

/// Density of Y_t at y given Y_0 = y0 (alpha = 2): noncentral chi-square with 4a degrees
/// of freedom, scale (1 - e^{-bt}) / (4b) and noncentrality 4b e^{-bt} y0 / (1 - e^{-bt}).
double cir_transition_density(double y, double y0, double t, const ModelParams& p,
                              double series_tol = 1e-16);

/// Flat index of (n, p) in the order f00, f10, f01, f20, f11, f02, ...:
/// total degree first, then decreasing n.
constexpr std::size_t moment_index(int n, int p) {
    const auto d = static_cast<std::size_t>(n + p);
    return d * (d + 1) / 2 + static_cast<std::size_t>(p);
}

constexpr std::size_t moment_count(int max_order) {
    return moment_index(0, max_order) + 1;
}

/// Mixed moments E(Y^n X^p) for n + p <= max_order.
class MomentTable {
public:
    MomentTable(int max_order, std::vector<double> entries);

    int max_order() const { return max_order_; }
    double at(int n, int p) const;
    const std::vector<double>& entries() const { return entries_; }

private:
    int max_order_;
    std::vector<double> entries_;
};

/// Stationary moments from the recursion
///   E(Y^n X^p) = [(a n + n(n-1)/2) E(Y^{n-1} X^p) + m p E(Y^n X^{p-1})
///                 + p(p-1)/2 E(Y^{n+1} X^{p-2})] / (b n + p theta).
MomentTable stationary_moment_table(int max_order, const ModelParams& p);

double stationary_moment(int n, int p, const ModelParams& params);

/// Linear system f' = A f for f_{n,p}(t) = E(Y_t^n X_t^p), n + p <= order.
struct MomentOdeSystem {
    int order = 0;
    Eigen::MatrixXd matrix;

    /// Kernel direction of the matrix normalized to f00 = 1.
    Eigen::VectorXd stationary_vector() const;
};

MomentOdeSystem build_moment_ode(int order, const ModelParams& p);

/// y0^n x0^p for n + p <= order.
Eigen::VectorXd initial_moments(State start, int order);

/// f_{n,p}(t) = (exp(A t) f(0))_{n,p}.
MomentTable transient_moments(double t, const Eigen::VectorXd& init, int order,
                              const ModelParams& p);

}  // namespace affine2f
