#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "affine2f/model.hpp"
#include "affine2f/sampler.hpp"

namespace affine2f {

/// Polynomial functional f(y, x) = y^n x^p.
struct PolySpec {
    int n = 0;
    int p = 0;

    double operator()(double y, double x) const;
    std::string label() const;
};

/// Trapezoidal (1/T) int_0^T Y_s^n X_s^p ds on a uniform grid.
double time_average(std::span<const double> y, std::span<const double> x, const PathGrid& grid,
                    PolySpec f);

struct ErgodicReport {
    PolySpec f;
    double horizon = 0.0;
    double dt = 0.0;
    std::size_t n_replicas = 0;
    double estimate = 0.0;   // mean of per-replica time averages
    double target = 0.0;     // E f(Y_inf, X_inf); NaN when exploratory
    double std_error = 0.0;  // across replicas
    bool exploratory = false;
    bool pass = false;
};

/// Birkhoff averages over n_replicas independent paths. At alpha = 2 paths start from
/// the stationary Y law and are compared with the exact stationary moment; for
/// alpha in (1, 2) the report is exploratory (Euler paths from (a/b, m/theta), no verdict).
ErgodicReport ergodic_report(const ModelParams& params, PolySpec f, double horizon, double dt,
                             std::size_t n_replicas, std::uint64_t master_seed,
                             unsigned threads = 0);

struct MixingCurve {
    PolySpec g;
    std::vector<double> times;
    std::vector<double> mc_mean;       // Monte Carlo E g(Y_t, X_t)
    std::vector<double> mc_std_error;
    std::vector<double> transient;     // moment-ODE E g(Y_t, X_t)
    std::vector<double> values;        // |mc_mean - target|
    double target = 0.0;
    double max_gap = 0.0;              // max_t |mc_mean - transient|
    double fitted_rate = 0.0;          // log-linear fit on |transient - target|
    double fit_residual = 0.0;         // RMS residual of that fit in log space
};

/// Fit log|values| ~ c - rate t by least squares over points with positive values.
/// Returns {rate, rms residual}.
std::pair<double, double> fit_decay_rate(std::span<const double> times,
                                         std::span<const double> values);

/// Relaxation of E g(Y_t, X_t) toward its stationary value from a deterministic start,
/// estimated by Monte Carlo and independently by the moment ODE. `substeps` refines the
/// simulation grid between output times.
MixingCurve mixing_decay(const ModelParams& params, PolySpec g, const PathGrid& times,
                         std::size_t n_paths, State init, std::uint64_t master_seed,
                         std::size_t substeps = 10, unsigned threads = 0);

}  // namespace affine2f
