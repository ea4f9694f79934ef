#include "affine2f/ergodicity.hpp"

#include <cmath>
#include <limits>

#include "affine2f/errors.hpp"
#include "affine2f/stationary.hpp"

namespace affine2f {

namespace {

double ipow(double base, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

void check_spec(PolySpec f) {
    if (f.n < 0 || f.p < 0) throw ValidationError("polynomial exponents must be nonnegative");
}

}  // namespace

double PolySpec::operator()(double y, double x) const { return ipow(y, n) * ipow(x, p); }

std::string PolySpec::label() const {
    return "y^" + std::to_string(n) + " x^" + std::to_string(p);
}

double time_average(std::span<const double> y, std::span<const double> x, const PathGrid& grid,
                    PolySpec f) {
    check_spec(f);
    if (y.size() != grid.n_points() || x.size() != grid.n_points()) {
        throw ValidationError("path length does not match grid");
    }
    if (grid.n_steps() == 0) return f(y[0], x[0]);
    double sum = 0.5 * (f(y.front(), x.front()) + f(y.back(), x.back()));
    for (std::size_t k = 1; k + 1 < y.size(); ++k) sum += f(y[k], x[k]);
    return sum / static_cast<double>(grid.n_steps());
}

ErgodicReport ergodic_report(const ModelParams& params, PolySpec f, double horizon, double dt,
                             std::size_t n_replicas, std::uint64_t master_seed, unsigned threads) {
    check_spec(f);
    require_stationary(params, "ergodic_report");
    if (!(horizon > 0.0) || !(dt > 0.0) || dt > horizon) {
        throw ValidationError("need 0 < dt <= T");
    }
    if (n_replicas < 2) throw ValidationError("need at least two replicas");
    const auto n_steps = static_cast<std::size_t>(std::llround(horizon / dt));
    const PathGrid grid(horizon, n_steps);

    ErgodicReport rep;
    rep.f = f;
    rep.horizon = horizon;
    rep.dt = grid.dt();
    rep.n_replicas = n_replicas;
    rep.exploratory = !params.diffusion();

    const PathEnsemble ens =
        rep.exploratory
            ? simulate_joint(master_seed, State(params.a() / params.b(), params.m() / params.theta()),
                             grid, n_replicas, Scheme::euler, params, threads)
            : simulate_joint(master_seed, StationaryStart{}, grid, n_replicas, Scheme::exact, params,
                             threads);

    std::vector<double> averages(n_replicas);
    for (std::size_t k = 0; k < n_replicas; ++k) {
        averages[k] = time_average(ens.y_path(k), ens.x_path(k), grid, f);
    }
    double mean = 0.0;
    for (double v : averages) mean += v;
    mean /= static_cast<double>(n_replicas);
    double ss = 0.0;
    for (double v : averages) ss += (v - mean) * (v - mean);
    rep.estimate = mean;
    rep.std_error = std::sqrt(ss / static_cast<double>(n_replicas - 1) /
                              static_cast<double>(n_replicas));
    if (rep.exploratory) {
        rep.target = std::numeric_limits<double>::quiet_NaN();
        rep.pass = false;
    } else {
        rep.target = stationary_moment(f.n, f.p, params);
        rep.pass = std::abs(rep.estimate - rep.target) <= 3.0 * rep.std_error;
    }
    return rep;
}

std::pair<double, double> fit_decay_rate(std::span<const double> times,
                                         std::span<const double> values) {
    if (times.size() != values.size()) throw ValidationError("times and values differ in length");
    std::vector<double> ts;
    std::vector<double> ls;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (values[i] > std::numeric_limits<double>::min()) {
            ts.push_back(times[i]);
            ls.push_back(std::log(values[i]));
        }
    }
    if (ts.size() < 2) throw NumericalError("fewer than two positive points to fit a decay rate");
    const auto n = static_cast<double>(ts.size());
    double st = 0.0, sl = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        st += ts[i];
        sl += ls[i];
    }
    const double tbar = st / n;
    const double lbar = sl / n;
    double stt = 0.0, stl = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        stt += (ts[i] - tbar) * (ts[i] - tbar);
        stl += (ts[i] - tbar) * (ls[i] - lbar);
    }
    if (stt == 0.0) throw NumericalError("degenerate time grid for decay fit");
    const double slope = stl / stt;
    double rss = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double r = ls[i] - (lbar + slope * (ts[i] - tbar));
        rss += r * r;
    }
    return {-slope, std::sqrt(rss / n)};
}

MixingCurve mixing_decay(const ModelParams& params, PolySpec g, const PathGrid& times,
                         std::size_t n_paths, State init, std::uint64_t master_seed,
                         std::size_t substeps, unsigned threads) {
    check_spec(g);
    require_diffusion(params, "mixing_decay");
    require_stationary(params, "mixing_decay");
    if (g.n + g.p > 4) throw ValidationError("mixing functional must have degree <= 4");
    if (substeps == 0) throw ValidationError("substeps must be positive");
    if (n_paths < 2) throw ValidationError("need at least two paths");

    const int order = g.n + g.p;
    MixingCurve curve;
    curve.g = g;
    curve.target = stationary_moment(g.n, g.p, params);

    const Eigen::VectorXd init_moments = initial_moments(init, order);
    for (std::size_t k = 0; k < times.n_points(); ++k) {
        const double t = times.time(k);
        curve.times.push_back(t);
        curve.transient.push_back(transient_moments(t, init_moments, order, params).at(g.n, g.p));
    }

    const PathGrid fine(times.t_end(), times.n_steps() * substeps);
    const PathEnsemble ens =
        simulate_joint(master_seed, init, fine, n_paths, Scheme::exact, params, threads);
    for (std::size_t k = 0; k < times.n_points(); ++k) {
        const std::size_t col = k * substeps;
        double sum = 0.0, sum_sq = 0.0;
        for (std::size_t i = 0; i < n_paths; ++i) {
            const double v = g(ens.y_path(i)[col], ens.x_path(i)[col]);
            sum += v;
            sum_sq += v * v;
        }
        const auto n = static_cast<double>(n_paths);
        const double mean = sum / n;
        const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
        curve.mc_mean.push_back(mean);
        curve.mc_std_error.push_back(std::sqrt(var / n));
        curve.values.push_back(std::abs(mean - curve.target));
        curve.max_gap = std::max(curve.max_gap, std::abs(mean - curve.transient[k]));
    }

    std::vector<double> distance(curve.transient.size());
    for (std::size_t k = 0; k < distance.size(); ++k) {
        distance[k] = std::abs(curve.transient[k] - curve.target);
    }
    const auto [rate, residual] = fit_decay_rate(curve.times, distance);
    curve.fitted_rate = rate;
    curve.fit_residual = residual;
    return curve;
}

}  // namespace affine2f
