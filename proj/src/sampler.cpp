#include "affine2f/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <numbers>
#include <thread>

#include "affine2f/errors.hpp"

namespace affine2f {

PathGrid::PathGrid(double t_end, std::size_t n_steps) : t_end_(t_end), n_steps_(n_steps) {
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ValidationError("t_end must be positive");
}

double PathGrid::time(std::size_t k) const {
    if (k == n_steps_) return t_end_;
    return static_cast<double>(k) * dt();
}

std::string to_string(Scheme s) { return s == Scheme::exact ? "exact" : "euler"; }

Scheme scheme_from_string(const std::string& s) {
    if (s == "exact") return Scheme::exact;
    if (s == "euler") return Scheme::euler;
    throw ValidationError("unknown scheme '" + s + "' (expected exact or euler)");
}

std::span<const double> PathEnsemble::y_path(std::size_t k) const {
    return std::span<const double>(y).subspan(k * grid.n_points(), grid.n_points());
}

std::span<const double> PathEnsemble::x_path(std::size_t k) const {
    return std::span<const double>(x).subspan(k * grid.n_points(), grid.n_points());
}

double sample_stable_increment(RngStream& rng, double dt, double alpha) {
    if (!(dt > 0.0)) throw ValidationError("dt must be positive");
    if (!(alpha > 1.0 && alpha <= 2.0)) throw ValidationError("alpha must lie in (1, 2]");
    if (alpha == 2.0) return std::sqrt(dt) * rng.normal();

    // Chambers-Mallows-Stuck for beta = 1; the unit variate has characteristic function
    // exp(-|s|^alpha (1 - i sign(s) tan(pi alpha / 2))) and mean zero.
    const double half_pi_alpha = 0.5 * std::numbers::pi * alpha;
    const double tan_term = std::tan(half_pi_alpha);
    const double shift = std::atan(tan_term) / alpha;
    const double scale_unit = std::pow(1.0 + tan_term * tan_term, 0.5 / alpha);
    const double v = std::numbers::pi * (rng.uniform() - 0.5);
    const double w = rng.exponential();
    const double z = scale_unit * std::sin(alpha * (v + shift)) / std::pow(std::cos(v), 1.0 / alpha) *
                     std::pow(std::cos(v - alpha * (v + shift)) / w, (1.0 - alpha) / alpha);
    // sigma^alpha |sec(pi alpha / 2)| = dt / alpha gives Laplace exponent dt u^alpha / alpha.
    const double sigma = std::pow(dt * std::abs(std::cos(half_pi_alpha)) / alpha, 1.0 / alpha);
    return sigma * z;
}

namespace {

struct CirStep {
    double decay;     // e^{-b dt}
    double scale;     // (1 - e^{-b dt}) / (4b), dt/4 at b = 0
    double shape0;    // 2a = half the degrees of freedom
};

CirStep cir_step(double dt, const ModelParams& p) {
    const double b = p.b();
    const double scale = (b == 0.0) ? 0.25 * dt : -std::expm1(-b * dt) / (4.0 * b);
    return {std::exp(-b * dt), scale, 2.0 * p.a()};
}

double cir_transition(RngStream& rng, double y, const CirStep& step) {
    const double noncentrality = y * step.decay / step.scale;
    const std::uint64_t n = rng.poisson(0.5 * noncentrality);
    return 2.0 * step.scale * rng.gamma(step.shape0 + static_cast<double>(n));
}

void fill_y_exact(RngStream& rng, double y0, const PathGrid& grid, const ModelParams& p,
                  std::span<double> out) {
    out[0] = y0;
    if (grid.n_steps() == 0) return;
    const CirStep step = cir_step(grid.dt(), p);
    for (std::size_t k = 0; k < grid.n_steps(); ++k) out[k + 1] = cir_transition(rng, out[k], step);
}

template <class Noise>
void fill_y_euler(Noise&& noise, double y0, const PathGrid& grid, const ModelParams& p,
                  std::span<double> out) {
    out[0] = y0;
    const double dt = grid.dt();
    const double inv_alpha = 1.0 / p.alpha();
    for (std::size_t k = 0; k < grid.n_steps(); ++k) {
        const double y = out[k];
        const double root = y > 0.0 ? (p.alpha() == 2.0 ? std::sqrt(y) : std::pow(y, inv_alpha)) : 0.0;
        const double next = y + (p.a() - p.b() * y) * dt + root * noise(k);
        out[k + 1] = std::max(next, 0.0);
    }
}

void fill_x(RngStream& rng, double x0, std::span<const double> y_path, const PathGrid& grid,
            const ModelParams& p, std::span<double> out) {
    out[0] = x0;
    if (grid.n_steps() == 0) return;
    const double dt = grid.dt();
    const double theta = p.theta();
    const double decay = std::exp(-theta * dt);
    const double pull = theta == 0.0 ? dt : -std::expm1(-theta * dt) / theta;
    const double decay_sq = decay * decay;
    for (std::size_t k = 0; k < grid.n_steps(); ++k) {
        const double var = 0.5 * dt * (decay_sq * y_path[k] + y_path[k + 1]);
        const double z = rng.normal();
        out[k + 1] = decay * out[k] + p.m() * pull + std::sqrt(var) * z;
    }
}

void check_path_len(std::size_t len, const PathGrid& grid) {
    if (len != grid.n_points()) throw ValidationError("path length does not match grid");
}

double initial_y(RngStream& rng, const InitialCondition& init, const ModelParams& p) {
    if (const auto* s = std::get_if<State>(&init)) return s->y;
    return rng.gamma(2.0 * p.a()) / (2.0 * p.b());
}

double initial_x(const InitialCondition& init, const ModelParams& p) {
    if (const auto* s = std::get_if<State>(&init)) return s->x;
    return p.m() / p.theta();
}

void check_joint(const InitialCondition& init, Scheme scheme, const ModelParams& p) {
    if (scheme == Scheme::exact) require_diffusion(p, "exact scheme");
    if (std::holds_alternative<StationaryStart>(init)) {
        require_diffusion(p, "stationary start");
        require_stationary(p, "stationary start");
    }
}

void simulate_path(std::uint64_t master_seed, std::size_t k, const InitialCondition& init,
                   const PathGrid& grid, Scheme scheme, const ModelParams& p,
                   std::span<double> y_out, std::span<double> x_out) {
    RngStream rng(master_seed, k);
    const double y0 = initial_y(rng, init, p);
    if (scheme == Scheme::exact) {
        fill_y_exact(rng, y0, grid, p, y_out);
    } else {
        const double dt = grid.dt();
        fill_y_euler([&](std::size_t) { return sample_stable_increment(rng, dt, p.alpha()); }, y0,
                     grid, p, y_out);
    }
    fill_x(rng, initial_x(init, p), y_out, grid, p, x_out);
}

// Static partition of [0, n) over workers; fn(begin, end) per worker.
template <class Fn>
void parallel_blocks(std::size_t n, unsigned threads, Fn&& fn) {
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, n));
    if (workers == 1) {
        fn(std::size_t{0}, n);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        pool.emplace_back([&, w, begin, end] {
            try {
                if (begin < end) fn(begin, end);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace

std::vector<double> simulate_y_exact(RngStream& rng, double y0, const PathGrid& grid,
                                     const ModelParams& p) {
    require_diffusion(p, "simulate_y_exact");
    if (!(y0 >= 0.0)) throw ValidationError("y0 must be nonnegative");
    std::vector<double> out(grid.n_points());
    fill_y_exact(rng, y0, grid, p, out);
    return out;
}

std::vector<double> simulate_y_euler(RngStream& rng, double y0, const PathGrid& grid,
                                     const ModelParams& p) {
    if (!(y0 >= 0.0)) throw ValidationError("y0 must be nonnegative");
    std::vector<double> out(grid.n_points());
    const double dt = grid.dt();
    fill_y_euler([&](std::size_t) { return sample_stable_increment(rng, dt, p.alpha()); }, y0, grid,
                 p, out);
    return out;
}

std::vector<double> simulate_y_euler(std::span<const double> increments, double y0,
                                     const PathGrid& grid, const ModelParams& p) {
    if (!(y0 >= 0.0)) throw ValidationError("y0 must be nonnegative");
    if (increments.size() != grid.n_steps()) {
        throw ValidationError("need one noise increment per step");
    }
    std::vector<double> out(grid.n_points());
    fill_y_euler([&](std::size_t k) { return increments[k]; }, y0, grid, p, out);
    return out;
}

std::vector<double> simulate_x_given_y(RngStream& rng, double x0, std::span<const double> y_path,
                                       const PathGrid& grid, const ModelParams& p) {
    check_path_len(y_path.size(), grid);
    std::vector<double> out(grid.n_points());
    fill_x(rng, x0, y_path, grid, p, out);
    return out;
}

unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("AFFINE2F_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

PathEnsemble simulate_joint(std::uint64_t master_seed, const InitialCondition& initial,
                            const PathGrid& grid, std::size_t n_paths, Scheme scheme,
                            const ModelParams& p, unsigned threads) {
    check_joint(initial, scheme, p);
    PathEnsemble ens{grid, n_paths, {}, {}, p, scheme, master_seed};
    const std::size_t width = grid.n_points();
    ens.y.resize(n_paths * width);
    ens.x.resize(n_paths * width);
    parallel_blocks(n_paths, resolve_threads(threads), [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            simulate_path(master_seed, k, initial, grid, scheme, p,
                          std::span<double>(ens.y).subspan(k * width, width),
                          std::span<double>(ens.x).subspan(k * width, width));
        }
    });
    return ens;
}

TerminalSample simulate_terminal(std::uint64_t master_seed, const InitialCondition& initial,
                                 const PathGrid& grid, std::size_t n_paths, Scheme scheme,
                                 const ModelParams& p, unsigned threads) {
    check_joint(initial, scheme, p);
    TerminalSample out{std::vector<double>(n_paths), std::vector<double>(n_paths)};
    parallel_blocks(n_paths, resolve_threads(threads), [&](std::size_t begin, std::size_t end) {
        std::vector<double> y_buf(grid.n_points());
        std::vector<double> x_buf(grid.n_points());
        for (std::size_t k = begin; k < end; ++k) {
            simulate_path(master_seed, k, initial, grid, scheme, p, y_buf, x_buf);
            out.y[k] = y_buf.back();
            out.x[k] = x_buf.back();
        }
    });
    return out;
}

}  // namespace affine2f
