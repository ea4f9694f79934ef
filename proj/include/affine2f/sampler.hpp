#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "affine2f/model.hpp"
#include "affine2f/rng.hpp"

namespace affine2f {

/// Uniform grid 0 = t_0 < ... < t_n = t_end.
class PathGrid {
public:
    PathGrid(double t_end, std::size_t n_steps);

    double t_end() const { return t_end_; }
    std::size_t n_steps() const { return n_steps_; }
    std::size_t n_points() const { return n_steps_ + 1; }
    double dt() const { return n_steps_ == 0 ? 0.0 : t_end_ / static_cast<double>(n_steps_); }
    double time(std::size_t k) const;

private:
    double t_end_;
    std::size_t n_steps_;
};

enum class Scheme { exact, euler };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

/// Start with Y_0 ~ Gamma(2a, 2b) and X_0 = m / theta (alpha = 2 only).
struct StationaryStart {};

using InitialCondition = std::variant<State, StationaryStart>;

struct PathEnsemble {
    PathGrid grid;
    std::size_t n_paths = 0;
    std::vector<double> y;  // row-major, n_paths x grid.n_points()
    std::vector<double> x;
    ModelParams params;
    Scheme scheme = Scheme::exact;
    std::uint64_t master_seed = 0;

    std::span<const double> y_path(std::size_t k) const;
    std::span<const double> x_path(std::size_t k) const;
};

/// Terminal states only, for large ensembles where full paths do not fit in memory.
struct TerminalSample {
    std::vector<double> y;
    std::vector<double> x;
};

/// Increment of the driving noise over dt: N(0, dt) for alpha = 2, otherwise a
/// spectrally positive, zero-mean stable variate with E exp(-u L_dt) = exp(dt u^alpha / alpha).
double sample_stable_increment(RngStream& rng, double dt, double alpha);

/// Exact CIR transitions (alpha = 2) via the Poisson-mixed Gamma form of the noncentral
/// chi-square law with 4a degrees of freedom.
std::vector<double> simulate_y_exact(RngStream& rng, double y0, const PathGrid& grid,
                                     const ModelParams& p);

/// Truncated Euler scheme Y+ = max(0, Y + (a - bY) dt + max(Y, 0)^{1/alpha} dL).
std::vector<double> simulate_y_euler(RngStream& rng, double y0, const PathGrid& grid,
                                     const ModelParams& p);

/// Euler recursion with caller-supplied noise increments (one per step).
std::vector<double> simulate_y_euler(std::span<const double> increments, double y0,
                                     const PathGrid& grid, const ModelParams& p);

/// X given a Y path on the same grid: exact OU mean, Gaussian step with trapezoidal
/// conditional variance.
std::vector<double> simulate_x_given_y(RngStream& rng, double x0, std::span<const double> y_path,
                                       const PathGrid& grid, const ModelParams& p);

/// Number of workers for ensemble generation: `requested` if positive, else the
/// AFFINE2F_THREADS environment variable, else hardware concurrency.
unsigned resolve_threads(unsigned requested);

PathEnsemble simulate_joint(std::uint64_t master_seed, const InitialCondition& initial,
                            const PathGrid& grid, std::size_t n_paths, Scheme scheme,
                            const ModelParams& p, unsigned threads = 0);

TerminalSample simulate_terminal(std::uint64_t master_seed, const InitialCondition& initial,
                                 const PathGrid& grid, std::size_t n_paths, Scheme scheme,
                                 const ModelParams& p, unsigned threads = 0);

}  // namespace affine2f
