#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace affine2f {

/// SplitMix64 finalizer (Steele, Lea and Flood). Used only for seed derivation.
std::uint64_t splitmix64(std::uint64_t& state);

/// Per-path random stream. The engine seed is a function of (master_seed, stream_id)
/// alone, so an ensemble does not depend on which thread produced which path.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

    std::uint64_t master_seed() const { return master_seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    /// Uniform on the open interval (0, 1).
    double uniform();
    double normal();
    double exponential();
    /// Gamma with the given shape and unit scale.
    double gamma(double shape);
    std::uint64_t poisson(double mean);

private:
    std::uint64_t master_seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace affine2f
