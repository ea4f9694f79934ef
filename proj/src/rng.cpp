#include "affine2f/rng.hpp"

#include <array>
#include <cmath>

#include "affine2f/errors.hpp"

namespace affine2f {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

std::seed_seq derive_seed(std::uint64_t master_seed, std::uint64_t stream_id) {
    std::uint64_t state = master_seed;
    std::uint64_t mixed = splitmix64(state);
    state = mixed ^ (stream_id * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL);
    std::array<std::uint32_t, 8> words{};
    for (std::size_t i = 0; i < words.size(); i += 2) {
        const std::uint64_t w = splitmix64(state);
        words[i] = static_cast<std::uint32_t>(w);
        words[i + 1] = static_cast<std::uint32_t>(w >> 32);
    }
    return std::seed_seq(words.begin(), words.end());
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
    : master_seed_(master_seed), stream_id_(stream_id) {
    std::seed_seq seq = derive_seed(master_seed, stream_id);
    engine_.seed(seq);
}

double RngStream::uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() { return normal_(engine_); }

double RngStream::exponential() { return -std::log(uniform()); }

double RngStream::gamma(double shape) {
    if (!(shape > 0.0)) throw ValidationError("gamma shape must be positive");
    std::gamma_distribution<double> dist(shape, 1.0);
    return dist(engine_);
}

std::uint64_t RngStream::poisson(double mean) {
    if (!(mean >= 0.0)) throw ValidationError("poisson mean must be nonnegative");
    if (mean == 0.0) return 0;
    std::poisson_distribution<std::uint64_t> dist(mean);
    return dist(engine_);
}

}  // namespace affine2f
