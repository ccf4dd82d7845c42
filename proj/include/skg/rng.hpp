#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace skg {

// Counter-based generator: SplitMix64 finalizer applied to a keyed Weyl
// sequence.  Same (seed, counter) gives the same stream on every platform.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed), counter_(0) {}

    std::uint64_t next_u64() {
        std::uint64_t z = seed_ + (++counter_) * 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform on (0, 1], so log() is always finite
    double next_uniform() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // standard circularly symmetric complex Gaussian, E|z|^2 = 1 (Box-Muller pair)
    std::complex<double> next_complex_gaussian() {
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        const double r = std::sqrt(-std::log(u1));
        const double phi = 2.0 * M_PI * u2;
        return {r * std::cos(phi), r * std::sin(phi)};
    }

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::uint64_t counter_;
};

}  // namespace skg
