#pragma once

#include <cstdint>

namespace trendcast {

// Counter-based RNG: SplitMix64 finalizer applied to (seed + k * golden gamma).
// Stateless per draw, so streams are splittable and bit-identical across
// platforms. Test vectors live in tests/test_synth.cpp.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    // k-th raw 64-bit value of this stream.
    std::uint64_t bits(std::uint64_t k) const;

    // Uniform double in (0, 1), strictly excluding the endpoints.
    double uniform(std::uint64_t k) const;

    // Standard normal via inverse-CDF (deterministic, no rejection).
    double normal(std::uint64_t k) const;

    // Derive an independent child stream, e.g. one per generated series.
    CounterRng child(std::uint64_t index) const;

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
};

// Inverse of the standard normal CDF. Acklam's rational approximation
// polished with one Halley step; accurate to ~1e-15 over (0, 1).
double inverse_normal_cdf(double p);

}  // namespace trendcast
