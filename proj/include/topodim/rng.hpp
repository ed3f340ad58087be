// Seedable random number generation with stable, documented streams.
//
// Every sampling API in this library takes an explicit 64-bit seed. The
// stream for a given seed is identical across platforms and runs:
// std::mt19937_64 is fully specified by the standard, and all value
// derivation below avoids implementation-defined distributions.
#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace topodim {

// SplitMix64 finalizer; good avalanche, used for seed derivation.
std::uint64_t mix64(std::uint64_t x);

// Derives an independent child seed from (seed, tag...). The chain is
// order-sensitive: derive_seed(s, a, b) != derive_seed(s, b, a) in general.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c);

// FNV-1a on the raw bytes; used to fold string labels into seed derivations.
std::uint64_t fnv1a64(std::string_view s);

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform in [0, 1), 53 significant bits.
    double uniform01();

    // Uniform integer in [0, bound), rejection-sampled so the result is
    // exactly uniform and independent of the platform. bound >= 1.
    std::uint64_t uniform_below(std::uint64_t bound);

    // Standard normal via Box-Muller (deterministic, no libm distribution).
    double gaussian();

private:
    std::mt19937_64 engine_;
    double cached_gaussian_ = 0.0;
    bool has_cached_gaussian_ = false;
};

} // namespace topodim
