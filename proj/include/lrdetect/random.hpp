#pragma once

#include <cstdint>
#include <random>

namespace lrdetect {

/// SplitMix64 finalizer (Steele, Lea & Flood 2014). Used for seed mixing only.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed of the `stream`-th independent substream of `base`:
///   splitmix64(base + (stream + 1) * 0x9E3779B97F4A7C15).
/// Every per-path, per-purpose seed in the library is derived this way.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept;

/// Deterministic random source.
///
/// Bits come from std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Uniforms take the top 53 bits; normals use the Marsaglia polar
/// method (cached pair). No std:: distribution is used, so a given seed yields
/// the same numbers on every conforming standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1).
    double uniform();

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal();

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace lrdetect
