#pragma once

#include <cstdint>
#include <random>

namespace pfscale {

/// Seeded generator with library-independent draws, so generated networks
/// and matrices are byte-identical across standard library implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer on [0, bound), bound > 0. Rejection removes modulo bias.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t r = engine_();
        while (r >= limit) {
            r = engine_();
        }
        return r % bound;
    }

  private:
    std::mt19937_64 engine_;
};

}  // namespace pfscale
