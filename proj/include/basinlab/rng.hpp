#pragma once

#include <cmath>
#include <cstdint>

namespace basinlab {

/**
 * RngStream — deterministic, splittable randomness for trial workers.
 *
 * A stream's identity is (master seed, substream index); its output is a
 * pure function of that identity, so an ensemble's tally never depends on
 * worker count or scheduling order. The generator is the splitmix64
 * sequence; substream states are derived with the same 64-bit finalizer
 * applied to the seed XORed with an index-derived constant.
 *
 * Not cryptographic. Each stream is owned by exactly one worker at a time.
 */
class RngStream {
public:
    static RngStream derive(std::uint64_t master_seed, std::uint64_t index) {
        return RngStream(mix(master_seed ^ mix((index + 1) * kGolden)));
    }

    /// Collapse (seed, index) to a new 64-bit seed; used to give sweep
    /// cells independent trial-stream families.
    static std::uint64_t substream_seed(std::uint64_t master_seed, std::uint64_t index) {
        return mix(master_seed ^ mix((index + 1) * kGolden));
    }

    std::uint64_t next_u64() {
        state_ += kGolden;
        return mix(state_);
    }

    /// Uniform double in [0, 1), 53 bits.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [a, b). Requires a < b.
    double uniform(double a, double b) {
        double v = a + next_unit() * (b - a);
        return v < b ? v : std::nextafter(b, a);
    }

    /// Mean-zero normal sample with standard deviation `std`, by the
    /// Marsaglia polar transform. std = 0 returns exactly 0 and does not
    /// advance the stream.
    double gaussian(double std) {
        if (std == 0.0) return 0.0;
        for (;;) {
            double u = 2.0 * next_unit() - 1.0;
            double v = 2.0 * next_unit() - 1.0;
            double s = u * u + v * v;
            if (s >= 1.0 || s == 0.0) continue;
            return std * u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }

    /// Mean-zero jitter kick of amplitude `eps`: uniform on [-eps, eps].
    /// Bounded support is essential to the noise-induced well bias: a kick
    /// can never cross a barrier in one step, so barrier heights act as
    /// hard thresholds. amplitude 0 returns exactly 0 without advancing
    /// the stream.
    double kick(double eps) {
        if (eps == 0.0) return 0.0;
        return uniform(-eps, eps);
    }

private:
    explicit RngStream(std::uint64_t state) : state_(state) {}

    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

    // splitmix64 finalizer
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

}  // namespace basinlab
