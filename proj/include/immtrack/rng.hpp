#pragma once

#include <cstdint>

namespace immtrack {

/// Portable deterministic RNG (splitmix64). The constants below are the
/// published ones, so ports in other languages reproduce streams bit-exactly:
///   increment 0x9e3779b97f4a7c15, mixers 0xbf58476d1ce4e5b9 and
///   0x94d049bb133111eb, shifts 30/27/31.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Inclusive integer range. Modulo reduction: the bias is < 2^-50 for the
    /// small ranges used here and keeps the stream trivially portable.
    int uniform_int(int lo, int hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(next_u64() % span);
    }

    /// Standard normal via the 12-term Irwin-Hall sum. Exactly reproducible
    /// from the uniform stream (no platform-dependent transcendentals).
    double gaussian() {
        double s = 0.0;
        for (int i = 0; i < 12; ++i) s += uniform();
        return s - 6.0;
    }

    double gaussian(double mean, double sigma) { return mean + sigma * gaussian(); }

    bool bernoulli(double p) { return uniform() < p; }

private:
    std::uint64_t state_;
};

}  // namespace immtrack
