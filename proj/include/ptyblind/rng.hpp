#pragma once

#include <cmath>
#include <cstdint>

namespace ptyblind {

// xoshiro256++ seeded through splitmix64. std::* distributions are
// implementation-defined, so all sampling is spelled out here to keep
// artifacts bit-reproducible.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : root_(seed) {
        std::uint64_t x = seed;
        for (int i = 0; i < 4; ++i) s_[i] = splitmix64(x);
    }

    /// Independent stream derived from this generator's seed.
    Rng fork(std::uint64_t stream) const {
        std::uint64_t x = root_ ^ (0x9E3779B97F4A7C15ull * (stream + 1));
        return Rng(splitmix_once(x));
    }

    std::uint64_t next_u64() {
        std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (pairs cached).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform(), u2 = uniform();
        // Guard against log(0).
        while (u1 <= 0.0) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Poisson sample. Sequential inversion for small means; larger means
    /// are split into chunks (Poisson additivity) to avoid exp underflow.
    /// Beyond 1e6 a rounded normal stands in.
    std::int64_t poisson(double mean) {
        if (mean < 0.0) return 0;
        if (mean > 1e6) {
            double v = mean + std::sqrt(mean) * normal();
            return v < 0.0 ? 0 : static_cast<std::int64_t>(std::llround(v));
        }
        std::int64_t total = 0;
        while (mean > 500.0) {
            total += poisson_inversion(500.0);
            mean -= 500.0;
        }
        return total + poisson_inversion(mean);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    static std::uint64_t splitmix64(std::uint64_t& x) {
        x += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    static std::uint64_t splitmix_once(std::uint64_t x) { return splitmix64(x); }

    std::int64_t poisson_inversion(double mean) {
        if (mean <= 0.0) return 0;
        double limit = std::exp(-mean);
        double prod = uniform();
        std::int64_t n = 0;
        while (prod > limit) {
            prod *= uniform();
            ++n;
        }
        return n;
    }

    std::uint64_t root_;
    std::uint64_t s_[4];
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace ptyblind
