#pragma once

#include <cmath>
#include <cstdint>

namespace rfio {

// splitmix64 stream. Every random quantity in the library flows from one
// 64-bit seed; sub-streams are derived with a fixed counter scheme so runs
// are bit-identical across platforms (std::normal_distribution is not).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    // Derive a deterministic sub-stream: seed, purpose counter, index.
    static Rng sub(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index = 0) {
        Rng mix(seed);
        std::uint64_t s = mix.next_u64();
        s ^= 0x9e3779b97f4a7c15ull * (purpose + 1);
        s += 0xbf58476d1ce4e5b9ull * (index + 1);
        return Rng(s);
    }

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [a, b).
    double uniform(double a, double b) { return a + (b - a) * next_double(); }

    // Standard normal via Box-Muller (deterministic given the stream).
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_double(), u2 = next_double();
        while (u1 <= 1e-300) u1 = next_double();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace rfio
