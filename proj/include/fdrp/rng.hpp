#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace fdrp {

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

// splitmix64 avalanche finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derives an independent substream key from (seed, p1, p2, ...).
// Tasks seeded this way draw identical streams under any schedule.
inline std::uint64_t derive_seed(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = mix64(seed + kGoldenGamma);
    for (std::uint64_t p : parts) h = mix64((h ^ p) + kGoldenGamma);
    return h;
}

// Counter-based generator: Weyl sequence through the splitmix64 mixer.
// Fully owned stream, so results do not depend on the platform's
// distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += kGoldenGamma;
        return mix64(state_);
    }

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [lo, hi].
    int uniform_int(int lo, int hi) {
        const std::uint64_t n = static_cast<std::uint64_t>(hi - lo) + 1;
        const std::uint64_t threshold = (-n) % n;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return lo + static_cast<int>(r % n);
        }
    }

    // Standard normal via Box-Muller; consumes two uniforms per pair.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace fdrp
