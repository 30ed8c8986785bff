#pragma once

// Counter-based seeding and a deterministic normal generator. The per-sample
// stream is a mt19937_64 seeded by a splitmix64 mix of (master_seed,
// sample_index), so sample k is bit-identical regardless of execution order.
// Normals use explicit Box-Muller on 53-bit uniforms; every step is fully
// specified by the standard, so streams are reproducible across platforms.

#include <cmath>
#include <cstdint>
#include <random>

namespace homog {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct SampleSeed {
    std::uint64_t master_seed = 0;
    std::uint64_t sample_index = 0;

    std::uint64_t mixed() const {
        std::uint64_t s = master_seed;
        (void)splitmix64(s);
        s ^= 0x6a09e667f3bcc909ULL + sample_index;
        std::uint64_t out = splitmix64(s);
        out ^= splitmix64(s);
        return out;
    }
};

class NormalStream {
public:
    explicit NormalStream(const SampleSeed& seed) : rng_(seed.mixed()) {}
    explicit NormalStream(std::uint64_t raw_seed) : rng_(raw_seed) {}

    double uniform() {  // in (0, 1]
        return (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double rad = std::sqrt(-2.0 * std::log(u1));
        const double th = 2.0 * M_PI * u2;
        spare_ = rad * std::sin(th);
        have_spare_ = true;
        return rad * std::cos(th);
    }

    std::uint64_t raw() { return rng_(); }

private:
    std::mt19937_64 rng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace homog
