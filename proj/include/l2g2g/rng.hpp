#pragma once

#include <cstdint>
#include <string_view>

namespace l2g2g {

// splitmix64; used both as a standalone generator and to derive
// independent streams from a (seed, label) pair.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0,1)
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform integer in [0, bound), bound > 0; rejection to avoid modulo bias
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t threshold = -bound % bound;
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    // uniform in [lo, hi)
    double next_in(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

private:
    std::uint64_t state_;
};

// Deterministic stream derivation: hash the label into the seed so that
// e.g. the split stream and the init stream of one run are independent.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ seed;
    for (char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    // one splitmix round to spread the fnv output
    return Rng(h).next_u64();
}

inline Rng derive_rng(std::uint64_t seed, std::string_view label) {
    return Rng(derive_seed(seed, label));
}

}  // namespace l2g2g
