#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace crossclone {

// All randomness in this project flows through Rng so that a given seed
// yields the same corpora, splits, and models on every platform. The raw
// generator is std::mt19937_64 (fixed by the C++ standard, with published
// test vectors); the sampling helpers below are hand-rolled because the
// std::*_distribution classes are not portable across standard libraries.

// FNV-1a 64-bit string hash. Used for OOV bucketing and seed derivation.
inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

// One step of the splitmix64 sequence; also usable as a mixing finalizer.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Folds extra words into a base seed so that derived streams are independent.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t s = seed ^ (salt + 0x9e3779b97f4a7c15ull);
    return splitmix64(s);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Unbiased integer in [0, n) via rejection sampling.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % n;
    }

    // Uniform in [0, 1) with 53 random mantissa bits.
    double real01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller (cosine branch only, one draw per call).
    double normal() {
        double u1;
        do {
            u1 = real01();
        } while (u1 <= 0.0);
        const double u2 = real01();
        constexpr double two_pi = 6.283185307179586476925286766559;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

    // In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // k distinct indices drawn uniformly from [0, n), in draw order.
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k) {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        // Partial Fisher-Yates: only the first k positions are finalized.
        for (std::size_t i = 0; i < k && i < n; ++i) {
            std::size_t j = i + static_cast<std::size_t>(below(n - i));
            std::swap(idx[i], idx[j]);
        }
        idx.resize(k < n ? k : n);
        return idx;
    }

private:
    std::mt19937_64 gen_;
};

} // namespace crossclone
