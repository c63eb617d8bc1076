#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace nonresp {

/// Deterministic random generator used by every stochastic operation.
///
/// Core stream is xoshiro256** (Blackman & Vigna, 2018); the 256-bit state is
/// seeded from a single 64-bit seed through splitmix64, as the xoshiro authors
/// recommend. Both algorithms are fully specified integer recurrences, so a
/// given seed yields the same stream on every platform and standard library.
/// Streams are splittable: split(tag) derives an independent child seed by
/// hashing (state, tag), which lets parallel loops pre-derive one generator
/// per work item and stay bit-identical to serial execution.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& word : state_) word = splitmix64(x);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1), 53 mantissa bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound). Unbiased via rejection sampling.
    std::uint64_t below(std::uint64_t bound) {
        // Rejection zone keeps the draw exactly uniform.
        const std::uint64_t threshold = -bound % bound;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    /// Derive an independent child generator from this stream and a tag.
    Rng split(std::uint64_t tag) {
        std::uint64_t x = next_u64() ^ (tag * 0x9E3779B97F4A7C15ULL);
        return Rng(splitmix64(x));
    }

    /// Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    /// Random permutation of 0..n-1.
    std::vector<std::size_t> permutation(std::size_t n) {
        std::vector<std::size_t> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = i;
        shuffle(p);
        return p;
    }

    static std::uint64_t splitmix64(std::uint64_t& x) {
        std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
};

/// Stable seed for work item `index` of the stream identified by `seed`.
/// Parallel loops derive one Rng per item from this, independent of order.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t x = seed ^ (index * 0xD1B54A32D192ED03ULL) ^ 0x9E3779B97F4A7C15ULL;
    Rng::splitmix64(x);
    return Rng::splitmix64(x);
}

} // namespace nonresp
