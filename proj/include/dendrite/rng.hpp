#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace dendrite {

/// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Seed of replicate (or stream) `index` derived from a master seed:
/// mix64(seed XOR mix64(index)). Distinct indices give decorrelated streams.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) { return mix64(seed ^ mix64(index)); }

/// Order-sensitive hash of a key tuple, used for counter-based draws.
inline std::uint64_t hash_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0)
{
    return mix64(mix64(mix64(seed ^ mix64(a)) ^ b) ^ c);
}

/// Top 53 bits to [0, 1).
inline double to_unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

/// Sequential splitmix64 stream; satisfies UniformRandomBitGenerator.
class SplitMix {
public:
    using result_type = std::uint64_t;

    explicit SplitMix(std::uint64_t seed = 0) : state_(seed) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()()
    {
        std::uint64_t z = state_;
        state_ += 0x9E3779B97F4A7C15ull;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    double uniform() { return to_unit((*this)()); }
    /// Exp(rate) by inversion.
    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

private:
    std::uint64_t state_;
};

/// Pseudo-random bijection of [0, n): four-round Feistel network on the
/// smallest even bit width covering n, with cycle walking.
class IndexPermutation {
public:
    IndexPermutation(std::uint64_t n, std::uint64_t seed) : n_(n), seed_(seed)
    {
        while ((std::uint64_t{1} << (2 * half_)) < n_) ++half_;
        mask_ = (std::uint64_t{1} << half_) - 1;
    }

    std::uint64_t operator()(std::uint64_t i) const
    {
        if (n_ <= 1) return 0;
        std::uint64_t x = i;
        do x = round_trip(x);
        while (x >= n_);
        return x;
    }

    std::uint64_t inverse(std::uint64_t y) const
    {
        if (n_ <= 1) return 0;
        std::uint64_t x = y;
        do x = round_trip_inverse(x);
        while (x >= n_);
        return x;
    }

    std::uint64_t size() const { return n_; }

private:
    std::uint64_t round_trip_inverse(std::uint64_t x) const
    {
        std::uint64_t l = x >> half_, r = x & mask_;
        for (std::uint64_t k = 4; k-- > 0;) {
            std::uint64_t f = hash_key(seed_, k, l) & mask_;
            std::uint64_t nr = l;
            l = r ^ f;
            r = nr;
        }
        return (l << half_) | r;
    }

    std::uint64_t round_trip(std::uint64_t x) const
    {
        std::uint64_t l = x >> half_, r = x & mask_;
        for (std::uint64_t k = 0; k < 4; ++k) {
            std::uint64_t f = hash_key(seed_, k, r) & mask_;
            std::uint64_t nl = r;
            r = l ^ f;
            l = nl;
        }
        return (l << half_) | r;
    }

    std::uint64_t n_;
    std::uint64_t seed_;
    unsigned half_ = 1;
    std::uint64_t mask_ = 1;
};

/// Pseudo-random bijection of [0, n) on the square domain side^2 >= n, side = ceil(sqrt n):
/// four Feistel rounds (l, r) -> (r, (l + f_k(r)) mod side) with one mix per round, then
/// cycle walking (fewer than 1 + 3 / sqrt(n) rounds trips on average).
class SquarePermutation {
public:
    SquarePermutation() = default;
    /// n < 2^32.
    SquarePermutation(std::uint64_t n, std::uint64_t seed) : n_(n)
    {
        while (std::uint64_t{side_} * side_ < n_) ++side_;
        for (std::uint64_t k = 0; k < 4; ++k) keys_[k] = hash_key(seed, k);
    }

    std::uint64_t operator()(std::uint64_t i) const
    {
        if (n_ <= 1) return 0;
        std::uint64_t x = i;
        do x = round_trip(x);
        while (x >= n_);
        return x;
    }

    std::uint64_t inverse(std::uint64_t y) const
    {
        if (n_ <= 1) return 0;
        std::uint64_t x = y;
        do x = round_trip_inverse(x);
        while (x >= n_);
        return x;
    }

private:
    std::uint32_t f(std::uint32_t k, std::uint32_t r) const
    {
        std::uint64_t h = mix64(keys_[k] ^ r);
        return static_cast<std::uint32_t>(((h >> 32) * side_) >> 32);
    }

    std::uint64_t round_trip(std::uint64_t x) const
    {
        auto y = static_cast<std::uint32_t>(x);
        std::uint32_t l = y / side_, r = y % side_;
        for (std::uint32_t k = 0; k < 4; ++k) {
            std::uint32_t nl = r;
            r = l + f(k, r);
            if (r >= side_) r -= side_;
            l = nl;
        }
        return std::uint64_t{l} * side_ + r;
    }

    std::uint64_t round_trip_inverse(std::uint64_t x) const
    {
        auto y = static_cast<std::uint32_t>(x);
        std::uint32_t l = y / side_, r = y % side_;
        for (std::uint32_t k = 4; k-- > 0;) {
            std::uint32_t nr = l;
            std::uint32_t fk = f(k, l);
            l = r >= fk ? r - fk : r + side_ - fk;
            r = nr;
        }
        return std::uint64_t{l} * side_ + r;
    }

    std::uint64_t n_ = 0;
    std::uint64_t keys_[4] = {};
    std::uint32_t side_ = 1;
};

}  // namespace dendrite
