#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "kpa/bytes.hpp"

namespace kpa {

/// Deterministic random source. mt19937_64 output is fixed by the standard,
/// and bounded draws use explicit rejection sampling instead of
/// std::uniform_int_distribution (whose mapping is implementation-defined),
/// so identical seeds give identical streams on every platform.
class Rng {
public:
    explicit Rng(uint64_t seed) : seed_(seed), gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    uint32_t next_u32() { return static_cast<uint32_t>(gen_() >> 32); }

    /// Uniform in [0, n). n must be > 0.
    uint64_t below(uint64_t n) {
        const uint64_t limit = n * ((~uint64_t{0}) / n);
        uint64_t v;
        do {
            v = gen_();
        } while (v >= limit);
        return v % n;
    }

    /// Uniform 40-bit value.
    uint64_t next_u40() { return gen_() >> 24; }

    bool chance(double p) {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53 < p;
    }

    Bytes bytes(size_t n) {
        Bytes out(n);
        fill(out);
        return out;
    }

    void fill(std::span<uint8_t> out) {
        size_t i = 0;
        while (i < out.size()) {
            uint64_t v = gen_();
            for (int shift = 56; shift >= 0 && i < out.size(); shift -= 8)
                out[i++] = static_cast<uint8_t>(v >> shift);
        }
    }

    Key128 key() {
        Key128 k;
        fill(k);
        return k;
    }

    /// Independent child stream; children with distinct salts never share
    /// state with each other or the parent.
    Rng child(uint64_t salt) const {
        return Rng(splitmix(seed_ + 0x9E3779B97F4A7C15ULL * (salt + 1)));
    }

    /// Fisher-Yates shuffle using this stream.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[below(i)]);
    }

    /// k distinct indices drawn from [0, n), in draw order.
    std::vector<size_t> sample_indices(size_t n, size_t k);

    static uint64_t splitmix(uint64_t x) {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

private:
    uint64_t seed_;
    std::mt19937_64 gen_;
};

}  // namespace kpa
