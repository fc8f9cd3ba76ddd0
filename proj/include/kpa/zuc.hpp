#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "kpa/bytes.hpp"

namespace kpa {

/// ZUC stream cipher: 16x31-bit LFSR over GF(2^31-1), bit-reorganization
/// layer and nonlinear function F with registers R1/R2, emitting 32-bit
/// keystream words. Full standard construction including key-loading
/// constants, S-boxes and the L1/L2 linear transforms; verified against the
/// published keystream test vectors.
class Zuc {
public:
    Zuc(const Key128& key, const Key128& iv);

    /// Next keystream word Z = W ^ X3 with W = (X0 ^ R1) + R2 mod 2^32.
    uint32_t next_word();

    std::vector<uint32_t> keystream(size_t n);

    uint64_t words_emitted() const { return words_emitted_; }

    /// LFSR cells, exposed for state-range checks.
    const std::array<uint32_t, 16>& lfsr() const { return s_; }

private:
    struct BrWords {
        uint32_t x0, x1, x2, x3;
    };

    BrWords bit_reorganize() const;
    uint32_t f(const BrWords& x);
    void lfsr_init_step(uint32_t u);
    void lfsr_work_step();

    std::array<uint32_t, 16> s_{};
    uint32_t r1_ = 0;
    uint32_t r2_ = 0;
    uint64_t words_emitted_ = 0;
};

}  // namespace kpa
