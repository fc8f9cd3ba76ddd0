#include "kpa/crypto.hpp"

#include <openssl/core_names.h>
#include <openssl/evp.h>
#include <openssl/params.h>

#include <cstring>
#include <memory>
#include <stdexcept>

namespace kpa {

Digest sha256(std::span<const uint8_t> msg) {
    Digest out{};
    unsigned int len = 0;
    if (EVP_Digest(msg.data(), msg.size(), out.data(), &len, EVP_sha256(),
                   nullptr) != 1 ||
        len != out.size())
        throw std::runtime_error("sha256: EVP_Digest failed");
    return out;
}

Digest hmac_sha256(std::span<const uint8_t> key,
                   std::span<const uint8_t> msg) {
    static EVP_MAC* mac = EVP_MAC_fetch(nullptr, "HMAC", nullptr);
    if (mac == nullptr) throw std::runtime_error("hmac: HMAC fetch failed");

    std::unique_ptr<EVP_MAC_CTX, decltype(&EVP_MAC_CTX_free)> ctx(
        EVP_MAC_CTX_new(mac), EVP_MAC_CTX_free);
    if (!ctx) throw std::runtime_error("hmac: context allocation failed");

    char digest_name[] = "SHA256";
    OSSL_PARAM params[] = {
        OSSL_PARAM_construct_utf8_string(OSSL_MAC_PARAM_DIGEST, digest_name,
                                         0),
        OSSL_PARAM_construct_end()};

    Digest out{};
    size_t len = 0;
    // OpenSSL rejects a null key pointer even for empty keys
    static const uint8_t empty = 0;
    const uint8_t* key_ptr = key.empty() ? &empty : key.data();
    if (EVP_MAC_init(ctx.get(), key_ptr, key.size(), params) != 1 ||
        EVP_MAC_update(ctx.get(), msg.data(), msg.size()) != 1 ||
        EVP_MAC_final(ctx.get(), out.data(), &len, out.size()) != 1 ||
        len != out.size())
        throw std::runtime_error("hmac: computation failed");
    return out;
}

uint64_t hmac40(std::span<const uint8_t> key, std::span<const uint8_t> msg) {
    const Digest d = hmac_sha256(key, msg);
    uint64_t v = 0;
    for (size_t i = 0; i < 5; ++i) v = (v << 8) | d[i];
    return v;
}

Bytes prng_expand(std::span<const uint8_t> seed, size_t out_len) {
    if (out_len < 1)
        throw std::invalid_argument("prng_expand: out_len must be >= 1");
    Bytes out;
    out.reserve(out_len);
    uint32_t counter = 1;
    while (out.size() < out_len) {
        Bytes ctr;
        put_u32(ctr, counter++);
        const Digest block = hmac_sha256(seed, ctr);
        const size_t take = std::min(block.size(), out_len - out.size());
        out.insert(out.end(), block.begin(), block.begin() + take);
    }
    return out;
}

namespace {

/// One keyed AES-128-ECB context, reused across block encryptions.
class Aes128 {
public:
    explicit Aes128(const Key128& key)
        : ctx_(EVP_CIPHER_CTX_new(), EVP_CIPHER_CTX_free) {
        if (!ctx_ ||
            EVP_EncryptInit_ex(ctx_.get(), EVP_aes_128_ecb(), nullptr,
                               key.data(), nullptr) != 1 ||
            EVP_CIPHER_CTX_set_padding(ctx_.get(), 0) != 1)
            throw std::runtime_error("aes128: context setup failed");
    }

    Key128 encrypt(const Key128& block) const {
        Key128 out{};
        int len = 0;
        if (EVP_EncryptUpdate(ctx_.get(), out.data(), &len, block.data(),
                              static_cast<int>(block.size())) != 1 ||
            len != static_cast<int>(out.size()))
            throw std::runtime_error("aes128: encryption failed");
        return out;
    }

private:
    std::unique_ptr<EVP_CIPHER_CTX, decltype(&EVP_CIPHER_CTX_free)> ctx_;
};

// cyclic rotate towards the most significant byte
Key128 rot_bytes(const Key128& x, size_t r_bytes) {
    Key128 out;
    for (size_t i = 0; i < 16; ++i) out[i] = x[(i + r_bytes) % 16];
    return out;
}

}  // namespace

Key128 aes128_encrypt_block(const Key128& key, const Key128& block) {
    return Aes128(key).encrypt(block);
}

Key128 milenage_opc(const Key128& key, const Key128& op) {
    return xor128(Aes128(key).encrypt(op), op);
}

MilenageOutput milenage_with_op(const Key128& key, const Key128& op,
                                const Key128& rand, uint64_t sqn,
                                uint16_t amf) {
    const Aes128 aes(key);
    const Key128 opc = xor128(aes.encrypt(op), op);
    const Key128 temp = aes.encrypt(xor128(rand, opc));

    // IN1 = SQN || AMF || SQN || AMF
    Key128 in1;
    const auto sqn6 = sqn_bytes(sqn);
    for (size_t i = 0; i < 6; ++i) {
        in1[i] = sqn6[i];
        in1[i + 8] = sqn6[i];
    }
    in1[6] = static_cast<uint8_t>(amf >> 8);
    in1[7] = static_cast<uint8_t>(amf);
    in1[14] = in1[6];
    in1[15] = in1[7];

    MilenageOutput out{};

    // f1: r1 = 64 bits, c1 = 0
    Key128 block = xor128(temp, rot_bytes(xor128(in1, opc), 8));
    Key128 out1 = xor128(aes.encrypt(block), opc);
    for (size_t i = 0; i < 8; ++i) out.mac = (out.mac << 8) | out1[i];

    // f2/f5: r2 = 0, c2 = ...01
    block = xor128(temp, opc);
    block[15] ^= 1;
    Key128 out2 = xor128(aes.encrypt(block), opc);
    for (size_t i = 8; i < 16; ++i) out.res = (out.res << 8) | out2[i];
    for (size_t i = 0; i < 6; ++i) out.ak = (out.ak << 8) | out2[i];

    // f3: r3 = 32, c3 = ...02
    block = rot_bytes(xor128(temp, opc), 4);
    block[15] ^= 2;
    out.ck = xor128(aes.encrypt(block), opc);

    // f4: r4 = 64, c4 = ...04
    block = rot_bytes(xor128(temp, opc), 8);
    block[15] ^= 4;
    out.ik = xor128(aes.encrypt(block), opc);

    return out;
}

MilenageOutput milenage(const Key128& key, const Key128& rand, uint64_t sqn,
                        uint16_t amf) {
    return milenage_with_op(key, kMilenageOp, rand, sqn, amf);
}

}  // namespace kpa
