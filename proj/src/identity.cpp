#include "kpa/identity.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace kpa {

namespace {

void put_digits3(std::array<uint8_t, kIdentityWireSize>& out, size_t off,
                 uint16_t value) {
    out[off] = static_cast<uint8_t>('0' + (value / 100) % 10);
    out[off + 1] = static_cast<uint8_t>('0' + (value / 10) % 10);
    out[off + 2] = static_cast<uint8_t>('0' + value % 10);
}

uint16_t read_digits3(std::span<const uint8_t> in, size_t off) {
    uint16_t v = 0;
    for (size_t i = 0; i < 3; ++i) {
        const uint8_t c = in[off + i];
        if (c < '0' || c > '9')
            throw MalformedIdentity("identity: non-digit MCC/MNC");
        v = static_cast<uint16_t>(v * 10 + (c - '0'));
    }
    return v;
}

}  // namespace

std::array<uint8_t, kIdentityWireSize> encode_identity(const Pseudonym& p) {
    std::array<uint8_t, kIdentityWireSize> out{};
    put_digits3(out, 0, p.mcc);
    put_digits3(out, 3, p.mnc);
    uint64_t msin = p.msin;
    for (int i = 10; i >= 6; --i) {
        out[static_cast<size_t>(i)] = static_cast<uint8_t>(msin);
        msin >>= 8;
    }
    return out;
}

Pseudonym decode_identity(std::span<const uint8_t> wire) {
    if (wire.size() != kIdentityWireSize)
        throw MalformedIdentity("identity: wrong encoded length");
    Pseudonym p;
    p.mcc = read_digits3(wire, 0);
    p.mnc = read_digits3(wire, 3);
    p.msin = 0;
    for (size_t i = 6; i < kIdentityWireSize; ++i)
        p.msin = (p.msin << 8) | wire[i];
    p.kind = IdentityKind::Assistant;
    return p;
}

Key128 derive_iv(const Key128& key, uint64_t sqn) {
    const auto sqn6 = sqn_bytes(sqn);
    const Digest h = sha256(sqn6);
    Key128 rand;
    std::copy(h.begin(), h.begin() + 16, rand.begin());
    const MilenageOutput mo = milenage(key, rand, 0, 0);
    Key128 iv;
    std::copy(mo.ck.begin(), mo.ck.begin() + 8, iv.begin());
    std::copy(mo.ik.begin() + 8, mo.ik.end(), iv.begin() + 8);
    return iv;
}

uint64_t keystream40(Zuc& zuc) { return keystream_bits(zuc, 40); }

uint64_t keystream_bits(Zuc& zuc, unsigned bits) {
    const uint32_t w1 = zuc.next_word();
    const uint32_t w2 = zuc.next_word();
    return expand_words(w1, w2, bits);
}

Pseudonym anchor_pseudonym(const Key128& key, const Imsi& imsi,
                           uint64_t sqn) {
    const auto sqn6 = sqn_bytes(sqn);
    const uint64_t mask = hmac40(key, sqn6);
    return {imsi.mcc, imsi.mnc, imsi.msin ^ mask, IdentityKind::Anchor};
}

PseudonymChain::PseudonymChain(const Key128& key, const Imsi& imsi,
                               uint64_t initial_sqn)
    : key_(key), imsi_(imsi), sqn_imsi_(initial_sqn) {}

const Pseudonym& PseudonymChain::current() const {
    if (!active())
        throw std::logic_error("chain: no current pseudonym before first auth");
    return current_;
}

Pseudonym PseudonymChain::anchor() const {
    if (!has_anchor_)
        throw std::logic_error("chain: anchor not established");
    return anchor_pseudonym(key_, imsi_, sqn_p0_);
}

void PseudonymChain::advance_sqn(SqnCounter which) {
    uint64_t& counter = which == SqnCounter::Imsi ? sqn_imsi_ : sqn_p0_;
    if (counter >= kSqnMax)
        throw ChainExhausted("chain: SQN counter exhausted");
    ++counter;
}

void PseudonymChain::set_sqn_imsi(uint64_t value) {
    if (value > kSqnMax) throw ChainExhausted("chain: SQN out of range");
    sqn_imsi_ = value;
}

void PseudonymChain::begin_epoch(uint64_t seed_sqn) {
    zuc_.emplace(key_, derive_iv(key_, seed_sqn));
    count_ = 0;
}

void PseudonymChain::establish_anchor(uint64_t first_auth_sqn) {
    sqn_p0_ = first_auth_sqn;
    has_anchor_ = true;
    begin_epoch(sqn_p0_);
}

void PseudonymChain::rebuild_epoch() {
    if (!has_anchor_)
        throw std::logic_error("chain: cannot rebuild epoch before anchor");
    begin_epoch(sqn_p0_);
}

uint64_t PseudonymChain::expand_keystream_40() {
    if (!zuc_)
        throw std::logic_error("chain: keystream epoch not started");
    const uint64_t ks = keystream40(*zuc_);
    count_ += 2;
    return ks;
}

const Pseudonym& PseudonymChain::next_pseudonym() {
    const uint64_t ks = expand_keystream_40();
    current_ = {imsi_.mcc, imsi_.mnc, imsi_.msin ^ ks,
                IdentityKind::SharedPseudonym};
    ++index_;
    return current_;
}

ChainRecord PseudonymChain::to_record() const {
    return {key_, imsi_.mcc, imsi_.mnc, imsi_.msin,
            sqn_imsi_, sqn_p0_, count_, index_};
}

PseudonymChain PseudonymChain::from_record(const ChainRecord& rec) {
    PseudonymChain chain(rec.key, {rec.mcc, rec.mnc, rec.msin},
                         rec.sqn_imsi);
    if (rec.index > 0) {
        chain.establish_anchor(rec.sqn_p0);
        for (uint64_t i = 0; i < rec.count / 2; ++i) chain.next_pseudonym();
        chain.index_ = rec.index;
    }
    return chain;
}

std::string format_record(const ChainRecord& rec) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "%s %03x %03x %010" PRIx64 " %012" PRIx64 " %012" PRIx64
                  " %" PRIx64 " %" PRIx64,
                  to_hex(rec.key).c_str(), rec.mcc, rec.mnc, rec.msin,
                  rec.sqn_imsi, rec.sqn_p0, rec.count, rec.index);
    return buf;
}

ChainRecord parse_record(const std::string& line) {
    std::istringstream in(line);
    std::string key_hex;
    std::string fields[7];
    if (!(in >> key_hex >> fields[0] >> fields[1] >> fields[2] >> fields[3] >>
          fields[4] >> fields[5] >> fields[6]))
        throw MalformedIdentity("registry: short record");
    std::string extra;
    if (in >> extra) throw MalformedIdentity("registry: trailing fields");

    ChainRecord rec;
    try {
        rec.key = key_from_hex(key_hex);
        uint64_t v[7];
        for (size_t i = 0; i < 7; ++i) {
            size_t pos = 0;
            v[i] = std::stoull(fields[i], &pos, 16);
            if (pos != fields[i].size())
                throw std::invalid_argument("bad hex field");
        }
        rec.mcc = static_cast<uint16_t>(v[0]);
        rec.mnc = static_cast<uint16_t>(v[1]);
        rec.msin = v[2];
        rec.sqn_imsi = v[3];
        rec.sqn_p0 = v[4];
        rec.count = v[5];
        rec.index = v[6];
    } catch (const std::exception&) {
        throw MalformedIdentity("registry: malformed record: " + line);
    }
    if (rec.mcc > 999 || rec.mnc > 999 || rec.msin > 0xFFFFFFFFFFULL)
        throw MalformedIdentity("registry: field out of range: " + line);
    return rec;
}

void save_registry(const std::string& path,
                   std::span<const ChainRecord> records) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("registry: cannot open " + path);
    for (const auto& rec : records) out << format_record(rec) << '\n';
    if (!out) throw std::runtime_error("registry: write failed: " + path);
}

std::vector<ChainRecord> load_registry(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("registry: cannot open " + path);
    std::vector<ChainRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        records.push_back(parse_record(line));
    }
    return records;
}

}  // namespace kpa
