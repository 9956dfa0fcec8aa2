#include "kcq/keystream.hpp"

#include <bit>
#include <stdexcept>

namespace kcq::keystream {

Lfsr::Lfsr(const BitString& seed, std::uint64_t poly_mask) {
    if (seed.empty() || seed.size() > 63) throw std::invalid_argument("seed length must lie in [1, 63]");
    if (all_zero(seed)) throw std::invalid_argument("all-zero LFSR seed");
    degree_ = static_cast<int>(seed.size());
    if (poly_mask >> degree_ != 1ULL)
        throw std::invalid_argument("polynomial must be monic of degree equal to the seed length");
    taps_ = poly_mask & ((1ULL << degree_) - 1);
    if (taps_ == 0) throw std::invalid_argument("polynomial needs at least one tap below x^degree");
    state_ = uint_from_bits(seed);
}

std::uint8_t Lfsr::next_bit() {
    std::uint8_t out = static_cast<std::uint8_t>(state_ & 1u);
    std::uint64_t fb = static_cast<std::uint64_t>(std::popcount(state_ & taps_) & 1);
    state_ = (state_ >> 1) | (fb << (degree_ - 1));
    return out;
}

BitString Lfsr::next_bits(std::size_t count) {
    BitString out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = next_bit();
    return out;
}

std::uint64_t Lfsr::next_uint(int bits) {
    if (bits < 0 || bits > 63) throw std::invalid_argument("bits out of range");
    std::uint64_t v = 0;
    for (int i = 0; i < bits; ++i) v |= static_cast<std::uint64_t>(next_bit()) << i;
    return v;
}

BitString lfsr_stream(const BitString& seed, std::uint64_t poly_mask, std::size_t count) {
    Lfsr g(seed, poly_mask);
    return g.next_bits(count);
}

std::uint64_t parse_poly_mask(const std::string& hex) {
    std::string s = hex;
    if (s.rfind("0x", 0) == 0 || s.rfind("0X", 0) == 0) s = s.substr(2);
    if (s.empty()) throw std::invalid_argument("empty polynomial mask");
    std::uint64_t v = 0;
    for (char c : s) {
        int d;
        if (c >= '0' && c <= '9')
            d = c - '0';
        else if (c >= 'a' && c <= 'f')
            d = c - 'a' + 10;
        else if (c >= 'A' && c <= 'F')
            d = c - 'A' + 10;
        else
            throw std::invalid_argument("polynomial mask must be hex");
        if (v >> 60) throw std::invalid_argument("polynomial mask too large");
        v = (v << 4) | static_cast<std::uint64_t>(d);
    }
    return v;
}

std::uint64_t default_poly(int degree) {
    // Primitive polynomials, LSB = x^0.
    switch (degree) {
        case 4:
            return 0x13;  // x^4 + x + 1
        case 8:
            return 0x11d;  // x^8 + x^4 + x^3 + x^2 + 1
        case 16:
            return 0x1002d;  // x^16 + x^5 + x^3 + x^2 + 1
        case 32:
            return 0x1000000afULL;  // x^32 + x^7 + x^5 + x^3 + x^2 + x + 1
        case 63:
            return (1ULL << 63) | 0x3;  // x^63 + x + 1
        default:
            throw std::invalid_argument("no default polynomial for this degree");
    }
}

RepeatExpansion repeat_expand(const BitString& key, std::size_t n) {
    if (key.empty()) throw std::invalid_argument("empty key");
    if (n == 0 || n % key.size() != 0)
        throw std::invalid_argument("key length must divide the stream length");
    RepeatExpansion e;
    e.blocks = key.size();
    e.block_len = n / key.size();
    e.stream.resize(n);
    for (std::size_t j = 0; j < e.blocks; ++j)
        for (std::size_t i = 0; i < e.block_len; ++i) e.stream[j * e.block_len + i] = key[j];
    return e;
}

}  // namespace kcq::keystream
