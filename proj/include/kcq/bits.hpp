#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace kcq {

// Bit strings are vectors of 0/1 bytes, index 0 = first bit on the wire.
using BitString = std::vector<std::uint8_t>;

inline BitString bits_from_uint(std::uint64_t value, int count) {
    BitString out(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = (value >> i) & 1u;
    return out;
}

inline std::uint64_t uint_from_bits(const BitString& bits) {
    if (bits.size() > 64) throw std::invalid_argument("bit string longer than 64 bits");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) v |= (1ULL << i);
    return v;
}

inline std::string bits_to_string(const BitString& bits) {
    std::string s;
    s.reserve(bits.size());
    for (auto b : bits) s.push_back(b ? '1' : '0');
    return s;
}

inline BitString bits_from_string(const std::string& s) {
    BitString out;
    out.reserve(s.size());
    for (char c : s) {
        if (c != '0' && c != '1') throw std::invalid_argument("bit string must contain only 0/1");
        out.push_back(c == '1' ? 1 : 0);
    }
    return out;
}

inline bool all_zero(const BitString& bits) {
    for (auto b : bits)
        if (b) return false;
    return true;
}

inline int hamming_distance(const BitString& a, const BitString& b) {
    if (a.size() != b.size()) throw std::invalid_argument("length mismatch");
    int d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] != b[i]);
    return d;
}

}  // namespace kcq
