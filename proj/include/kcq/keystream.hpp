#pragma once

#include <cstdint>
#include <string>

#include "kcq/bits.hpp"

namespace kcq::keystream {

// Fibonacci LFSR with an openly known connection polynomial. The polynomial
// mask uses LSB = x^0; the degree is the highest set bit and must be monic
// and equal the seed length. Each step shifts out the low state bit and
// feeds back the parity of the tapped bits. Any stream cipher could sit
// behind this interface; only the LFSR is provided.
class Lfsr {
  public:
    Lfsr(const BitString& seed, std::uint64_t poly_mask);

    std::uint8_t next_bit();
    BitString next_bits(std::size_t count);
    std::uint64_t next_uint(int bits);

    int degree() const { return degree_; }
    std::uint64_t state() const { return state_; }

  private:
    std::uint64_t state_ = 0;
    std::uint64_t taps_ = 0;
    int degree_ = 0;
};

// Convenience: run a fresh LFSR for `count` bits.
BitString lfsr_stream(const BitString& seed, std::uint64_t poly_mask, std::size_t count);

// Parses a hex polynomial mask, e.g. "0x13" for x^4 + x + 1 (LSB = x^0).
std::uint64_t parse_poly_mask(const std::string& hex);

// A primitive polynomial per degree for a few common sizes; degree 64 backs
// internal key expansion.
std::uint64_t default_poly(int degree);

// Blockwise repetition of a short key: bit j of an m-bit key covers the
// contiguous positions [j*n/m, (j+1)*n/m). Requires m | n. This is the
// known-insecure expander kept for the block-guessing attack analysis.
struct RepeatExpansion {
    BitString stream;       // n bits
    std::size_t block_len;  // n / m
    std::size_t blocks;     // m
};

RepeatExpansion repeat_expand(const BitString& key, std::size_t n);

}  // namespace kcq::keystream
