// SPDX-License-Identifier: Apache-2.0
//
// Unsigned binary multiplication cores: cross-diagonal (vertically-and-
// crosswise) base multipliers at 4 and 8 bits, and a Karatsuba recursion
// over them for operand widths up to 64 bits.
#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>

namespace vpmm {

using Uint128 = unsigned __int128;

/// Cross-diagonal partial terms t0..t6 of a 4x4 multiply.
/// t[k] is the sum of all bit products a_i*b_j with i + j == k, so its
/// positional weight is 2^k; t[3] collects four terms and needs three bits.
constexpr std::array<std::uint8_t, 7> urdhva4_terms(std::uint8_t a, std::uint8_t b) {
  std::array<std::uint8_t, 7> t{};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      t[i + j] += static_cast<std::uint8_t>(((a >> i) & 1u) * ((b >> j) & 1u));
    }
  }
  return t;
}

/// Exact 8-bit product of two 4-bit operands.
///
/// The diagonal terms are split bit-plane-wise into three partial sums:
/// s1 holds every t[k] low bit at weight 2^k, s2 the second bits at
/// weight 2^(k+1), s3 the third bit of t[3] at weight 2^5. Their plain sum
/// is the product; the carry out of the seven low columns is bit p7.
constexpr std::uint8_t urdhva4(std::uint8_t a, std::uint8_t b) {
  const auto t = urdhva4_terms(a, b);
  unsigned s1 = 0;
  unsigned s2 = 0;
  for (int k = 0; k < 7; ++k) {
    s1 |= static_cast<unsigned>(t[k] & 1u) << k;
    s2 |= static_cast<unsigned>((t[k] >> 1) & 1u) << (k + 1);
  }
  const unsigned s3 = static_cast<unsigned>((t[3] >> 2) & 1u) << 5;
  return static_cast<std::uint8_t>(s1 + s2 + s3);
}

/// Cross-diagonal partial terms t0..t14 of an 8x8 multiply (same pattern as
/// urdhva4_terms, fifteen diagonals, the widest summing eight bit products).
constexpr std::array<std::uint8_t, 15> urdhva8_terms(std::uint8_t a, std::uint8_t b) {
  std::array<std::uint8_t, 15> t{};
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      t[i + j] += static_cast<std::uint8_t>(((a >> i) & 1u) * ((b >> j) & 1u));
    }
  }
  return t;
}

/// Exact 16-bit product of two 8-bit operands via positional summation of
/// the fifteen diagonal terms.
constexpr std::uint16_t urdhva8(std::uint8_t a, std::uint8_t b) {
  const auto t = urdhva8_terms(a, b);
  std::uint32_t product = 0;
  for (int k = 0; k < 15; ++k) {
    product += static_cast<std::uint32_t>(t[k]) << k;
  }
  return static_cast<std::uint16_t>(product);
}

/// High/low split widths for one Karatsuba level: the high half gets
/// floor(n/2) bits, the low half the remaining ceil(n/2).
struct KaratsubaSplit {
  int high_bits;  // f
  int low_bits;   // s
};

constexpr KaratsubaSplit karatsuba_split(int width_bits) {
  return {width_bits / 2, width_bits - width_bits / 2};
}

/// Exact 2n-bit product of two n-bit unsigned operands.
///
/// Widths of at most 8 bits go straight to urdhva8 (narrower operands are
/// zero-extended). Wider operands split at s = ceil(n/2):
///   x = x_hi * 2^s + x_lo,
///   p1 = x_hi*y_hi, p2 = x_lo*y_lo, p3 = (x_hi+x_lo)*(y_hi+y_lo),
///   x*y = p1 * 2^(2s) + (p3 - p2 - p1) * 2^s + p2.
/// The p3 operand sums may carry into bit s, so that branch recurses one
/// bit wider. Throws std::invalid_argument when the width is outside
/// [1, 64] or an operand does not fit the stated width.
constexpr Uint128 karatsuba(std::uint64_t a, std::uint64_t b, int width_bits) {
  if (width_bits < 1 || width_bits > 64) {
    throw std::invalid_argument("karatsuba: operand width must be in [1, 64]");
  }
  if (width_bits < 64 && ((a >> width_bits) != 0 || (b >> width_bits) != 0)) {
    throw std::invalid_argument("karatsuba: operand value exceeds its width");
  }
  if (width_bits <= 8) {
    return urdhva8(static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b));
  }
  const auto [f, s] = karatsuba_split(width_bits);
  const std::uint64_t low_mask = (std::uint64_t{1} << s) - 1;
  const std::uint64_t a_hi = a >> s;
  const std::uint64_t a_lo = a & low_mask;
  const std::uint64_t b_hi = b >> s;
  const std::uint64_t b_lo = b & low_mask;
  const Uint128 p1 = karatsuba(a_hi, b_hi, f);
  const Uint128 p2 = karatsuba(a_lo, b_lo, s);
  const Uint128 p3 = karatsuba(a_hi + a_lo, b_hi + b_lo, s + 1);
  return (p1 << (2 * s)) + ((p3 - p2 - p1) << s) + p2;
}

}  // namespace vpmm
