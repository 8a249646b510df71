// SPDX-License-Identifier: Apache-2.0
//
// Multi-precision floating-point multiplier pipeline: mode agreement check,
// special-value handling, sign, exponent, significand multiply at the
// selected width, normalization and range handling.
#pragma once

#include <bit>
#include <cstdint>

#include "vpmm/bitmul.hpp"
#include "vpmm/format.hpp"

namespace vpmm {

inline constexpr std::uint64_t kCanonicalQuietNan = 0x7FF8000000000000ull;
inline constexpr std::uint64_t kInfinityBits = 0x7FF0000000000000ull;

/// Product bit pattern plus the five status flags. flag_denormal marks a
/// +/-0 pattern whose true value was lost to a flush (underflow or a
/// flushed denormal input); flag_zero marks a true zero. When
/// flag_mode_select_error is set the product is all-zero and meaningless.
struct FpResult {
  std::uint64_t product = 0;
  bool flag_zero = false;
  bool flag_infinity = false;
  bool flag_nan = false;
  bool flag_denormal = false;
  bool flag_mode_select_error = false;

  double value() const { return std::bit_cast<double>(product); }
};

namespace detail {

inline FpResult nan_result() {
  FpResult r;
  r.product = kCanonicalQuietNan;
  r.flag_nan = true;
  return r;
}

inline FpResult infinity_result(bool sign) {
  FpResult r;
  r.product = (static_cast<std::uint64_t>(sign) << 63) | kInfinityBits;
  r.flag_infinity = true;
  return r;
}

inline FpResult zero_result(bool sign, bool value_lost) {
  FpResult r;
  r.product = static_cast<std::uint64_t>(sign) << 63;
  r.flag_denormal = value_lost;
  r.flag_zero = !value_lost;
  return r;
}

}  // namespace detail

/// Multiplies two packed operands. Total: every failure mode is reported
/// through the status flags, never thrown.
inline FpResult multiply(PackedOperand a, PackedOperand b) {
  // Mode agreement. Differing or undecodable mode-select bits halt the
  // operation with the error flag and an all-zero product.
  if (a.mode_bits() != b.mode_bits() || !valid_mode_bits(a.mode_bits())) {
    FpResult r;
    r.flag_mode_select_error = true;
    return r;
  }
  const PrecisionMode mode = static_cast<PrecisionMode>(a.mode_bits());

  UnpackedFloat ua = unpack_double_bits(a.value_bits());
  UnpackedFloat ub = unpack_double_bits(b.value_bits());
  const PrecisionMode resolved =
      mode == PrecisionMode::Auto ? auto_select(ua.mantissa, ub.mantissa) : mode;
  const bool sign = ua.sign != ub.sign;

  // Special inputs. NaN wins; denormal operands are flushed to zero before
  // the infinity/zero rules, and a zero produced that way reports
  // flag_denormal instead of flag_zero.
  if (ua.cls == FloatClass::NaN || ub.cls == FloatClass::NaN) {
    return detail::nan_result();
  }
  bool flushed_input = false;
  if (ua.cls == FloatClass::Denormal) {
    ua.mantissa = 0;
    ua.cls = FloatClass::Zero;
    flushed_input = true;
  }
  if (ub.cls == FloatClass::Denormal) {
    ub.mantissa = 0;
    ub.cls = FloatClass::Zero;
    flushed_input = true;
  }
  const bool a_inf = ua.cls == FloatClass::Infinity;
  const bool b_inf = ub.cls == FloatClass::Infinity;
  const bool a_zero = ua.cls == FloatClass::Zero;
  const bool b_zero = ub.cls == FloatClass::Zero;
  if ((a_inf && b_zero) || (a_zero && b_inf)) return detail::nan_result();
  if (a_inf || b_inf) return detail::infinity_result(sign);
  if (a_zero || b_zero) return detail::zero_result(sign, flushed_input);

  // Both operands are finite normals from here on.
  const int m = mantissa_width(resolved);
  int exp_a = ua.biased_exponent;
  int exp_b = ub.biased_exponent;
  std::uint64_t frac_a = ua.mantissa;
  std::uint64_t frac_b = ub.mantissa;
  if (m < kFractionBits) {
    const TruncatedMantissa ta = truncate_round_mantissa(frac_a, m);
    frac_a = ta.value;
    exp_a += ta.exponent_carry;
    const TruncatedMantissa tb = truncate_round_mantissa(frac_b, m);
    frac_b = tb.value;
    exp_b += tb.exponent_carry;
  }

  // (m+1)-bit significands with the hidden 1, multiplied exactly into a
  // (2m+2)-bit product.
  const std::uint64_t sig_a = (std::uint64_t{1} << m) | frac_a;
  const std::uint64_t sig_b = (std::uint64_t{1} << m) | frac_b;
  const Uint128 product = karatsuba(sig_a, sig_b, m + 1);

  // Exponent addition with bias removal, then normalization: a product in
  // [2, 4) shifts the binary point right by one and bumps the exponent.
  int exponent = exp_a + exp_b - kExponentBias;
  int fraction_bits = 2 * m;
  if ((product >> (2 * m + 1)) != 0) {
    ++exponent;
    fraction_bits = 2 * m + 1;
  }
  const Uint128 fraction = product & ((Uint128{1} << fraction_bits) - 1);

  // Narrow to the 52-bit field: fractions wider than 52 bits keep their top
  // 52, anything shorter is left-aligned with zero fill.
  std::uint64_t kept;
  if (fraction_bits > kFractionBits) {
    kept = static_cast<std::uint64_t>(fraction >> (fraction_bits - kFractionBits));
  } else {
    kept = static_cast<std::uint64_t>(fraction) << (kFractionBits - fraction_bits);
  }

  if (exponent >= kExponentFieldMax) return detail::infinity_result(sign);
  if (exponent <= 0) return detail::zero_result(sign, /*value_lost=*/true);

  FpResult r;
  r.product = (static_cast<std::uint64_t>(sign) << 63) |
              (static_cast<std::uint64_t>(exponent) << kFractionBits) | kept;
  return r;
}

/// Convenience wrapper packing both doubles with the same mode bits.
inline FpResult multiply(double x, double y, PrecisionMode mode) {
  return multiply(PackedOperand(mode, std::bit_cast<std::uint64_t>(x)),
                  PackedOperand(mode, std::bit_cast<std::uint64_t>(y)));
}

}  // namespace vpmm
