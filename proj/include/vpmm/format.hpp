// SPDX-License-Identifier: Apache-2.0
//
// The 67-bit packed operand format: three mode-select bits in front of an
// IEEE-754 binary64 payload. Also hosts precision-mode decoding, mantissa
// truncation with the four-bit G/R/T/E rounding scheme, and auto-mode
// width selection.
#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "vpmm/bitmul.hpp"

namespace vpmm {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidModeEncoding : std::runtime_error {
  explicit InvalidModeEncoding(unsigned bits)
      : std::runtime_error("invalid mode-select encoding " + std::to_string(bits)) {}
};

/// Precision modes; enumerator values are the mode-select bit encodings.
enum class PrecisionMode : std::uint8_t {
  Auto = 0,  // width resolved from the operands
  M8 = 1,
  M16 = 2,
  M23 = 3,
  M36 = 4,
  M52 = 5,
};

inline constexpr std::array<int, 5> kMantissaWidths{8, 16, 23, 36, 52};
inline constexpr std::array<PrecisionMode, 5> kFixedModes{
    PrecisionMode::M8, PrecisionMode::M16, PrecisionMode::M23,
    PrecisionMode::M36, PrecisionMode::M52};

constexpr bool valid_mode_bits(unsigned bits) { return bits <= 5; }

constexpr unsigned encode_mode(PrecisionMode mode) {
  return static_cast<unsigned>(mode);
}

inline PrecisionMode decode_mode(unsigned bits) {
  if (!valid_mode_bits(bits)) throw InvalidModeEncoding(bits);
  return static_cast<PrecisionMode>(bits);
}

/// Mantissa width of a fixed mode. Auto has no width until resolved.
inline int mantissa_width(PrecisionMode mode) {
  switch (mode) {
    case PrecisionMode::M8: return 8;
    case PrecisionMode::M16: return 16;
    case PrecisionMode::M23: return 23;
    case PrecisionMode::M36: return 36;
    case PrecisionMode::M52: return 52;
    case PrecisionMode::Auto: break;
  }
  throw std::logic_error("mantissa_width: auto mode is unresolved");
}

inline PrecisionMode mode_for_width(int width) {
  for (std::size_t i = 0; i < kMantissaWidths.size(); ++i) {
    if (kMantissaWidths[i] == width) return kFixedModes[i];
  }
  throw std::invalid_argument("mode_for_width: no mode with mantissa width " +
                              std::to_string(width));
}

inline std::string to_string(PrecisionMode mode) {
  return mode == PrecisionMode::Auto ? "auto" : std::to_string(mantissa_width(mode));
}

inline PrecisionMode mode_from_string(std::string_view text) {
  if (text == "auto") return PrecisionMode::Auto;
  for (std::size_t i = 0; i < kMantissaWidths.size(); ++i) {
    if (text == std::to_string(kMantissaWidths[i])) return kFixedModes[i];
  }
  throw ParseError("unknown precision mode '" + std::string(text) +
                   "' (expected auto, 8, 16, 23, 36 or 52)");
}

// --- binary64 payload ------------------------------------------------------

inline constexpr int kFractionBits = 52;
inline constexpr std::uint64_t kFractionMask = (std::uint64_t{1} << kFractionBits) - 1;
inline constexpr int kExponentBias = 1023;
inline constexpr int kExponentFieldMax = 2047;

enum class FloatClass { Zero, Denormal, Normal, Infinity, NaN };

struct UnpackedFloat {
  bool sign = false;
  int biased_exponent = 0;      // 11-bit field value
  std::uint64_t mantissa = 0;   // 52-bit stored fraction, hidden 1 not included
  FloatClass cls = FloatClass::Zero;
};

constexpr UnpackedFloat unpack_double_bits(std::uint64_t bits) {
  UnpackedFloat u;
  u.sign = ((bits >> 63) & 1u) != 0;
  u.biased_exponent = static_cast<int>((bits >> kFractionBits) & 0x7FFu);
  u.mantissa = bits & kFractionMask;
  if (u.biased_exponent == 0) {
    u.cls = (u.mantissa == 0) ? FloatClass::Zero : FloatClass::Denormal;
  } else if (u.biased_exponent == kExponentFieldMax) {
    u.cls = (u.mantissa == 0) ? FloatClass::Infinity : FloatClass::NaN;
  } else {
    u.cls = FloatClass::Normal;
  }
  return u;
}

constexpr std::uint64_t pack_double_bits(const UnpackedFloat& u) {
  return (static_cast<std::uint64_t>(u.sign) << 63) |
         (static_cast<std::uint64_t>(u.biased_exponent & 0x7FF) << kFractionBits) |
         (u.mantissa & kFractionMask);
}

// --- packed 67-bit operand --------------------------------------------------

/// 67-bit operand: bits 66..64 are the mode-select bits, bits 63..0 the
/// binary64 payload. Invalid mode encodings (110, 111) are representable;
/// unpack() and the multiplier police them.
class PackedOperand {
 public:
  PackedOperand() = default;

  PackedOperand(PrecisionMode mode, std::uint64_t double_bits)
      : raw_((static_cast<Uint128>(encode_mode(mode)) << 64) | double_bits) {}

  static PackedOperand from_raw(Uint128 raw) {
    if ((raw >> 67) != 0) {
      throw std::invalid_argument("PackedOperand: raw value exceeds 67 bits");
    }
    PackedOperand p;
    p.raw_ = raw;
    return p;
  }

  Uint128 raw() const { return raw_; }
  unsigned mode_bits() const { return static_cast<unsigned>(raw_ >> 64); }
  std::uint64_t value_bits() const { return static_cast<std::uint64_t>(raw_); }

  friend bool operator==(PackedOperand a, PackedOperand b) { return a.raw_ == b.raw_; }

 private:
  Uint128 raw_ = 0;
};

struct UnpackedOperand {
  PrecisionMode mode;
  UnpackedFloat value;
};

/// Field extraction; throws InvalidModeEncoding for mode bits 110 / 111.
inline UnpackedOperand unpack(PackedOperand p) {
  return {decode_mode(p.mode_bits()), unpack_double_bits(p.value_bits())};
}

inline PackedOperand pack(PrecisionMode mode, const UnpackedFloat& value) {
  return PackedOperand(mode, pack_double_bits(value));
}

// --- truncation and rounding -------------------------------------------------

struct RoundingBits {
  bool g = false;  // guard: first discarded bit
  bool r = false;  // round: second
  bool t = false;  // sticky: third
  bool e = false;  // extra: OR of everything below
};

/// Extracts G/R/T/E from a discarded tail. Bit (bit_count-1) of `discarded`
/// is the first bit below the kept LSB; absent positions read as zero.
constexpr RoundingBits extract_rounding_bits(std::uint64_t discarded, int bit_count) {
  RoundingBits rb;
  const auto bit_at = [&](int i) {
    const int pos = bit_count - 1 - i;
    return pos >= 0 && ((discarded >> pos) & 1u) != 0;
  };
  rb.g = bit_at(0);
  rb.r = bit_at(1);
  rb.t = bit_at(2);
  rb.e = bit_count > 3 &&
         (discarded & ((std::uint64_t{1} << (bit_count - 3)) - 1)) != 0;
  return rb;
}

/// Round-up decision: rnd = G & (R | T | E). The kept LSB is accepted for
/// interface symmetry with the hardware diagram but does not enter the
/// expression.
constexpr bool round_value([[maybe_unused]] bool kept_lsb, RoundingBits bits) {
  return bits.g && (bits.r || bits.t || bits.e);
}

struct TruncatedMantissa {
  std::uint64_t value = 0;   // top target_width bits of the fraction, rounded
  int exponent_carry = 0;    // 1 when rounding overflowed all kept bits
};

/// Keeps the top `target_width` bits of a 52-bit fraction and applies the
/// G/R/T/E round-up to the kept LSB. An all-ones overflow clears the value
/// and reports an exponent carry (the significand doubled). Width 52 is the
/// identity.
inline TruncatedMantissa truncate_round_mantissa(std::uint64_t mantissa, int target_width) {
  if (mantissa > kFractionMask) {
    throw std::invalid_argument("truncate_round_mantissa: fraction exceeds 52 bits");
  }
  bool known = false;
  for (int w : kMantissaWidths) known = known || (w == target_width);
  if (!known) {
    throw std::invalid_argument("truncate_round_mantissa: unsupported width " +
                                std::to_string(target_width));
  }
  if (target_width == kFractionBits) return {mantissa, 0};
  const int shift = kFractionBits - target_width;
  std::uint64_t kept = mantissa >> shift;
  const std::uint64_t tail = mantissa & ((std::uint64_t{1} << shift) - 1);
  const RoundingBits rb = extract_rounding_bits(tail, shift);
  kept += round_value((kept & 1u) != 0, rb) ? 1u : 0u;
  if (kept == (std::uint64_t{1} << target_width)) return {0, 1};
  return {kept, 0};
}

// --- auto-mode selection ------------------------------------------------------

/// Number of fraction bits from the field's top down to the lowest set bit.
constexpr int significant_length(std::uint64_t mantissa) {
  return mantissa == 0 ? 0 : kFractionBits - std::countr_zero(mantissa);
}

/// Smallest mode width covering the significant fraction bits of both
/// operands; falls back to M52 when nothing shorter suffices.
inline PrecisionMode auto_select(std::uint64_t mantissa_a, std::uint64_t mantissa_b) {
  const int need = std::max(significant_length(mantissa_a), significant_length(mantissa_b));
  for (std::size_t i = 0; i < kMantissaWidths.size(); ++i) {
    if (need <= kMantissaWidths[i]) return kFixedModes[i];
  }
  return PrecisionMode::M52;
}

// --- text interchange ----------------------------------------------------------

namespace detail {

inline int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

inline std::string_view strip_hex_prefix(std::string_view text) {
  if (text.size() > 2 && (text.substr(0, 2) == "0x" || text.substr(0, 2) == "0X")) {
    return text.substr(2);
  }
  return text;
}

}  // namespace detail

/// Parses exactly 16 hex digits (optional 0x prefix) into binary64 bits.
inline std::uint64_t double_bits_from_hex(std::string_view text) {
  const std::string_view digits = detail::strip_hex_prefix(text);
  if (digits.size() != 16) {
    throw ParseError("expected 16 hex digits for a binary64 value, got '" +
                     std::string(text) + "'");
  }
  std::uint64_t bits = 0;
  for (char c : digits) {
    const int d = detail::hex_digit(c);
    if (d < 0) throw ParseError("invalid hex digit in '" + std::string(text) + "'");
    bits = (bits << 4) | static_cast<std::uint64_t>(d);
  }
  return bits;
}

inline std::string hex_from_double_bits(std::uint64_t bits) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[bits & 0xF];
    bits >>= 4;
  }
  return out;
}

/// 17-hex-digit form of the packed operand (68 bits, top bit zero).
inline std::string to_hex17(PackedOperand p) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(17);
  out.push_back(kDigits[p.mode_bits() & 0x7]);
  out += hex_from_double_bits(p.value_bits());
  return out;
}

inline PackedOperand packed_from_hex17(std::string_view text) {
  const std::string_view digits = detail::strip_hex_prefix(text);
  if (digits.size() != 17) {
    throw ParseError("expected 17 hex digits for a packed operand, got '" +
                     std::string(text) + "'");
  }
  const int top = detail::hex_digit(digits[0]);
  if (top < 0) throw ParseError("invalid hex digit in '" + std::string(text) + "'");
  if (top > 7) {
    throw ParseError("packed operand exceeds 67 bits in '" + std::string(text) + "'");
  }
  const std::uint64_t low = double_bits_from_hex(digits.substr(1));
  return PackedOperand::from_raw((static_cast<Uint128>(top) << 64) | low);
}

/// (mode-string, 16-hex-digit double) pair form.
inline PackedOperand packed_from_mode_and_hex(std::string_view mode_text,
                                              std::string_view hex16) {
  return PackedOperand(mode_from_string(mode_text), double_bits_from_hex(hex16));
}

}  // namespace vpmm
