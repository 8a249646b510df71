// SPDX-License-Identifier: Apache-2.0
//
// Text interchange for matrices: a header line with the order n followed by
// n rows of n whitespace-separated values. A value is either a 16-hex-digit
// binary64 pattern with an 0x prefix (bit-exact) or a decimal literal.
#pragma once

#include <bit>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "vpmm/format.hpp"
#include "vpmm/matmul.hpp"

namespace vpmm {

enum class NumberFormat { Hex, Dec };

struct ParsedMatrix {
  Matrix matrix;
  bool any_hex = false;  // true if at least one value used the hex form
};

namespace detail {

[[noreturn]] inline void parse_fail(std::string_view source, std::size_t line,
                                    const std::string& message) {
  throw ParseError(std::string(source) + ":" + std::to_string(line) + ": " + message);
}

inline double parse_value(std::string_view token, std::string_view source,
                          std::size_t line, bool& is_hex) {
  if (token.size() > 2 && (token.substr(0, 2) == "0x" || token.substr(0, 2) == "0X")) {
    is_hex = true;
    try {
      return std::bit_cast<double>(double_bits_from_hex(token));
    } catch (const ParseError& e) {
      parse_fail(source, line, e.what());
    }
  }
  is_hex = false;
  double value = 0.0;
  const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || end != token.data() + token.size()) {
    parse_fail(source, line, "invalid value '" + std::string(token) + "'");
  }
  return value;
}

}  // namespace detail

/// Parses a matrix; errors name the source and line. Blank lines are
/// ignored. Each row must sit on one line with exactly n values.
inline ParsedMatrix parse_matrix(std::istream& in, std::string_view source) {
  std::string line;
  std::size_t line_no = 0;

  const auto next_content_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    ++line_no;
    return false;
  };

  if (!next_content_line()) detail::parse_fail(source, line_no, "missing order line");
  std::size_t order = 0;
  {
    std::istringstream hs(line);
    std::string token, extra;
    hs >> token;
    const auto [end, ec] =
        std::from_chars(token.data(), token.data() + token.size(), order);
    if (ec != std::errc{} || end != token.data() + token.size() || order == 0) {
      detail::parse_fail(source, line_no, "malformed order '" + token + "'");
    }
    if (hs >> extra) {
      detail::parse_fail(source, line_no, "unexpected token '" + extra + "' after order");
    }
  }

  ParsedMatrix out{Matrix(order), false};
  for (std::size_t i = 0; i < order; ++i) {
    if (!next_content_line()) {
      detail::parse_fail(source, line_no,
                         "expected " + std::to_string(order) + " rows, got " +
                             std::to_string(i));
    }
    std::istringstream rs(line);
    std::string token;
    for (std::size_t j = 0; j < order; ++j) {
      if (!(rs >> token)) {
        detail::parse_fail(source, line_no,
                           "row has " + std::to_string(j) + " values, expected " +
                               std::to_string(order));
      }
      bool is_hex = false;
      out.matrix(i, j) = detail::parse_value(token, source, line_no, is_hex);
      out.any_hex = out.any_hex || is_hex;
    }
    if (rs >> token) {
      detail::parse_fail(source, line_no, "row has more than " + std::to_string(order) +
                                              " values");
    }
  }
  return out;
}

inline ParsedMatrix read_matrix_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  return parse_matrix(in, path.string());
}

/// Shortest decimal form that parses back to the same bits, or the
/// bit-exact hex form.
inline std::string format_value(double v, NumberFormat format) {
  if (format == NumberFormat::Hex) {
    return "0x" + hex_from_double_bits(std::bit_cast<std::uint64_t>(v));
  }
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

inline void write_matrix(std::ostream& out, const Matrix& m, NumberFormat format) {
  out << m.order() << '\n';
  for (std::size_t i = 0; i < m.order(); ++i) {
    for (std::size_t j = 0; j < m.order(); ++j) {
      if (j != 0) out << ' ';
      out << format_value(m(i, j), format);
    }
    out << '\n';
  }
}

}  // namespace vpmm
