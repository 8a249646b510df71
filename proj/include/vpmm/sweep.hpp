// SPDX-License-Identifier: Apache-2.0
//
// Relative-error sweep across the fixed precision modes, measured against
// the 52-bit result. Drives the `sweep` CLI command.
#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "vpmm/fpmul.hpp"

namespace vpmm {

struct ModeErrorStats {
  PrecisionMode mode;
  double mean_rel_err = 0.0;
  double max_rel_err = 0.0;
};

using SweepReport = std::array<ModeErrorStats, 5>;

/// Deterministic operand pairs: positive sign, zero exponent (values in
/// [1, 2)), fraction bits straight from the engine stream. Isolates
/// mantissa effects from range effects.
inline std::vector<std::pair<double, double>> sweep_pairs(std::size_t samples,
                                                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto draw = [&] {
    const std::uint64_t bits =
        (static_cast<std::uint64_t>(kExponentBias) << kFractionBits) | (rng() >> 12);
    return std::bit_cast<double>(bits);
  };
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    const double a = draw();
    const double b = draw();
    pairs.emplace_back(a, b);
  }
  return pairs;
}

/// Mean and max relative error per mode over the given pairs, with the
/// mode-52 product of each pair as the reference.
inline SweepReport sweep_errors(std::span<const std::pair<double, double>> pairs) {
  SweepReport report{};
  for (std::size_t i = 0; i < kFixedModes.size(); ++i) report[i].mode = kFixedModes[i];
  if (pairs.empty()) return report;
  for (const auto& [a, b] : pairs) {
    const double reference = multiply(a, b, PrecisionMode::M52).value();
    for (std::size_t i = 0; i < kFixedModes.size(); ++i) {
      const double got = multiply(a, b, kFixedModes[i]).value();
      const double rel = std::abs(got - reference) / std::abs(reference);
      report[i].mean_rel_err += rel;
      report[i].max_rel_err = std::max(report[i].max_rel_err, rel);
    }
  }
  for (ModeErrorStats& row : report) {
    row.mean_rel_err /= static_cast<double>(pairs.size());
  }
  return report;
}

inline void write_sweep_csv(std::ostream& out, const SweepReport& report) {
  const auto num = [](double v) {
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
  };
  out << "mode,mean_rel_err,max_rel_err\n";
  for (const ModeErrorStats& row : report) {
    out << to_string(row.mode) << ',' << num(row.mean_rel_err) << ','
        << num(row.max_rel_err) << '\n';
  }
}

}  // namespace vpmm
