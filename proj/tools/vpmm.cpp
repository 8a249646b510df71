// SPDX-License-Identifier: Apache-2.0
//
// vpmm: multi-precision floating-point matrix multiplication tool.
//
// Subcommands:
//   matmul        multiply two matrix files at a chosen precision mode
//   modes-report  one scalar product across every mode, tabulated
//   sweep         random-operand relative-error sweep, CSV output
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "vpmm/format.hpp"
#include "vpmm/fpmul.hpp"
#include "vpmm/matmul.hpp"
#include "vpmm/matrix_io.hpp"
#include "vpmm/sweep.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitOrder = 3;
constexpr int kExitModeSelect = 4;

// Operand text forms: 16 hex digits (binary64), 17 hex digits (packed,
// mode bits validated) or "MODE:HEX16".
std::uint64_t operand_bits_from_text(const std::string& text) {
  if (const auto colon = text.find(':'); colon != std::string::npos) {
    return vpmm::packed_from_mode_and_hex(text.substr(0, colon), text.substr(colon + 1))
        .value_bits();
  }
  const auto digits = vpmm::detail::strip_hex_prefix(text);
  if (digits.size() == 17) {
    const vpmm::PackedOperand p = vpmm::packed_from_hex17(text);
    vpmm::decode_mode(p.mode_bits());
    return p.value_bits();
  }
  return vpmm::double_bits_from_hex(text);
}

std::string flags_text(const vpmm::FpResult& r) {
  std::string out;
  const auto append = [&](bool set, const char* name) {
    if (!set) return;
    if (!out.empty()) out += ',';
    out += name;
  };
  append(r.flag_zero, "zero");
  append(r.flag_infinity, "infinity");
  append(r.flag_nan, "nan");
  append(r.flag_denormal, "denormal");
  append(r.flag_mode_select_error, "mode-select-error");
  return out.empty() ? "-" : out;
}

double significand_of(double v) {
  if (v == 0.0 || !std::isfinite(v)) return v;
  return std::ldexp(std::fabs(v), -std::ilogb(std::fabs(v)));
}

std::string decimal_text(double v) {
  char buf[64];
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
  if (v == 0.0) return std::signbit(v) ? "-0.0" : "0.0";
  const int e = std::ilogb(std::fabs(v));
  const double s = std::ldexp(std::fabs(v), -e);
  std::snprintf(buf, sizeof buf, "%s%.9fx2^%d", std::signbit(v) ? "-" : "", s, e);
  return buf;
}

struct MatmulArgs {
  std::string file_a;
  std::string file_b;
  std::string mode = "52";
  std::string algorithm = "strassen";
  bool counters = false;
  std::optional<std::string> format;
};

void run_matmul(const MatmulArgs& args) {
  const vpmm::ParsedMatrix a = vpmm::read_matrix_file(args.file_a);
  const vpmm::ParsedMatrix b = vpmm::read_matrix_file(args.file_b);
  const vpmm::PrecisionMode mode = vpmm::mode_from_string(args.mode);

  vpmm::MatmulResult result = [&] {
    if (args.algorithm == "classical") {
      return vpmm::strassen_blocked(a.matrix, b.matrix, mode, vpmm::BaseKernel::Classical,
                                    0);
    }
    if (args.algorithm == "strassen") {
      return vpmm::strassen_blocked(a.matrix, b.matrix, mode);
    }
    return vpmm::strassen_fused_topdown(a.matrix, b.matrix, mode);
  }();

  vpmm::NumberFormat out_format = vpmm::NumberFormat::Dec;
  if (args.format.has_value()) {
    out_format = *args.format == "hex" ? vpmm::NumberFormat::Hex : vpmm::NumberFormat::Dec;
  } else if (a.any_hex || b.any_hex) {
    out_format = vpmm::NumberFormat::Hex;
  }
  vpmm::write_matrix(std::cout, result.product, out_format);
  if (args.counters) {
    std::cout << "multiplications: " << result.counters.multiplications << '\n';
    std::cout << "additions: " << result.counters.additions << '\n';
  }
}

void run_modes_report(const std::string& a_text, const std::string& b_text) {
  const std::uint64_t a_bits = operand_bits_from_text(a_text);
  const std::uint64_t b_bits = operand_bits_from_text(b_text);

  const vpmm::FpResult reference =
      vpmm::multiply(vpmm::PackedOperand(vpmm::PrecisionMode::M52, a_bits),
                     vpmm::PackedOperand(vpmm::PrecisionMode::M52, b_bits));
  const double sig_reference = significand_of(reference.value());

  std::printf("%-5s %-17s %-19s %-12s %s\n", "mode", "product", "value", "variation",
              "flags");
  const vpmm::PrecisionMode rows[] = {vpmm::PrecisionMode::Auto, vpmm::PrecisionMode::M8,
                                      vpmm::PrecisionMode::M16, vpmm::PrecisionMode::M23,
                                      vpmm::PrecisionMode::M36, vpmm::PrecisionMode::M52};
  for (const vpmm::PrecisionMode mode : rows) {
    const vpmm::FpResult r = vpmm::multiply(vpmm::PackedOperand(mode, a_bits),
                                            vpmm::PackedOperand(mode, b_bits));
    const double sig = significand_of(r.value());
    std::string variation = "-";
    if (std::isfinite(sig) && std::isfinite(sig_reference)) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.9f", std::fabs(sig - sig_reference));
      variation = buf;
    }
    std::printf("%-5s %-17s %-19s %-12s %s\n", vpmm::to_string(mode).c_str(),
                vpmm::hex_from_double_bits(r.product).c_str(),
                decimal_text(r.value()).c_str(), variation.c_str(),
                flags_text(r).c_str());
  }
}

void run_sweep(std::uint64_t samples, std::uint64_t seed,
               const std::optional<std::string>& out_path) {
  const auto pairs = vpmm::sweep_pairs(samples, seed);
  const vpmm::SweepReport report = vpmm::sweep_errors(pairs);
  if (out_path.has_value()) {
    std::ofstream out(*out_path);
    if (!out) throw vpmm::ParseError(*out_path + ": cannot open for writing");
    vpmm::write_sweep_csv(out, report);
    if (!out.flush()) throw vpmm::ParseError(*out_path + ": write failed");
  } else {
    vpmm::write_sweep_csv(std::cout, report);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "vpmm: multi-precision floating-point matrix multiplication.\n"
      "Matrix files: first line holds the order n (a power of two), followed\n"
      "by n rows of n whitespace-separated values; a value is either a\n"
      "decimal literal or an 0x-prefixed 16-hex-digit binary64 pattern.\n"
      "Exit codes: 0 ok, 2 parse error, 3 order mismatch, 4 mode-select error."};
  app.require_subcommand(1);

  MatmulArgs matmul_args;
  CLI::App* matmul = app.add_subcommand("matmul", "Multiply two matrix files");
  matmul->add_option("file_a", matmul_args.file_a, "left operand matrix file")->required();
  matmul->add_option("file_b", matmul_args.file_b, "right operand matrix file")->required();
  matmul->add_option("--mode", matmul_args.mode, "precision mode")
      ->check(CLI::IsMember({"auto", "8", "16", "23", "36", "52"}))
      ->default_val("52");
  matmul->add_option("--algorithm", matmul_args.algorithm, "multiplication algorithm")
      ->check(CLI::IsMember({"classical", "strassen", "fused"}))
      ->default_val("strassen");
  matmul->add_flag("--counters", matmul_args.counters,
                   "print multiplication/addition counts");
  matmul->add_option("--format", matmul_args.format,
                     "output format (default: hex if any input value was hex)")
      ->check(CLI::IsMember({"hex", "dec"}));

  std::string report_a, report_b;
  CLI::App* report = app.add_subcommand(
      "modes-report", "Multiply two scalars in every precision mode.\n"
                      "Operands: 16 hex digits (binary64), 17 hex digits (packed\n"
                      "operand) or MODE:HEX16.");
  report->add_option("a", report_a, "left operand")->required();
  report->add_option("b", report_b, "right operand")->required();

  std::uint64_t sweep_samples = 0;
  std::uint64_t sweep_seed = 0;
  std::optional<std::string> sweep_out;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "Relative-error sweep against the 52-bit mode over random\n"
               "operand pairs drawn with positive sign and exponent 0\n"
               "(values in [1,2), isolating mantissa effects). CSV columns:\n"
               "mode,mean_rel_err,max_rel_err.");
  sweep->add_option("samples", sweep_samples, "number of random pairs")
      ->required()
      ->check(CLI::PositiveNumber);
  sweep->add_option("--seed", sweep_seed, "RNG seed")->default_val("0");
  sweep->add_option("--out", sweep_out, "output CSV path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitParse;
  }

  try {
    if (matmul->parsed()) {
      run_matmul(matmul_args);
    } else if (report->parsed()) {
      run_modes_report(report_a, report_b);
    } else if (sweep->parsed()) {
      run_sweep(sweep_samples, sweep_seed, sweep_out);
    }
    return kExitOk;
  } catch (const vpmm::InvalidModeEncoding& e) {
    std::cerr << "vpmm: " << e.what() << '\n';
    return kExitParse;
  } catch (const vpmm::ParseError& e) {
    std::cerr << "vpmm: " << e.what() << '\n';
    return kExitParse;
  } catch (const vpmm::OrderMismatch& e) {
    std::cerr << "vpmm: " << e.what() << '\n';
    return kExitOrder;
  } catch (const vpmm::ModeSelectError& e) {
    std::cerr << "vpmm: " << e.what() << '\n';
    return kExitModeSelect;
  } catch (const std::exception& e) {
    std::cerr << "vpmm: " << e.what() << '\n';
    return 1;
  }
}
