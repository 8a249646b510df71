// SPDX-License-Identifier: Apache-2.0
//
// Matrix multiplication engines over the mode-aware scalar multiplier:
// classical and seven-multiplication 2x2 kernels, blocked recursion for
// order 2^p, a fused top-down variant accumulating partial products over
// the block index, and operation counters.
#pragma once

#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <future>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vpmm/fpmul.hpp"

namespace vpmm {

struct OrderMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised if a scalar multiply inside an engine reports a mode-select
/// error. The engines pack both factors with identical mode bits, so this
/// is unreachable unless the packing logic itself regresses.
struct ModeSelectError : std::logic_error {
  using std::logic_error::logic_error;
};

/// Square row-major matrix of binary64 values.
class Matrix {
 public:
  Matrix() = default;

  explicit Matrix(std::size_t order)
      : order_(order), elems_(checked_size(order), 0.0) {}

  Matrix(std::size_t order, std::vector<double> elems)
      : order_(order), elems_(std::move(elems)) {
    if (elems_.size() != checked_size(order)) {
      throw std::invalid_argument("Matrix: element count does not match order");
    }
  }

  static Matrix identity(std::size_t order) {
    Matrix m(order);
    for (std::size_t i = 0; i < order; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t order() const { return order_; }

  double& operator()(std::size_t i, std::size_t j) { return elems_[i * order_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return elems_[i * order_ + j]; }

  const std::vector<double>& elements() const { return elems_; }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    if (a.order_ != b.order_) return false;
    // Bitwise comparison: distinguishes +0/-0 and does not equate NaNs away.
    for (std::size_t k = 0; k < a.elems_.size(); ++k) {
      if (std::bit_cast<std::uint64_t>(a.elems_[k]) !=
          std::bit_cast<std::uint64_t>(b.elems_[k])) {
        return false;
      }
    }
    return true;
  }

 private:
  static std::size_t checked_size(std::size_t order) {
    if (order == 0) throw std::invalid_argument("Matrix: order must be positive");
    return order * order;
  }

  std::size_t order_ = 0;
  std::vector<double> elems_;
};

/// Scalar multiply and add/subtract tallies; merging is field-wise.
struct OpCounters {
  std::uint64_t multiplications = 0;
  std::uint64_t additions = 0;  // additions and subtractions pooled

  OpCounters& operator+=(const OpCounters& o) {
    multiplications += o.multiplications;
    additions += o.additions;
    return *this;
  }
  friend OpCounters operator+(OpCounters a, const OpCounters& b) { return a += b; }
  friend bool operator==(const OpCounters&, const OpCounters&) = default;
};

enum class BaseKernel { Classical, Strassen };

inline constexpr int kUnlimitedStrassenLevels = -1;

struct MatmulResult {
  Matrix product;
  OpCounters counters;
};

namespace detail {

inline double mode_mul(double x, double y, PrecisionMode mode, OpCounters& c) {
  const FpResult r = multiply(x, y, mode);
  if (r.flag_mode_select_error) {
    throw ModeSelectError("scalar multiply reported a mode-select error");
  }
  ++c.multiplications;
  return r.value();
}

inline double add(double x, double y, OpCounters& c) {
  ++c.additions;
  return x + y;
}

inline double sub(double x, double y, OpCounters& c) {
  ++c.additions;
  return x - y;
}

inline void require_order_2(const Matrix& a, const Matrix& b) {
  if (a.order() != 2 || b.order() != 2) {
    throw OrderMismatch("2x2 kernel requires order-2 operands");
  }
}

inline Matrix quadrant(const Matrix& m, std::size_t qi, std::size_t qj) {
  const std::size_t h = m.order() / 2;
  Matrix q(h);
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < h; ++j) q(i, j) = m(qi * h + i, qj * h + j);
  }
  return q;
}

inline void set_quadrant(Matrix& m, std::size_t qi, std::size_t qj, const Matrix& q) {
  const std::size_t h = m.order() / 2;
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < h; ++j) m(qi * h + i, qj * h + j) = q(i, j);
  }
}

inline Matrix block_add(const Matrix& x, const Matrix& y, OpCounters& c) {
  Matrix out(x.order());
  for (std::size_t i = 0; i < x.order(); ++i) {
    for (std::size_t j = 0; j < x.order(); ++j) out(i, j) = add(x(i, j), y(i, j), c);
  }
  return out;
}

inline Matrix block_sub(const Matrix& x, const Matrix& y, OpCounters& c) {
  Matrix out(x.order());
  for (std::size_t i = 0; i < x.order(); ++i) {
    for (std::size_t j = 0; j < x.order(); ++j) out(i, j) = sub(x(i, j), y(i, j), c);
  }
  return out;
}

}  // namespace detail

/// Classical 2x2 product: eight scalar multiplies, four additions.
inline MatmulResult classical_2x2(const Matrix& a, const Matrix& b, PrecisionMode mode) {
  detail::require_order_2(a, b);
  OpCounters c;
  Matrix p(2);
  const auto mul = [&](double x, double y) { return detail::mode_mul(x, y, mode, c); };
  p(0, 0) = detail::add(mul(a(0, 0), b(0, 0)), mul(a(0, 1), b(1, 0)), c);
  p(0, 1) = detail::add(mul(a(0, 0), b(0, 1)), mul(a(0, 1), b(1, 1)), c);
  p(1, 0) = detail::add(mul(a(1, 0), b(0, 0)), mul(a(1, 1), b(1, 0)), c);
  p(1, 1) = detail::add(mul(a(1, 0), b(0, 1)), mul(a(1, 1), b(1, 1)), c);
  return {std::move(p), c};
}

/// Seven-multiplication 2x2 product: partial products S1..S7, then the
/// fixed recombination. Seven multiplies, eighteen additions/subtractions.
inline MatmulResult strassen_2x2(const Matrix& a, const Matrix& b, PrecisionMode mode) {
  detail::require_order_2(a, b);
  OpCounters c;
  const auto mul = [&](double x, double y) { return detail::mode_mul(x, y, mode, c); };
  const auto add = [&](double x, double y) { return detail::add(x, y, c); };
  const auto sub = [&](double x, double y) { return detail::sub(x, y, c); };

  const double s1 = mul(add(a(0, 0), a(1, 1)), add(b(0, 0), b(1, 1)));
  const double s2 = mul(add(a(1, 0), a(1, 1)), b(0, 0));
  const double s3 = mul(a(0, 0), sub(b(0, 1), b(1, 1)));
  const double s4 = mul(a(1, 1), sub(b(1, 0), b(0, 0)));
  const double s5 = mul(add(a(0, 0), a(0, 1)), b(1, 1));
  const double s6 = mul(sub(a(1, 0), a(0, 0)), add(b(0, 0), b(0, 1)));
  const double s7 = mul(sub(a(0, 1), a(1, 1)), add(b(1, 0), b(1, 1)));

  Matrix p(2);
  p(0, 0) = add(sub(add(s1, s4), s5), s7);
  p(0, 1) = add(s3, s5);
  p(1, 0) = add(s2, s4);
  p(1, 1) = add(add(sub(s1, s2), s3), s6);
  return {std::move(p), c};
}

namespace detail {

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline MatmulResult strassen_recurse(const Matrix& a, const Matrix& b, PrecisionMode mode,
                                     BaseKernel base, int strassen_levels, bool parallel) {
  if (a.order() == 2) {
    return base == BaseKernel::Strassen ? strassen_2x2(a, b, mode)
                                        : classical_2x2(a, b, mode);
  }

  const Matrix a00 = quadrant(a, 0, 0), a01 = quadrant(a, 0, 1);
  const Matrix a10 = quadrant(a, 1, 0), a11 = quadrant(a, 1, 1);
  const Matrix b00 = quadrant(b, 0, 0), b01 = quadrant(b, 0, 1);
  const Matrix b10 = quadrant(b, 1, 0), b11 = quadrant(b, 1, 1);

  OpCounters c;
  Matrix p(a.order());

  if (strassen_levels == 0) {
    // Classical block recursion: eight sub-products, four block additions.
    const auto mul = [&](const Matrix& x, const Matrix& y) {
      MatmulResult r = strassen_recurse(x, y, mode, base, 0, false);
      c += r.counters;
      return std::move(r.product);
    };
    set_quadrant(p, 0, 0, block_add(mul(a00, b00), mul(a01, b10), c));
    set_quadrant(p, 0, 1, block_add(mul(a00, b01), mul(a01, b11), c));
    set_quadrant(p, 1, 0, block_add(mul(a10, b00), mul(a11, b10), c));
    set_quadrant(p, 1, 1, block_add(mul(a10, b01), mul(a11, b11), c));
    return {std::move(p), c};
  }

  const int next_levels =
      strassen_levels == kUnlimitedStrassenLevels ? kUnlimitedStrassenLevels
                                                  : strassen_levels - 1;

  // Ten block pre-sums feeding the seven independent sub-products.
  const Matrix t1a = block_add(a00, a11, c), t1b = block_add(b00, b11, c);
  const Matrix t2a = block_add(a10, a11, c);
  const Matrix t3b = block_sub(b01, b11, c);
  const Matrix t4b = block_sub(b10, b00, c);
  const Matrix t5a = block_add(a00, a01, c);
  const Matrix t6a = block_sub(a10, a00, c), t6b = block_add(b00, b01, c);
  const Matrix t7a = block_sub(a01, a11, c), t7b = block_add(b10, b11, c);

  std::array<MatmulResult, 7> s;
  const std::array<std::pair<const Matrix*, const Matrix*>, 7> operands{{
      {&t1a, &t1b}, {&t2a, &b00}, {&a00, &t3b}, {&a11, &t4b},
      {&t5a, &b11}, {&t6a, &t6b}, {&t7a, &t7b},
  }};
  if (parallel) {
    std::array<std::future<MatmulResult>, 7> futures;
    for (std::size_t k = 0; k < 7; ++k) {
      futures[k] = std::async(std::launch::async, [&, k] {
        return strassen_recurse(*operands[k].first, *operands[k].second, mode, base,
                                next_levels, false);
      });
    }
    for (std::size_t k = 0; k < 7; ++k) s[k] = futures[k].get();
  } else {
    for (std::size_t k = 0; k < 7; ++k) {
      s[k] = strassen_recurse(*operands[k].first, *operands[k].second, mode, base,
                              next_levels, false);
    }
  }
  // Counters merged in a fixed order; the totals are schedule-independent.
  for (const MatmulResult& r : s) c += r.counters;

  const Matrix& s1 = s[0].product;
  const Matrix& s2 = s[1].product;
  const Matrix& s3 = s[2].product;
  const Matrix& s4 = s[3].product;
  const Matrix& s5 = s[4].product;
  const Matrix& s6 = s[5].product;
  const Matrix& s7 = s[6].product;
  set_quadrant(p, 0, 0, block_add(block_sub(block_add(s1, s4, c), s5, c), s7, c));
  set_quadrant(p, 0, 1, block_add(s3, s5, c));
  set_quadrant(p, 1, 0, block_add(s2, s4, c));
  set_quadrant(p, 1, 1, block_add(block_add(block_sub(s1, s2, c), s3, c), s6, c));
  return {std::move(p), c};
}

}  // namespace detail

/// Blocked recursion for order n = 2^p. `strassen_levels` caps how many
/// recursion levels use the seven-product split before switching to the
/// classical eight-product split (-1 = no cap); `base` picks the order-2
/// kernel. With the Strassen base and no cap the multiply counter is
/// 7^log2(n); with level cap 0 and the classical base it is n^3.
/// When `parallel` is set the sub-products of the top level are evaluated
/// concurrently; results and counters are identical to the serial run.
inline MatmulResult strassen_blocked(const Matrix& a, const Matrix& b, PrecisionMode mode,
                                     BaseKernel base = BaseKernel::Strassen,
                                     int strassen_levels = kUnlimitedStrassenLevels,
                                     bool parallel = false) {
  if (a.order() != b.order()) {
    throw OrderMismatch("operand orders differ: " + std::to_string(a.order()) + " vs " +
                        std::to_string(b.order()));
  }
  if (a.order() < 2 || !detail::is_power_of_two(a.order())) {
    throw OrderMismatch("order " + std::to_string(a.order()) +
                        " is not a power of two >= 2");
  }
  return detail::strassen_recurse(a, b, mode, base, strassen_levels, parallel);
}

/// Per-tile sum terms of the fused top-down variant over an m x m grid of
/// 2x2 tiles. alpha[t] is indexed by (i, k), beta[t] by (k, j), row-major.
struct AlphaBeta {
  std::size_t m = 0;
  std::array<std::vector<double>, 5> alpha;
  std::array<std::vector<double>, 5> beta;
};

inline AlphaBeta compute_alpha_beta(const Matrix& a, const Matrix& b, OpCounters& c) {
  const std::size_t m = a.order() / 2;
  AlphaBeta ab;
  ab.m = m;
  for (auto& plane : ab.alpha) plane.assign(m * m, 0.0);
  for (auto& plane : ab.beta) plane.assign(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t r = 2 * i, col = 2 * k, idx = i * m + k;
      ab.alpha[0][idx] = detail::add(a(r, col), a(r + 1, col + 1), c);
      ab.alpha[1][idx] = detail::add(a(r + 1, col), a(r + 1, col + 1), c);
      ab.alpha[2][idx] = detail::add(a(r, col), a(r, col + 1), c);
      ab.alpha[3][idx] = detail::sub(a(r + 1, col), a(r, col), c);
      ab.alpha[4][idx] = detail::sub(a(r, col + 1), a(r + 1, col + 1), c);
    }
  }
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t r = 2 * k, col = 2 * j, idx = k * m + j;
      ab.beta[0][idx] = detail::add(b(r, col), b(r + 1, col + 1), c);
      ab.beta[1][idx] = detail::sub(b(r, col + 1), b(r + 1, col + 1), c);
      ab.beta[2][idx] = detail::sub(b(r + 1, col), b(r, col), c);
      ab.beta[3][idx] = detail::add(b(r, col), b(r, col + 1), c);
      ab.beta[4][idx] = detail::add(b(r + 1, col), b(r + 1, col + 1), c);
    }
  }
  return ab;
}

/// Fused top-down variant: one level of 2x2 tiling; for every output tile
/// the seven partial-product sums run over the tile index k (ascending,
/// left to right) before a single recombination. 7 * m * (n/2)^2 scalar
/// multiplies for order n = 2m.
inline MatmulResult strassen_fused_topdown(const Matrix& a, const Matrix& b,
                                           PrecisionMode mode) {
  if (a.order() != b.order()) {
    throw OrderMismatch("operand orders differ: " + std::to_string(a.order()) + " vs " +
                        std::to_string(b.order()));
  }
  if (a.order() % 2 != 0) {
    throw OrderMismatch("order " + std::to_string(a.order()) + " is odd");
  }
  const std::size_t m = a.order() / 2;
  OpCounters c;
  const AlphaBeta ab = compute_alpha_beta(a, b, c);
  const auto mul = [&](double x, double y) { return detail::mode_mul(x, y, mode, c); };

  Matrix p(a.order());
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      std::array<double, 7> s{};
      for (std::size_t k = 0; k < m; ++k) {
        const std::size_t ik = i * m + k, kj = k * m + j;
        const std::array<double, 7> term{
            mul(ab.alpha[0][ik], ab.beta[0][kj]),
            mul(ab.alpha[1][ik], b(2 * k, 2 * j)),
            mul(a(2 * i, 2 * k), ab.beta[1][kj]),
            mul(a(2 * i + 1, 2 * k + 1), ab.beta[2][kj]),
            mul(ab.alpha[2][ik], b(2 * k + 1, 2 * j + 1)),
            mul(ab.alpha[3][ik], ab.beta[3][kj]),
            mul(ab.alpha[4][ik], ab.beta[4][kj]),
        };
        for (std::size_t t = 0; t < 7; ++t) {
          s[t] = k == 0 ? term[t] : detail::add(s[t], term[t], c);
        }
      }
      p(2 * i, 2 * j) = detail::add(detail::sub(detail::add(s[0], s[3], c), s[4], c), s[6], c);
      p(2 * i, 2 * j + 1) = detail::add(s[2], s[4], c);
      p(2 * i + 1, 2 * j) = detail::add(s[1], s[3], c);
      p(2 * i + 1, 2 * j + 1) =
          detail::add(detail::add(detail::sub(s[0], s[1], c), s[2], c), s[5], c);
    }
  }
  return {std::move(p), c};
}

/// Plain triple-loop product in host binary64 arithmetic; no counters, no
/// mode. Test oracle only.
inline Matrix classical_reference(const Matrix& a, const Matrix& b) {
  if (a.order() != b.order()) {
    throw OrderMismatch("operand orders differ: " + std::to_string(a.order()) + " vs " +
                        std::to_string(b.order()));
  }
  const std::size_t n = a.order();
  Matrix p(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = a(i, 0) * b(0, j);
      for (std::size_t k = 1; k < n; ++k) acc += a(i, k) * b(k, j);
      p(i, j) = acc;
    }
  }
  return p;
}

}  // namespace vpmm
