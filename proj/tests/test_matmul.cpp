// SPDX-License-Identifier: Apache-2.0
#include "vpmm/matmul.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support/oracles.hpp"

using namespace vpmm;

namespace {

Matrix random_integer_matrix(std::size_t order, std::mt19937_64& rng, int magnitude_bits) {
  Matrix m(order);
  const std::int64_t bound = std::int64_t{1} << magnitude_bits;
  std::uniform_int_distribution<std::int64_t> dist(-bound, bound);
  for (std::size_t i = 0; i < order; ++i) {
    for (std::size_t j = 0; j < order; ++j) m(i, j) = static_cast<double>(dist(rng));
  }
  return m;
}

Matrix random_unit_range_matrix(std::size_t order, std::mt19937_64& rng) {
  Matrix m(order);
  for (std::size_t i = 0; i < order; ++i) {
    for (std::size_t j = 0; j < order; ++j) {
      m(i, j) = std::bit_cast<double>((std::uint64_t{1023} << 52) | (rng() >> 12));
    }
  }
  return m;
}

// Entries in [1, 2) on a 2^-40 grid: every pre-sum and recombination of the
// seven-multiply kernels stays exactly representable, so identity
// passthrough is exact.
Matrix random_coarse_matrix(std::size_t order, std::mt19937_64& rng) {
  Matrix m(order);
  for (std::size_t i = 0; i < order; ++i) {
    for (std::size_t j = 0; j < order; ++j) {
      const std::uint64_t fraction = (rng() & ((std::uint64_t{1} << 40) - 1)) << 12;
      m(i, j) = std::bit_cast<double>((std::uint64_t{1023} << 52) | fraction);
    }
  }
  return m;
}

const Matrix kA2{2, {1, 2, 3, 4}};
const Matrix kB2{2, {5, 6, 7, 8}};
const Matrix kAB2{2, {19, 22, 43, 50}};

}  // namespace

TEST(Classical2x2, IdentityAndCounters) {
  const auto [p, c] = classical_2x2(Matrix::identity(2), Matrix::identity(2),
                                    PrecisionMode::M52);
  EXPECT_TRUE(p == Matrix::identity(2));
  EXPECT_EQ(c.multiplications, 8u);
  EXPECT_EQ(c.additions, 4u);
}

TEST(Classical2x2, IntegerProduct) {
  const auto [p, c] = classical_2x2(kA2, kB2, PrecisionMode::M52);
  EXPECT_TRUE(p == kAB2);
  EXPECT_EQ(c.multiplications, 8u);
}

TEST(Classical2x2, ZeroAnnihilates) {
  const auto [p, c] = classical_2x2(Matrix(2), kB2, PrecisionMode::M8);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      EXPECT_EQ(unpack_double_bits(oracles::bits_of(p(i, j))).cls, FloatClass::Zero);
    }
  }
}

TEST(Classical2x2, RejectsWrongOrder) {
  EXPECT_THROW(classical_2x2(Matrix(4), Matrix(4), PrecisionMode::M52), OrderMismatch);
}

TEST(Strassen2x2, IdentityAndCounters) {
  const auto [p, c] = strassen_2x2(Matrix::identity(2), Matrix::identity(2),
                                   PrecisionMode::M52);
  EXPECT_TRUE(p == Matrix::identity(2));
  EXPECT_EQ(c.multiplications, 7u);
  EXPECT_EQ(c.additions, 18u);
}

TEST(Strassen2x2, IntegerProductMatchesClassical) {
  const auto [p, c] = strassen_2x2(kA2, kB2, PrecisionMode::M52);
  EXPECT_TRUE(p == kAB2);
  EXPECT_EQ(c.multiplications, 7u);
  EXPECT_EQ(c.additions, 18u);
}

TEST(Strassen2x2, IdentityPassesThroughExactly) {
  std::mt19937_64 rng(3);
  for (int n = 0; n < 1000; ++n) {
    const Matrix b = random_coarse_matrix(2, rng);
    const auto [p, c] = strassen_2x2(Matrix::identity(2), b, PrecisionMode::M52);
    ASSERT_TRUE(p == b);
  }
}

TEST(StrassenBlocked, IdentityOrder4) {
  const auto [p, c] = strassen_blocked(Matrix::identity(4), Matrix::identity(4),
                                       PrecisionMode::M52);
  EXPECT_TRUE(p == Matrix::identity(4));
  EXPECT_EQ(c.multiplications, 49u);
}

TEST(StrassenBlocked, IntegerMatricesMatchOracleExactly) {
  std::mt19937_64 rng(5);
  for (const std::size_t order : {2u, 4u, 8u}) {
    const Matrix a = random_integer_matrix(order, rng, 10);
    const Matrix b = random_integer_matrix(order, rng, 10);
    const auto [p, c] = strassen_blocked(a, b, PrecisionMode::M52);
    ASSERT_TRUE(p == classical_reference(a, b)) << "order " << order;
  }
}

TEST(StrassenBlocked, MultiplicationCounterLaw) {
  std::mt19937_64 rng(7);
  std::uint64_t expected = 7;
  for (const std::size_t order : {2u, 4u, 8u, 16u}) {
    const Matrix a = random_integer_matrix(order, rng, 4);
    const Matrix b = random_integer_matrix(order, rng, 4);
    const auto [p, c] = strassen_blocked(a, b, PrecisionMode::M52);
    EXPECT_EQ(c.multiplications, expected) << "order " << order;
    expected *= 7;
  }
}

TEST(StrassenBlocked, ClassicalRecursionCountsCubically) {
  std::mt19937_64 rng(9);
  for (const std::size_t order : {2u, 4u, 8u, 16u}) {
    const Matrix a = random_integer_matrix(order, rng, 4);
    const Matrix b = random_integer_matrix(order, rng, 4);
    const auto [p, c] =
        strassen_blocked(a, b, PrecisionMode::M52, BaseKernel::Classical, 0);
    EXPECT_EQ(c.multiplications, static_cast<std::uint64_t>(order) * order * order);
    ASSERT_TRUE(p == classical_reference(a, b));
  }
}

TEST(StrassenBlocked, ClassicalBaseUnderStrassenLevels) {
  // One Strassen level over classical 2x2 kernels: 7 * 8 multiplies.
  std::mt19937_64 rng(11);
  const Matrix a = random_integer_matrix(4, rng, 8);
  const Matrix b = random_integer_matrix(4, rng, 8);
  const auto [p, c] = strassen_blocked(a, b, PrecisionMode::M52, BaseKernel::Classical);
  EXPECT_EQ(c.multiplications, 56u);
  EXPECT_TRUE(p == classical_reference(a, b));
}

TEST(StrassenBlocked, DepthLimitSwitchesToClassicalSplit) {
  std::mt19937_64 rng(13);
  const Matrix a = random_integer_matrix(8, rng, 6);
  const Matrix b = random_integer_matrix(8, rng, 6);
  // One Strassen level, then classical splits: 7 * 8 * 8 leaf multiplies...
  const auto [p, c] =
      strassen_blocked(a, b, PrecisionMode::M52, BaseKernel::Classical, 1);
  EXPECT_EQ(c.multiplications, 7u * 8u * 8u);
  EXPECT_TRUE(p == classical_reference(a, b));
}

TEST(StrassenBlocked, OrderErrors) {
  EXPECT_THROW(strassen_blocked(Matrix(4), Matrix(8), PrecisionMode::M52), OrderMismatch);
  EXPECT_THROW(strassen_blocked(Matrix(3), Matrix(3), PrecisionMode::M52), OrderMismatch);
  EXPECT_THROW(strassen_blocked(Matrix(1), Matrix(1), PrecisionMode::M52), OrderMismatch);
}

TEST(StrassenBlocked, ParallelMatchesSerial) {
  std::mt19937_64 rng(17);
  const Matrix a = random_unit_range_matrix(8, rng);
  const Matrix b = random_unit_range_matrix(8, rng);
  for (const PrecisionMode mode : {PrecisionMode::M8, PrecisionMode::M52}) {
    const auto serial = strassen_blocked(a, b, mode);
    const auto parallel =
        strassen_blocked(a, b, mode, BaseKernel::Strassen, kUnlimitedStrassenLevels, true);
    ASSERT_TRUE(serial.product == parallel.product);
    ASSERT_EQ(serial.counters, parallel.counters);
  }
}

TEST(StrassenBlocked, CloseToReferenceOnUnitRange) {
  // Reassociation error at desk scale: entries in [1, 2) keep every inner
  // product cancellation-free.
  std::mt19937_64 rng(19);
  for (const std::size_t order : {2u, 4u, 8u}) {
    const Matrix a = random_unit_range_matrix(order, rng);
    const Matrix b = random_unit_range_matrix(order, rng);
    const Matrix reference = classical_reference(a, b);
    const auto [p, c] = strassen_blocked(a, b, PrecisionMode::M52);
    for (std::size_t i = 0; i < order; ++i) {
      for (std::size_t j = 0; j < order; ++j) {
        const double rel = std::abs(p(i, j) - reference(i, j)) / reference(i, j);
        ASSERT_LE(rel, std::ldexp(1.0, -40)) << "order " << order;
      }
    }
  }
}

TEST(FusedTopdown, OrderTwoIsTheSevenMultiplyKernel) {
  std::mt19937_64 rng(23);
  for (const PrecisionMode mode :
       {PrecisionMode::M8, PrecisionMode::M23, PrecisionMode::M52, PrecisionMode::Auto}) {
    for (int n = 0; n < 500; ++n) {
      const Matrix a = random_unit_range_matrix(2, rng);
      const Matrix b = random_unit_range_matrix(2, rng);
      const auto fused = strassen_fused_topdown(a, b, mode);
      const auto kernel = strassen_2x2(a, b, mode);
      ASSERT_TRUE(fused.product == kernel.product);
      ASSERT_EQ(fused.counters, kernel.counters);
    }
  }
}

TEST(FusedTopdown, IntegerMatricesMatchOracleExactly) {
  std::mt19937_64 rng(29);
  for (const std::size_t order : {2u, 4u, 8u}) {
    const Matrix a = random_integer_matrix(order, rng, 10);
    const Matrix b = random_integer_matrix(order, rng, 10);
    const auto [p, c] = strassen_fused_topdown(a, b, PrecisionMode::M52);
    ASSERT_TRUE(p == classical_reference(a, b)) << "order " << order;
  }
}

TEST(FusedTopdown, MultiplicationCount) {
  std::mt19937_64 rng(31);
  for (const std::size_t order : {2u, 4u, 8u}) {
    const std::size_t m = order / 2;
    const Matrix a = random_integer_matrix(order, rng, 4);
    const Matrix b = random_integer_matrix(order, rng, 4);
    const auto [p, c] = strassen_fused_topdown(a, b, PrecisionMode::M52);
    EXPECT_EQ(c.multiplications, 7u * m * (order / 2) * (order / 2));
  }
}

TEST(FusedTopdown, IdentityPassesThrough) {
  std::mt19937_64 rng(37);
  const Matrix b = random_coarse_matrix(4, rng);
  const auto [p, c] = strassen_fused_topdown(Matrix::identity(4), b, PrecisionMode::M52);
  EXPECT_TRUE(p == b);
}

TEST(FusedTopdown, WorksOnAnyEvenOrder) {
  std::mt19937_64 rng(41);
  const Matrix a = random_integer_matrix(6, rng, 8);
  const Matrix b = random_integer_matrix(6, rng, 8);
  const auto [p, c] = strassen_fused_topdown(a, b, PrecisionMode::M52);
  EXPECT_TRUE(p == classical_reference(a, b));
}

TEST(FusedTopdown, OrderErrors) {
  EXPECT_THROW(strassen_fused_topdown(Matrix(3), Matrix(3), PrecisionMode::M52),
               OrderMismatch);
  EXPECT_THROW(strassen_fused_topdown(Matrix(4), Matrix(2), PrecisionMode::M52),
               OrderMismatch);
}

TEST(AlphaBetaValues, MatchTheTermDefinitions) {
  OpCounters c;
  std::mt19937_64 rng(43);
  const Matrix a = random_integer_matrix(4, rng, 8);
  const Matrix b = random_integer_matrix(4, rng, 8);
  const AlphaBeta ab = compute_alpha_beta(a, b, c);
  ASSERT_EQ(ab.m, 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t k = 0; k < 2; ++k) {
      const std::size_t idx = i * 2 + k;
      EXPECT_EQ(ab.alpha[0][idx], a(2 * i, 2 * k) + a(2 * i + 1, 2 * k + 1));
      EXPECT_EQ(ab.alpha[1][idx], a(2 * i + 1, 2 * k) + a(2 * i + 1, 2 * k + 1));
      EXPECT_EQ(ab.alpha[2][idx], a(2 * i, 2 * k) + a(2 * i, 2 * k + 1));
      EXPECT_EQ(ab.alpha[3][idx], a(2 * i + 1, 2 * k) - a(2 * i, 2 * k));
      EXPECT_EQ(ab.alpha[4][idx], a(2 * i, 2 * k + 1) - a(2 * i + 1, 2 * k + 1));
      EXPECT_EQ(ab.beta[0][idx], b(2 * i, 2 * k) + b(2 * i + 1, 2 * k + 1));
      EXPECT_EQ(ab.beta[1][idx], b(2 * i, 2 * k + 1) - b(2 * i + 1, 2 * k + 1));
      EXPECT_EQ(ab.beta[2][idx], b(2 * i + 1, 2 * k) - b(2 * i, 2 * k));
      EXPECT_EQ(ab.beta[3][idx], b(2 * i, 2 * k) + b(2 * i, 2 * k + 1));
      EXPECT_EQ(ab.beta[4][idx], b(2 * i + 1, 2 * k) + b(2 * i + 1, 2 * k + 1));
    }
  }
  // 5 additions per tile on each side.
  EXPECT_EQ(c.additions, 2u * 5u * 4u);
}

TEST(OpCounters, MergeIsAssociativeAndCommutative) {
  const OpCounters a{3, 5};
  const OpCounters b{7, 11};
  const OpCounters c{13, 17};
  EXPECT_EQ((a + b) + c, a + (b + c));
  EXPECT_EQ(a + b, b + a);
}

TEST(ModeThreading, EveryModeRunsWithoutModeSelectError) {
  std::mt19937_64 rng(47);
  const Matrix a = random_unit_range_matrix(4, rng);
  const Matrix b = random_unit_range_matrix(4, rng);
  for (const PrecisionMode mode :
       {PrecisionMode::Auto, PrecisionMode::M8, PrecisionMode::M16, PrecisionMode::M23,
        PrecisionMode::M36, PrecisionMode::M52}) {
    EXPECT_NO_THROW(strassen_blocked(a, b, mode));
    EXPECT_NO_THROW(strassen_fused_topdown(a, b, mode));
  }
}

TEST(ClassicalReference, KnownValues) {
  EXPECT_TRUE(classical_reference(kA2, kB2) == kAB2);
  std::mt19937_64 rng(53);
  const Matrix b = random_unit_range_matrix(4, rng);
  EXPECT_TRUE(classical_reference(Matrix::identity(4), b) == b);
  EXPECT_TRUE(classical_reference(Matrix(4), b) == Matrix(4));
  EXPECT_THROW(classical_reference(Matrix(2), Matrix(4)), OrderMismatch);
}
