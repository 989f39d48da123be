#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "coda/composition.hpp"
#include "test_support.hpp"

using namespace coda;
using namespace coda::testing;

TEST(Close, ScalesToUnitSum) {
  expect_parts_near(close(std::vector<double>{2, 1, 1}), {0.5, 0.25, 0.25}, 1e-15);
  expect_parts_near(close(std::vector<double>{0.5, 0.3, 0.2}), {0.5, 0.3, 0.2}, 1e-15);
}

TEST(Close, RejectsBadInput) {
  EXPECT_CODA_ERROR(close(std::vector<double>{0, 0, 0}), ErrorCode::AllZero);
  EXPECT_CODA_ERROR(close(std::vector<double>{1, -1, 1}), ErrorCode::NegativeEntry);
  EXPECT_CODA_ERROR(close(std::vector<double>{1}), ErrorCode::DimensionTooSmall);
  EXPECT_CODA_ERROR(close(std::vector<double>{1, std::nan("")}), ErrorCode::NonFinite);
  EXPECT_CODA_ERROR(close(std::vector<double>{1, std::numeric_limits<double>::infinity()}),
                    ErrorCode::NonFinite);
}

TEST(Composition, ValidatesSimplexMembership) {
  EXPECT_NO_THROW(Composition({0.5, 0.5}));
  EXPECT_CODA_ERROR(Composition({0.5, 0.6}), ErrorCode::NotOnSimplex);
  EXPECT_CODA_ERROR(Composition({1.5, -0.5}), ErrorCode::NegativeEntry);
  EXPECT_CODA_ERROR(Composition({1.0}), ErrorCode::DimensionTooSmall);
}

TEST(Composition, StoresValuesVerbatim) {
  const std::vector<double> v{0.1, 0.2, 0.7000000000000001};
  EXPECT_EQ(Composition(v).values(), v);
}

TEST(Perturb, UniformIsIdentity) {
  expect_parts_near(perturb(Composition::uniform(3), Composition({0.5, 0.3, 0.2})), {0.5, 0.3, 0.2},
                    1e-15);
}

TEST(Perturb, WorkedExample) {
  expect_parts_near(perturb(Composition({0.5, 0.25, 0.25}), Composition({0.25, 0.25, 0.5})),
                    {0.4, 0.2, 0.4}, 1e-15);
}

TEST(Perturb, InverseGivesUniform) {
  const Composition x({0.5, 0.3, 0.2});
  expect_parts_near(perturb(x, power(-1.0, x)), {1.0 / 3, 1.0 / 3, 1.0 / 3}, 1e-15);
}

TEST(Perturb, RejectsZeroPartsAndMismatch) {
  EXPECT_CODA_ERROR(perturb(Composition({0.5, 0.5, 0.0}), Composition::uniform(3)), ErrorCode::ZeroPart);
  EXPECT_CODA_ERROR(perturb(Composition::uniform(2), Composition::uniform(3)),
                    ErrorCode::DimensionMismatch);
}

TEST(Power, WorkedExamples) {
  const Composition x({0.5, 0.3, 0.2});
  expect_parts_near(power(1.0, x), {0.5, 0.3, 0.2}, 1e-15);
  expect_parts_near(power(0.0, x), {1.0 / 3, 1.0 / 3, 1.0 / 3}, 1e-15);
  expect_parts_near(power(2.0, Composition({0.5, 0.25, 0.25})), {2.0 / 3, 1.0 / 6, 1.0 / 6}, 1e-15);
}

TEST(Power, ExtremeExponentsStayFinite) {
  const Composition x({0.6, 0.3, 0.1});
  const Composition big = power(1e4, x);
  EXPECT_NEAR(big[0], 1.0, 1e-12);
  EXPECT_EQ(big[2], 0.0);
  EXPECT_CODA_ERROR(power(std::nan(""), x), ErrorCode::NonFinite);
}

TEST(InnerProduct, WorkedExamples) {
  const Composition x({0.5, 0.3, 0.2});
  EXPECT_NEAR(inner_product(Composition::uniform(3), x), 0.0, 1e-15);
  const double e = std::exp(1.0);
  const Composition t({e / (1 + e), 1 / (1 + e)});
  EXPECT_NEAR(inner_product(t, t), 0.5, 1e-12);
  EXPECT_NEAR(inner_product(x, x), 0.4216, 5e-5);
  EXPECT_NEAR(inner_product(x, x), inner_product_oracle(x.values(), x.values()), 1e-12);
}

TEST(Distance, WorkedExamples) {
  const Composition a({0.5, 0.25, 0.25});
  const Composition b({0.25, 0.25, 0.5});
  EXPECT_EQ(distance(a, a), 0.0);
  EXPECT_NEAR(distance(a, b), std::sqrt(2.0) * std::log(2.0), 1e-12);
  EXPECT_NEAR(distance(a, b), 0.9803, 5e-5);
}

TEST(Clr, WorkedExamples) {
  const auto u = clr(Composition::uniform(4));
  for (double v : u.coords()) EXPECT_NEAR(v, 0.0, 1e-15);
  const auto z = clr(Composition({0.5, 0.3, 0.2}));
  EXPECT_NEAR(z[0], 0.4757, 5e-5);
  EXPECT_NEAR(z[1], -0.0351, 5e-5);
  EXPECT_NEAR(z[2], -0.4406, 5e-5);
  EXPECT_NEAR(z[0] + z[1] + z[2], 0.0, 1e-15);
}

TEST(ClrInv, WorkedExamples) {
  expect_parts_near(clr_inv(std::vector<double>{0, 0, 0}), {1.0 / 3, 1.0 / 3, 1.0 / 3}, 1e-15);
  expect_parts_near(clr_inv(clr(Composition({0.5, 0.3, 0.2}))), {0.5, 0.3, 0.2}, 1e-15);
  const auto y = clr_inv(std::vector<double>{1, 0, -1});
  expect_parts_near(y, {0.6652, 0.2447, 0.0900}, 5e-5);
}

TEST(ClrInv, ShiftInvariantAndOverflowSafe) {
  const auto a = clr_inv(std::vector<double>{1, 2, 3});
  const auto b = clr_inv(std::vector<double>{1001, 1002, 1003});
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(a[j], b[j], 1e-15);
  EXPECT_CODA_ERROR(clr_inv(std::vector<double>{1, std::nan("")}), ErrorCode::NonFinite);
}

TEST(ClrVector, RequiresZeroSum) {
  EXPECT_NO_THROW(ClrVector({1.0, -1.0}));
  EXPECT_CODA_ERROR(ClrVector({1.0, 1.0}), ErrorCode::InvalidArgument);
}

TEST(Clr, MatchesTextbookDefinitionOnRandomInputs) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto x = random_composition(gen, random_dim(gen, 2, 50));
    const auto z = clr(x);
    const auto want = clr_oracle(x.values());
    for (std::size_t j = 0; j < x.size(); ++j) EXPECT_NEAR(z[j], want[j], 1e-12);
  }
}

TEST(VectorSpace, AxiomsHoldOnRandomCompositions) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> scalar(-2.0, 2.0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t p = random_dim(gen, 2, 50);
    const auto x = random_composition(gen, p);
    const auto y = random_composition(gen, p);
    const auto w = random_composition(gen, p);
    const double a = scalar(gen), b = scalar(gen);
    auto check = [&](const Composition& l, const Composition& r) {
      for (std::size_t j = 0; j < p; ++j) ASSERT_LE(relative_gap(l[j], r[j]), 1e-9);
    };
    check(perturb(x, y), perturb(y, x));
    check(perturb(perturb(x, y), w), perturb(x, perturb(y, w)));
    check(power(a, perturb(x, y)), perturb(power(a, x), power(a, y)));
    check(power(a + b, x), perturb(power(a, x), power(b, x)));
    check(power(a, power(b, x)), power(a * b, x));
  }
}
