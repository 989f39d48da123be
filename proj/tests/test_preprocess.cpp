#include <gtest/gtest.h>

#include "coda/preprocess.hpp"
#include "test_support.hpp"

using namespace coda;
using namespace coda::testing;

TEST(LibrarySize, InferredFromCountsOrFallback) {
  EXPECT_EQ(infer_library_size(std::vector<double>{120, 30, 50}).value(), 200u);
  EXPECT_EQ(infer_library_size(std::vector<double>{0.5, 0.3, 0.2}).value(), kDefaultLibrarySize);
  EXPECT_EQ(infer_library_size(std::vector<double>{0.5, 0.5}, LibrarySize(77)).value(), 77u);
  EXPECT_CODA_ERROR(infer_library_size(std::vector<double>{0, 0}), ErrorCode::AllZero);
  EXPECT_CODA_ERROR(infer_library_size(std::vector<double>{1, -2}), ErrorCode::NegativeEntry);
  EXPECT_CODA_ERROR(LibrarySize(0), ErrorCode::InvalidArgument);
}

TEST(ZeroReplace, WorkedExample) {
  expect_parts_near(zero_replace(Composition({0.5, 0.5, 0.0}), LibrarySize(2)), {0.4, 0.4, 0.2}, 1e-15);
}

TEST(ZeroReplace, MatchesClosedFormAndLimits) {
  std::mt19937_64 gen(3);
  for (int t = 0; t < 100; ++t) {
    const std::size_t p = random_dim(gen, 2, 30);
    const auto x = random_composition(gen, p);
    const std::uint64_t L = random_dim(gen, 1, 100000);
    const auto y = zero_replace(x, LibrarySize(L));
    const double inv = 1.0 / static_cast<double>(L);
    for (std::size_t j = 0; j < p; ++j) {
      EXPECT_NEAR(y[j], (x[j] + inv) / (1.0 + static_cast<double>(p) * inv), 1e-15);
    }
    EXPECT_TRUE(y.strictly_positive());
  }
  const Composition x({0.6, 0.3, 0.1});
  expect_parts_near(zero_replace(x, LibrarySize(1000000000000ULL)), {0.6, 0.3, 0.1}, 1e-11);
  expect_parts_near(zero_replace(Composition::uniform(5), LibrarySize(3)), std::vector<double>(5, 0.2),
                    1e-15);
}

TEST(NormalizeRows, ClosesCountRows) {
  const std::vector<double> raw{2, 2, 1, 3};
  const auto out = normalize_rows(raw, 2);
  expect_parts_near(out.compositions[0], {0.5, 0.5}, 0);
  expect_parts_near(out.compositions[1], {0.25, 0.75}, 0);
  EXPECT_EQ(out.library_sizes[0].value(), 4u);
  EXPECT_EQ(out.library_sizes[1].value(), 4u);
}

TEST(NormalizeRows, ErrorsNameTheRow) {
  try {
    normalize_rows(std::vector<double>{1, 1, 0, 0}, 2);
    FAIL() << "expected AllZero";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AllZero);
    EXPECT_NE(std::string(e.what()).find("row 1"), std::string::npos);
  }
  try {
    normalize_rows(std::vector<double>{0, 0}, 2);
    FAIL() << "expected AllZero";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("row 0"), std::string::npos);
  }
  EXPECT_CODA_ERROR(normalize_rows(std::vector<double>{1, -1}, 2), ErrorCode::NegativeEntry);
  EXPECT_CODA_ERROR(normalize_rows(std::vector<double>{1}, 1), ErrorCode::DimensionTooSmall);
}

TEST(NormalizeRows, SimplexRowsPassThroughWithDefaultSize) {
  const std::vector<double> raw{0.1, 0.2, 0.7000000000000001};
  const auto out = normalize_rows(raw, 3);
  EXPECT_EQ(out.compositions[0].values(), raw);
  EXPECT_EQ(out.library_sizes[0].value(), kDefaultLibrarySize);
}

TEST(NormalizeRows, ParallelMatchesSerial) {
  std::mt19937_64 gen(5);
  std::uniform_int_distribution<int> counts(0, 50);
  const std::size_t rows = 513, cols = 17;
  std::vector<double> raw(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      raw[i * cols + j] = i % 3 == 0 ? counts(gen) + 1 : random_positive(gen, 1)[0];
    }
  }
  const auto a = normalize_rows(raw, cols);
  const auto b = normalize_rows_serial(raw, cols);
  EXPECT_EQ(a.compositions, b.compositions);
  EXPECT_EQ(a.library_sizes, b.library_sizes);
}
