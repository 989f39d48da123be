#include "coda/preprocess.hpp"

#include <cmath>
#include <optional>
#include <string>

#include "coda/error.hpp"

namespace coda {
namespace {

bool is_integral(double v) { return std::abs(v - std::round(v)) <= kIntegralTolerance; }

// Validation runs serially so the first offending row is reported
// deterministically; the transform itself cannot fail afterwards.
void validate_rows(std::span<const double> raw, std::size_t cols) {
  if (cols < 2) {
    throw Error(ErrorCode::DimensionTooSmall, "need at least 2 columns");
  }
  if (raw.size() % cols != 0) {
    throw Error(ErrorCode::RaggedRow, "buffer size is not a multiple of the column count");
  }
  const std::size_t rows = raw.size() / cols;
  for (std::size_t i = 0; i < rows; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      const double v = raw[i * cols + j];
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::NonFinite, "row " + std::to_string(i) + ", column " + std::to_string(j));
      }
      if (v < 0.0) {
        throw Error(ErrorCode::NegativeEntry,
                    "row " + std::to_string(i) + ", column " + std::to_string(j));
      }
      sum += v;
    }
    if (sum == 0.0) throw Error(ErrorCode::AllZero, "row " + std::to_string(i));
  }
}

std::pair<Composition, LibrarySize> normalize_row(std::span<const double> row,
                                                  LibrarySize fallback) {
  bool counts = true;
  double sum = 0.0;
  for (double v : row) {
    counts = counts && is_integral(v);
    sum += v;
  }
  if (!counts && std::abs(sum - 1.0) <= kSimplexTolerance) {
    return {Composition(std::vector<double>(row.begin(), row.end())), fallback};
  }
  return {close(row), infer_library_size(row, fallback)};
}

}  // namespace

LibrarySize::LibrarySize(std::uint64_t value) : value_(value) {
  if (value == 0) throw Error(ErrorCode::InvalidArgument, "library size must be >= 1");
}

LibrarySize infer_library_size(std::span<const double> raw_row, LibrarySize fallback) {
  bool counts = true;
  double total = 0.0;
  for (double v : raw_row) {
    if (v < 0.0) throw Error(ErrorCode::NegativeEntry, "negative abundance");
    counts = counts && is_integral(v);
    total += std::round(v);
  }
  bool any_positive = false;
  for (double v : raw_row) any_positive = any_positive || v > 0.0;
  if (!any_positive) throw Error(ErrorCode::AllZero, "row has no positive entry");
  if (!counts || total < 1.0) return fallback;
  return LibrarySize(static_cast<std::uint64_t>(total));
}

Composition zero_replace(const Composition& x, LibrarySize library_size) {
  const double pseudo = 1.0 / static_cast<double>(library_size.value());
  std::vector<double> shifted(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) shifted[j] = x[j] + pseudo;
  return close(shifted);
}

NormalizedRows normalize_rows_serial(std::span<const double> raw, std::size_t cols,
                                     LibrarySize fallback) {
  validate_rows(raw, cols);
  const std::size_t rows = raw.size() / cols;
  NormalizedRows out;
  out.compositions.reserve(rows);
  out.library_sizes.reserve(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    auto [x, size] = normalize_row(raw.subspan(i * cols, cols), fallback);
    out.compositions.push_back(std::move(x));
    out.library_sizes.push_back(size);
  }
  return out;
}

NormalizedRows normalize_rows(std::span<const double> raw, std::size_t cols,
                              LibrarySize fallback) {
  validate_rows(raw, cols);
  const std::size_t rows = raw.size() / cols;
  std::vector<std::optional<Composition>> comps(rows);
  std::vector<std::uint64_t> sizes(rows, fallback.value());
  const auto n = static_cast<std::int64_t>(rows);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    auto [x, size] = normalize_row(raw.subspan(static_cast<std::size_t>(i) * cols, cols), fallback);
    comps[static_cast<std::size_t>(i)].emplace(std::move(x));
    sizes[static_cast<std::size_t>(i)] = size.value();
  }
  NormalizedRows out;
  out.compositions.reserve(rows);
  out.library_sizes.reserve(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    out.compositions.push_back(std::move(*comps[i]));
    out.library_sizes.emplace_back(sizes[i]);
  }
  return out;
}

}  // namespace coda
