#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "coda/composition.hpp"

namespace coda {

// Sequencing depth of a sample (total read count); always >= 1.
class LibrarySize {
 public:
  explicit LibrarySize(std::uint64_t value);
  std::uint64_t value() const noexcept { return value_; }
  friend bool operator==(LibrarySize, LibrarySize) = default;

 private:
  std::uint64_t value_;
};

inline constexpr std::uint64_t kDefaultLibrarySize = 10000;
// Entries within this distance of an integer count as integral.
inline constexpr double kIntegralTolerance = 1e-9;

// Count rows (all entries integral) report their total; proportion rows get
// `fallback`. Errors: AllZero, NegativeEntry.
LibrarySize infer_library_size(std::span<const double> raw_row,
                               LibrarySize fallback = LibrarySize(kDefaultLibrarySize));

// Adds the pseudo-count 1/L to every part and re-closes:
//   out_j = (x_j + 1/L) / (1 + p/L)
Composition zero_replace(const Composition& x, LibrarySize library_size);

struct NormalizedRows {
  std::vector<Composition> compositions;
  std::vector<LibrarySize> library_sizes;
};

// Row-major n x p input. Rows already on the simplex (within 1e-9) that are
// not count rows pass through unchanged; all other rows are closed.
// Errors: AllZero naming the row, NegativeEntry, DimensionTooSmall.
NormalizedRows normalize_rows(std::span<const double> raw, std::size_t cols,
                              LibrarySize fallback = LibrarySize(kDefaultLibrarySize));

// Same transform with an explicit serial loop; kept as the reference for the
// row-parallel version above.
NormalizedRows normalize_rows_serial(std::span<const double> raw, std::size_t cols,
                                     LibrarySize fallback = LibrarySize(kDefaultLibrarySize));

}  // namespace coda
