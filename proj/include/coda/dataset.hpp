#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "coda/augment.hpp"
#include "coda/preprocess.hpp"

namespace coda {

struct Dataset {
  std::vector<LabeledSample> samples;
  std::vector<std::string> feature_names;
  std::vector<std::string> class_names;
  // Aligned with samples when present.
  std::optional<std::vector<LibrarySize>> library_sizes;
  // Row identifiers from the optional id column; empty when absent.
  std::vector<std::string> ids;

  std::size_t size() const noexcept { return samples.size(); }
  std::size_t num_features() const noexcept { return feature_names.size(); }

  // Checks shared dimension, label range and positive weights.
  void validate() const;
  // Rows at `indices`, in that order, with the same catalogues.
  Dataset subset(std::span<const std::size_t> indices) const;
  // Library size of sample i, falling back to `fallback` when unknown.
  LibrarySize library_size(std::size_t i, LibrarySize fallback = LibrarySize(kDefaultLibrarySize)) const;
};

struct CsvOptions {
  std::string label_column = "label";
  std::optional<std::string> id_column;
  char delimiter = ',';
  std::uint64_t default_library_size = kDefaultLibrarySize;
};

// Header row, then one sample per row. Columns named `weight` and
// `provenance` (as written by write_csv) are read back instead of being
// treated as features. Labels become a dense catalogue in order of first
// appearance.
// Errors: IoError, ParseError, MissingLabelColumn, RaggedRow,
// NonNumericFeature, AllZero.
Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {});

// Features, then label, weight, provenance. Values use 17 significant
// digits. The file is written to a temporary sibling and renamed into place.
void write_csv(const Dataset& ds, const std::filesystem::path& path, char delimiter = ',');

struct SplitSpec {
  double test_fraction = 0.2;
  std::size_t replicates = 20;
  std::uint64_t seed = 0;
  bool stratified = true;

  void validate() const;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Replicate r depends only on (spec.seed, r). Stratified splits put
// round(n_c * test_fraction) samples of class c in test, clamped to
// [1, n_c - 1]. Errors: ClassTooSmall, EmptyDataset.
SplitIndices split_indices(const Dataset& ds, const SplitSpec& spec, std::size_t replicate);

struct TrainTest {
  Dataset train;
  Dataset test;
};
std::vector<TrainTest> split(const Dataset& ds, const SplitSpec& spec);

// Empirical class frequencies over class_names. Errors: EmptyDataset.
std::vector<double> class_prior(const Dataset& ds);

}  // namespace coda
