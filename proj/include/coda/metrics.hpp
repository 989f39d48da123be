#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace coda {

struct BinaryScores {
  std::vector<double> scores;  // higher means class 1
  std::vector<int> labels;     // 0 or 1
  std::optional<std::vector<double>> weights;
};

// P(score_pos > score_neg) + 0.5 P(tie), via tie-averaged ranks. The
// unweighted path is evaluated in integer arithmetic, so it equals the
// all-pairs count exactly. Errors: SingleClass, DimensionMismatch.
double roc_auc(const BinaryScores& s);
double roc_auc(std::span<const double> scores, std::span<const int> labels);

struct CalibrationBin {
  double confidence = 0.0;  // mean confidence in the bin
  double accuracy = 0.0;
  std::size_t count = 0;
};

struct CalibrationReport {
  double ece = 0.0;
  std::vector<CalibrationBin> bins;
};

// Binary ECE: confidence = max(p, 1 - p), prediction = (p >= 0.5), equal-width
// bins over [0.5, 1]. Errors: EmptyInput, DimensionMismatch, InvalidArgument.
CalibrationReport expected_calibration_error(std::span<const double> prob_class1,
                                             std::span<const int> labels,
                                             std::size_t num_bins = 10);

}  // namespace coda
