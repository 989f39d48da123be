#pragma once

// Weighted L2-regularized logistic regression on clr features.
//
// Objective: sum_i w_i * bce_i / sum_i w_i + (l2 / 2) * |coef|^2, minimized
// by full-batch gradient descent with a fixed step 1 / L, where L bounds the
// curvature (0.25 * max_i |x_i|^2 + l2, counting the intercept column).
// Normalizing by the total weight makes the optimum invariant to a common
// rescaling of the sample weights.

#include <cstddef>
#include <span>
#include <vector>

#include "coda/dataset.hpp"
#include "coda/kernels.hpp"

namespace coda {

struct LogRegConfig {
  double l2 = 0.1;
  std::size_t epochs = 1000;
  // Overrides the automatic 1 / L step when > 0.
  double step = 0.0;
};

struct LogisticModel {
  std::vector<double> coef;
  double intercept = 0.0;

  std::vector<double> logits(const Matrix& features) const;
  std::vector<double> probabilities(const Matrix& features) const;
};

// Rows clr(zero_replace(x_i, L_i)); L_i from the dataset when known.
Matrix clr_features(const Dataset& ds, LibrarySize fallback = LibrarySize(kDefaultLibrarySize));
Matrix clr_features(std::span<const LabeledSample> samples, LibrarySize pseudo);

struct LogRegObjective {
  double loss = 0.0;
  std::vector<double> grad_coef;
  double grad_intercept = 0.0;
};

LogRegObjective logreg_objective(const LogisticModel& model, const Matrix& features,
                                 std::span<const int> labels, std::span<const double> weights,
                                 double l2);

// Starts from the zero model. Errors: SingleClassTrain, NonFinite,
// DimensionMismatch.
LogisticModel train_weighted_logreg(const Matrix& features, std::span<const int> labels,
                                    std::span<const double> weights, const LogRegConfig& cfg);
LogisticModel train_weighted_logreg(const Dataset& train, const LogRegConfig& cfg);

}  // namespace coda
