#include "coda/logreg.hpp"

#include <algorithm>
#include <cmath>

#include "coda/contrastive.hpp"
#include "coda/error.hpp"

namespace coda {
namespace {

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void check_inputs(const Matrix& features, std::span<const int> labels,
                  std::span<const double> weights) {
  if (labels.size() != features.rows || weights.size() != features.rows) {
    throw Error(ErrorCode::DimensionMismatch, "features, labels and weights must align");
  }
  bool has0 = false, has1 = false;
  for (int y : labels) {
    if (y != 0 && y != 1) throw Error(ErrorCode::InvalidArgument, "labels must be 0 or 1");
    (y == 1 ? has1 : has0) = true;
  }
  if (!has0 || !has1) throw Error(ErrorCode::SingleClassTrain, "training labels hold a single class");
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw Error(ErrorCode::InvalidArgument, "weights must be > 0");
  }
}

}  // namespace

std::vector<double> LogisticModel::logits(const Matrix& features) const {
  if (features.cols != coef.size()) throw Error(ErrorCode::DimensionMismatch, "feature width");
  std::vector<double> out(features.rows);
  for (std::size_t i = 0; i < features.rows; ++i) {
    const auto x = features.row(i);
    double acc = intercept;
    for (std::size_t k = 0; k < x.size(); ++k) acc += x[k] * coef[k];
    out[i] = acc;
  }
  return out;
}

std::vector<double> LogisticModel::probabilities(const Matrix& features) const {
  auto out = logits(features);
  for (double& v : out) v = sigmoid(v);
  return out;
}

Matrix clr_features(std::span<const LabeledSample> samples, LibrarySize pseudo) {
  if (samples.empty()) return {};
  Matrix out(samples.size(), samples[0].x.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const ClrVector z = clr(zero_replace(samples[i].x, pseudo));
    std::copy(z.values().begin(), z.values().end(), out.row(i).begin());
  }
  return out;
}

Matrix clr_features(const Dataset& ds, LibrarySize fallback) {
  Matrix out(ds.size(), ds.num_features());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const ClrVector z = clr(zero_replace(ds.samples[i].x, ds.library_size(i, fallback)));
    std::copy(z.values().begin(), z.values().end(), out.row(i).begin());
  }
  return out;
}

LogRegObjective logreg_objective(const LogisticModel& model, const Matrix& features,
                                 std::span<const int> labels, std::span<const double> weights,
                                 double l2) {
  const auto z = model.logits(features);
  double total_w = 0.0;
  for (double w : weights) total_w += w;
  LogRegObjective out;
  out.grad_coef.assign(model.coef.size(), 0.0);
  for (std::size_t i = 0; i < features.rows; ++i) {
    out.loss += weights[i] * (softplus(z[i]) - labels[i] * z[i]);
    const double r = weights[i] * (sigmoid(z[i]) - labels[i]);
    const auto x = features.row(i);
    for (std::size_t k = 0; k < x.size(); ++k) out.grad_coef[k] += r * x[k];
    out.grad_intercept += r;
  }
  out.loss /= total_w;
  out.grad_intercept /= total_w;
  double sq = 0.0;
  for (std::size_t k = 0; k < model.coef.size(); ++k) {
    out.grad_coef[k] = out.grad_coef[k] / total_w + l2 * model.coef[k];
    sq += model.coef[k] * model.coef[k];
  }
  out.loss += 0.5 * l2 * sq;
  return out;
}

LogisticModel train_weighted_logreg(const Matrix& features, std::span<const int> labels,
                                    std::span<const double> weights, const LogRegConfig& cfg) {
  check_inputs(features, labels, weights);
  if (!(cfg.l2 >= 0.0)) throw Error(ErrorCode::InvalidArgument, "l2 must be >= 0");
  double max_sq = 0.0;
  for (std::size_t i = 0; i < features.rows; ++i) {
    double sq = 1.0;
    for (double v : features.row(i)) sq += v * v;
    max_sq = std::max(max_sq, sq);
  }
  const double step = cfg.step > 0.0 ? cfg.step : 1.0 / (0.25 * max_sq + cfg.l2);

  LogisticModel model{std::vector<double>(features.cols, 0.0), 0.0};
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto obj = logreg_objective(model, features, labels, weights, cfg.l2);
    if (!std::isfinite(obj.loss)) throw Error(ErrorCode::NonFinite, "logistic loss");
    for (std::size_t k = 0; k < model.coef.size(); ++k) model.coef[k] -= step * obj.grad_coef[k];
    model.intercept -= step * obj.grad_intercept;
  }
  return model;
}

LogisticModel train_weighted_logreg(const Dataset& train, const LogRegConfig& cfg) {
  const auto labels = binary_labels(train);
  std::vector<double> weights;
  for (const auto& s : train.samples) weights.push_back(s.weight);
  return train_weighted_logreg(clr_features(train), labels, weights, cfg);
}

}  // namespace coda
