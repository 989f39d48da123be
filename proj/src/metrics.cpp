#include "coda/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "coda/error.hpp"

namespace coda {
namespace {

void check_labels(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorCode::DimensionMismatch, "scores and labels differ in length");
  }
  for (int y : labels) {
    if (y != 0 && y != 1) throw Error(ErrorCode::InvalidArgument, "labels must be 0 or 1");
  }
  for (double s : scores) {
    if (std::isnan(s)) throw Error(ErrorCode::NonFinite, "NaN score");
  }
}

std::vector<std::size_t> order_by_score(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  return order;
}

}  // namespace

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  check_labels(scores, labels);
  std::int64_t n1 = 0;
  for (int y : labels) n1 += y;
  const auto n0 = static_cast<std::int64_t>(labels.size()) - n1;
  if (n1 == 0 || n0 == 0) throw Error(ErrorCode::SingleClass, "need both classes for AUC");

  // Twice the Mann-Whitney U: tie groups spanning ranks [lo+1, hi] get
  // average rank (lo + 1 + hi) / 2, so 2 * rank is an integer.
  const auto order = order_by_score(scores);
  std::int64_t twice_rank_sum = 0;
  std::size_t lo = 0;
  while (lo < order.size()) {
    std::size_t hi = lo + 1;
    while (hi < order.size() && scores[order[hi]] == scores[order[lo]]) ++hi;
    const auto twice_avg = static_cast<std::int64_t>(lo + 1 + hi);
    for (std::size_t k = lo; k < hi; ++k) {
      if (labels[order[k]] == 1) twice_rank_sum += twice_avg;
    }
    lo = hi;
  }
  const std::int64_t twice_u = twice_rank_sum - n1 * (n1 + 1);
  return static_cast<double>(twice_u) / static_cast<double>(2 * n1 * n0);
}

double roc_auc(const BinaryScores& s) {
  if (!s.weights) return roc_auc(s.scores, s.labels);
  check_labels(s.scores, s.labels);
  const auto& w = *s.weights;
  if (w.size() != s.scores.size()) throw Error(ErrorCode::DimensionMismatch, "weights length");
  double w1 = 0.0, w0 = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!(w[i] >= 0.0)) throw Error(ErrorCode::InvalidArgument, "negative weight");
    (s.labels[i] == 1 ? w1 : w0) += w[i];
  }
  if (w1 == 0.0 || w0 == 0.0) throw Error(ErrorCode::SingleClass, "need both classes for AUC");

  // Sweep tie groups in increasing score; each positive gains the negative
  // weight strictly below it plus half the tied negative weight.
  const auto order = order_by_score(s.scores);
  double neg_below = 0.0, acc = 0.0;
  std::size_t lo = 0;
  while (lo < order.size()) {
    std::size_t hi = lo + 1;
    while (hi < order.size() && s.scores[order[hi]] == s.scores[order[lo]]) ++hi;
    double pos_group = 0.0, neg_group = 0.0;
    for (std::size_t k = lo; k < hi; ++k) {
      (s.labels[order[k]] == 1 ? pos_group : neg_group) += w[order[k]];
    }
    acc += pos_group * (neg_below + 0.5 * neg_group);
    neg_below += neg_group;
    lo = hi;
  }
  return acc / (w1 * w0);
}

CalibrationReport expected_calibration_error(std::span<const double> prob_class1,
                                             std::span<const int> labels,
                                             std::size_t num_bins) {
  if (prob_class1.empty()) throw Error(ErrorCode::EmptyInput, "no predictions");
  if (prob_class1.size() != labels.size()) {
    throw Error(ErrorCode::DimensionMismatch, "probabilities and labels differ in length");
  }
  if (num_bins < 1) throw Error(ErrorCode::InvalidArgument, "need at least one bin");

  std::vector<double> conf_sum(num_bins, 0.0), correct(num_bins, 0.0);
  std::vector<std::size_t> count(num_bins, 0);
  for (std::size_t i = 0; i < prob_class1.size(); ++i) {
    const double p = prob_class1[i];
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "probability outside [0, 1]");
    if (labels[i] != 0 && labels[i] != 1) throw Error(ErrorCode::InvalidArgument, "labels must be 0 or 1");
    const int predicted = p >= 0.5 ? 1 : 0;
    const double confidence = std::max(p, 1.0 - p);
    auto b = static_cast<std::size_t>((confidence - 0.5) / 0.5 * static_cast<double>(num_bins));
    b = std::min(b, num_bins - 1);
    conf_sum[b] += confidence;
    correct[b] += predicted == labels[i] ? 1.0 : 0.0;
    ++count[b];
  }

  CalibrationReport report;
  report.bins.resize(num_bins);
  const auto n = static_cast<double>(prob_class1.size());
  for (std::size_t b = 0; b < num_bins; ++b) {
    if (count[b] == 0) continue;
    const auto nb = static_cast<double>(count[b]);
    auto& bin = report.bins[b];
    bin.count = count[b];
    bin.confidence = conf_sum[b] / nb;
    bin.accuracy = correct[b] / nb;
    report.ece += (nb / n) * std::abs(bin.accuracy - bin.confidence);
  }
  return report;
}

}  // namespace coda
