#include "coda/composition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "coda/error.hpp"

namespace coda {
namespace {

void require_dimension(std::size_t p) {
  if (p < 2) {
    throw Error(ErrorCode::DimensionTooSmall,
                "composition needs at least 2 parts, got " + std::to_string(p));
  }
}

void require_same_size(const Composition& v, const Composition& x) {
  if (v.size() != x.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                std::to_string(v.size()) + " vs " + std::to_string(x.size()));
  }
}

void require_positive(const Composition& x) {
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!(x[j] > 0.0)) {
      throw Error(ErrorCode::ZeroPart, "part " + std::to_string(j) + " is zero");
    }
  }
}

}  // namespace

Composition::Composition(std::vector<double> parts) : parts_(std::move(parts)) {
  require_dimension(parts_.size());
  double sum = 0.0;
  for (std::size_t j = 0; j < parts_.size(); ++j) {
    const double v = parts_[j];
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::NonFinite, "part " + std::to_string(j));
    }
    if (v < 0.0) {
      throw Error(ErrorCode::NegativeEntry, "part " + std::to_string(j));
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSimplexTolerance) {
    throw Error(ErrorCode::NotOnSimplex, "parts sum to " + std::to_string(sum));
  }
}

Composition Composition::uniform(std::size_t p) {
  require_dimension(p);
  return Composition(std::vector<double>(p, 1.0 / static_cast<double>(p)),
                     Unchecked{});
}

bool Composition::strictly_positive() const noexcept {
  return std::all_of(parts_.begin(), parts_.end(), [](double v) { return v > 0.0; });
}

std::size_t Composition::support_size() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(parts_.begin(), parts_.end(), [](double v) { return v > 0.0; }));
}

ClrVector::ClrVector(std::vector<double> coords) : coords_(std::move(coords)) {
  require_dimension(coords_.size());
  double sum = 0.0;
  for (double c : coords_) {
    if (!std::isfinite(c)) throw Error(ErrorCode::NonFinite, "clr coordinate");
    sum += c;
  }
  if (std::abs(sum) > kSimplexTolerance) {
    throw Error(ErrorCode::InvalidArgument,
                "clr coordinates sum to " + std::to_string(sum));
  }
}

Composition close(std::span<const double> raw) {
  require_dimension(raw.size());
  double sum = 0.0;
  for (std::size_t j = 0; j < raw.size(); ++j) {
    if (!std::isfinite(raw[j])) throw Error(ErrorCode::NonFinite, "entry " + std::to_string(j));
    if (raw[j] < 0.0) throw Error(ErrorCode::NegativeEntry, "entry " + std::to_string(j));
    sum += raw[j];
  }
  if (sum == 0.0) throw Error(ErrorCode::AllZero, "cannot close an all-zero vector");
  std::vector<double> parts(raw.size());
  for (std::size_t j = 0; j < raw.size(); ++j) parts[j] = raw[j] / sum;
  return Composition(std::move(parts), Composition::Unchecked{});
}

Composition softmax_close(std::vector<double> logs) {
  require_dimension(logs.size());
  double top = -std::numeric_limits<double>::infinity();
  for (double l : logs) {
    if (std::isnan(l) || l == std::numeric_limits<double>::infinity()) {
      throw Error(ErrorCode::NonFinite, "log-part is NaN or +inf");
    }
    top = std::max(top, l);
  }
  if (top == -std::numeric_limits<double>::infinity()) {
    throw Error(ErrorCode::AllZero, "every log-part is -inf");
  }
  double sum = 0.0;
  for (double& l : logs) {
    l = std::exp(l - top);
    sum += l;
  }
  for (double& l : logs) l /= sum;
  return Composition(std::move(logs), Composition::Unchecked{});
}

Composition perturb(const Composition& v, const Composition& x) {
  require_same_size(v, x);
  require_positive(v);
  require_positive(x);
  std::vector<double> logs(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) logs[j] = std::log(v[j]) + std::log(x[j]);
  return softmax_close(std::move(logs));
}

Composition power(double lambda, const Composition& x) {
  require_positive(x);
  if (!std::isfinite(lambda)) throw Error(ErrorCode::NonFinite, "scalar");
  std::vector<double> logs(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) logs[j] = lambda * std::log(x[j]);
  return softmax_close(std::move(logs));
}

Composition difference(const Composition& v, const Composition& x) {
  return perturb(v, power(-1.0, x));
}

ClrVector clr(const Composition& x) {
  require_positive(x);
  const std::size_t p = x.size();
  std::vector<double> coords(p);
  double mean = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    coords[j] = std::log(x[j]);
    mean += coords[j];
  }
  mean /= static_cast<double>(p);
  for (double& c : coords) c -= mean;
  return ClrVector(std::move(coords));
}

Composition clr_inv(std::span<const double> z) {
  require_dimension(z.size());
  for (double c : z) {
    if (!std::isfinite(c)) throw Error(ErrorCode::NonFinite, "clr coordinate");
  }
  return softmax_close(std::vector<double>(z.begin(), z.end()));
}

double inner_product(const Composition& v, const Composition& x) {
  require_same_size(v, x);
  const ClrVector a = clr(v);
  const ClrVector b = clr(x);
  double dot = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) dot += a[j] * b[j];
  return dot;
}

double norm(const Composition& x) { return std::sqrt(inner_product(x, x)); }

double distance(const Composition& v, const Composition& x) {
  require_same_size(v, x);
  const ClrVector a = clr(v);
  const ClrVector b = clr(x);
  double sq = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    sq += d * d;
  }
  return std::sqrt(sq);
}

}  // namespace coda
