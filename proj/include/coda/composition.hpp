#pragma once

// Aitchison geometry of the simplex.
//
// A Composition is a point on the simplex: p >= 2 nonnegative parts that sum
// to one. The log-ratio operations (perturbation, powering, inner product,
// clr) additionally require every part to be strictly positive and throw
// ErrorCode::ZeroPart otherwise; zeros are handled upstream by
// coda::zero_replace, never by silent padding here.

#include <cstddef>
#include <span>
#include <vector>

namespace coda {

// Absolute tolerance on the unit sum accepted when constructing from values
// that are meant to already lie on the simplex.
inline constexpr double kSimplexTolerance = 1e-9;

class Composition {
 public:
  // Validates p >= 2, nonnegative finite parts and |sum - 1| <= 1e-9. The
  // values are stored as given so that persisted compositions round-trip
  // bit-for-bit; use coda::close() to rescale arbitrary nonnegative data.
  explicit Composition(std::vector<double> parts);

  static Composition uniform(std::size_t p);

  std::size_t size() const noexcept { return parts_.size(); }
  double operator[](std::size_t j) const noexcept { return parts_[j]; }
  std::span<const double> parts() const noexcept { return parts_; }
  const std::vector<double>& values() const noexcept { return parts_; }

  bool strictly_positive() const noexcept;
  // Number of parts that are > 0.
  std::size_t support_size() const noexcept;

  friend bool operator==(const Composition&, const Composition&) = default;

 private:
  struct Unchecked {};
  Composition(std::vector<double> parts, Unchecked) : parts_(std::move(parts)) {}

  friend Composition close(std::span<const double> raw);
  friend Composition softmax_close(std::vector<double> logs);

  std::vector<double> parts_;
};

// Coordinates of the centered-log-ratio image; they sum to zero.
class ClrVector {
 public:
  explicit ClrVector(std::vector<double> coords);

  std::size_t size() const noexcept { return coords_.size(); }
  double operator[](std::size_t j) const noexcept { return coords_[j]; }
  std::span<const double> coords() const noexcept { return coords_; }
  const std::vector<double>& values() const noexcept { return coords_; }

 private:
  std::vector<double> coords_;
};

// Rescales nonnegative values to unit sum.
// Errors: DimensionTooSmall (p < 2), NegativeEntry, AllZero, NonFinite.
Composition close(std::span<const double> raw);
inline Composition close(const std::vector<double>& raw) {
  return close(std::span<const double>(raw));
}

// close(exp(logs)) evaluated with the max-shift; logs may contain -inf
// (mapped to an exact zero part) but not NaN or +inf.
Composition softmax_close(std::vector<double> logs);

// v (+) x = close(v_1 x_1, ..., v_p x_p)
Composition perturb(const Composition& v, const Composition& x);
// lambda (.) x = close(x_1^lambda, ..., x_p^lambda)
Composition power(double lambda, const Composition& x);
// v (-) x = v (+) ((-1) (.) x)
Composition difference(const Composition& v, const Composition& x);

// Aitchison inner product, evaluated as the dot product of clr images.
double inner_product(const Composition& v, const Composition& x);
double norm(const Composition& x);
double distance(const Composition& v, const Composition& x);

ClrVector clr(const Composition& x);
// Softmax of z; shift-invariant. Errors: NonFinite, DimensionTooSmall.
Composition clr_inv(std::span<const double> z);
inline Composition clr_inv(const ClrVector& z) { return clr_inv(z.coords()); }

}  // namespace coda
