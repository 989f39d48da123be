#include "coda/kernels.hpp"

#include <cstdint>

#include "coda/error.hpp"

namespace coda {
namespace {

void check_affine(const Matrix& in, const Matrix& weight, std::span<const double> bias) {
  if (in.cols != weight.cols || bias.size() != weight.rows) {
    throw Error(ErrorCode::DimensionMismatch, "affine: shapes do not conform");
  }
}

// The per-element bodies are shared so both loop drivers accumulate in the
// same order.
inline double affine_element(const Matrix& in, const Matrix& weight,
                             std::span<const double> bias, std::size_t i, std::size_t o) {
  const double* x = in.data.data() + i * in.cols;
  const double* w = weight.data.data() + o * weight.cols;
  double acc = bias[o];
  for (std::size_t k = 0; k < in.cols; ++k) acc += x[k] * w[k];
  return acc;
}

inline double backprop_input_element(const Matrix& grad_out, const Matrix& weight, std::size_t i,
                                     std::size_t k) {
  double acc = 0.0;
  for (std::size_t o = 0; o < weight.rows; ++o) acc += grad_out(i, o) * weight(o, k);
  return acc;
}

inline double weight_grad_element(const Matrix& grad_out, const Matrix& in, std::size_t o,
                                  std::size_t k) {
  double acc = 0.0;
  for (std::size_t i = 0; i < in.rows; ++i) acc += grad_out(i, o) * in(i, k);
  return acc;
}

inline double bias_grad_element(const Matrix& grad_out, std::size_t o) {
  double acc = 0.0;
  for (std::size_t i = 0; i < grad_out.rows; ++i) acc += grad_out(i, o);
  return acc;
}

inline double dot_rows(const Matrix& a, std::size_t i, std::size_t j) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.cols; ++k) acc += a(i, k) * a(j, k);
  return acc;
}

void resize(Matrix& m, std::size_t rows, std::size_t cols) {
  m.rows = rows;
  m.cols = cols;
  m.data.assign(rows * cols, 0.0);
}

}  // namespace

namespace serial {

void affine(const Matrix& in, const Matrix& weight, std::span<const double> bias, Matrix& out) {
  check_affine(in, weight, bias);
  resize(out, in.rows, weight.rows);
  for (std::size_t i = 0; i < in.rows; ++i)
    for (std::size_t o = 0; o < weight.rows; ++o) out(i, o) = affine_element(in, weight, bias, i, o);
}

void backprop_input(const Matrix& grad_out, const Matrix& weight, Matrix& grad_in) {
  if (grad_out.cols != weight.rows) throw Error(ErrorCode::DimensionMismatch, "backprop_input");
  resize(grad_in, grad_out.rows, weight.cols);
  for (std::size_t i = 0; i < grad_out.rows; ++i)
    for (std::size_t k = 0; k < weight.cols; ++k)
      grad_in(i, k) = backprop_input_element(grad_out, weight, i, k);
}

void backprop_params(const Matrix& grad_out, const Matrix& in, Matrix& grad_weight,
                     std::span<double> grad_bias) {
  if (grad_out.rows != in.rows || grad_bias.size() != grad_out.cols) {
    throw Error(ErrorCode::DimensionMismatch, "backprop_params");
  }
  resize(grad_weight, grad_out.cols, in.cols);
  for (std::size_t o = 0; o < grad_out.cols; ++o) {
    for (std::size_t k = 0; k < in.cols; ++k) grad_weight(o, k) = weight_grad_element(grad_out, in, o, k);
    grad_bias[o] = bias_grad_element(grad_out, o);
  }
}

void gram(const Matrix& a, Matrix& out) {
  resize(out, a.rows, a.rows);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.rows; ++j) out(i, j) = dot_rows(a, i, j);
}

}  // namespace serial

namespace parallel {

void affine(const Matrix& in, const Matrix& weight, std::span<const double> bias, Matrix& out) {
  check_affine(in, weight, bias);
  resize(out, in.rows, weight.rows);
  const auto n = static_cast<std::int64_t>(in.rows);
  const auto m = static_cast<std::int64_t>(weight.rows);
#pragma omp parallel for collapse(2) schedule(static)
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t o = 0; o < m; ++o)
      out(static_cast<std::size_t>(i), static_cast<std::size_t>(o)) =
          affine_element(in, weight, bias, static_cast<std::size_t>(i), static_cast<std::size_t>(o));
}

void backprop_input(const Matrix& grad_out, const Matrix& weight, Matrix& grad_in) {
  if (grad_out.cols != weight.rows) throw Error(ErrorCode::DimensionMismatch, "backprop_input");
  resize(grad_in, grad_out.rows, weight.cols);
  const auto n = static_cast<std::int64_t>(grad_out.rows);
  const auto k_max = static_cast<std::int64_t>(weight.cols);
#pragma omp parallel for collapse(2) schedule(static)
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t k = 0; k < k_max; ++k)
      grad_in(static_cast<std::size_t>(i), static_cast<std::size_t>(k)) = backprop_input_element(
          grad_out, weight, static_cast<std::size_t>(i), static_cast<std::size_t>(k));
}

void backprop_params(const Matrix& grad_out, const Matrix& in, Matrix& grad_weight,
                     std::span<double> grad_bias) {
  if (grad_out.rows != in.rows || grad_bias.size() != grad_out.cols) {
    throw Error(ErrorCode::DimensionMismatch, "backprop_params");
  }
  resize(grad_weight, grad_out.cols, in.cols);
  const auto m = static_cast<std::int64_t>(grad_out.cols);
  const auto k_max = static_cast<std::int64_t>(in.cols);
#pragma omp parallel for collapse(2) schedule(static)
  for (std::int64_t o = 0; o < m; ++o)
    for (std::int64_t k = 0; k < k_max; ++k)
      grad_weight(static_cast<std::size_t>(o), static_cast<std::size_t>(k)) = weight_grad_element(
          grad_out, in, static_cast<std::size_t>(o), static_cast<std::size_t>(k));
#pragma omp parallel for schedule(static)
  for (std::int64_t o = 0; o < m; ++o)
    grad_bias[static_cast<std::size_t>(o)] = bias_grad_element(grad_out, static_cast<std::size_t>(o));
}

void gram(const Matrix& a, Matrix& out) {
  resize(out, a.rows, a.rows);
  const auto n = static_cast<std::int64_t>(a.rows);
#pragma omp parallel for collapse(2) schedule(static)
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < n; ++j)
      out(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
          dot_rows(a, static_cast<std::size_t>(i), static_cast<std::size_t>(j));
}

}  // namespace parallel
}  // namespace coda
