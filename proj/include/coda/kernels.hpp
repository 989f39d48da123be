#pragma once

// Dense kernels behind the network trainer.
//
// Each kernel exists twice: `serial::` is the plain reference loop and
// `parallel::` distributes independent output elements over OpenMP threads.
// Every output element is accumulated by exactly one thread in the same
// index order as the reference, so both variants agree bit-for-bit for any
// thread count.

#include <cstddef>
#include <span>
#include <vector>

namespace coda {

// Row-major dense matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) noexcept { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data[i * cols + j]; }
  std::span<double> row(std::size_t i) noexcept { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const noexcept { return {data.data() + i * cols, cols}; }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

namespace serial {

// out = in * weight^T + bias; in: n x k, weight: m x k, bias: m  ->  n x m
void affine(const Matrix& in, const Matrix& weight, std::span<const double> bias, Matrix& out);
// grad_in = grad_out * weight; grad_out: n x m, weight: m x k  ->  n x k
void backprop_input(const Matrix& grad_out, const Matrix& weight, Matrix& grad_in);
// grad_weight = grad_out^T * in, grad_bias = column sums of grad_out
void backprop_params(const Matrix& grad_out, const Matrix& in, Matrix& grad_weight,
                     std::span<double> grad_bias);
// gram = a * a^T  (n x n)
void gram(const Matrix& a, Matrix& out);

}  // namespace serial

namespace parallel {

void affine(const Matrix& in, const Matrix& weight, std::span<const double> bias, Matrix& out);
void backprop_input(const Matrix& grad_out, const Matrix& weight, Matrix& grad_in);
void backprop_params(const Matrix& grad_out, const Matrix& in, Matrix& grad_weight,
                     std::span<double> grad_bias);
void gram(const Matrix& a, Matrix& out);

}  // namespace parallel

}  // namespace coda
