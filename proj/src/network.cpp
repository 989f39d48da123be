#include "coda/network.hpp"

#include <cmath>
#include <cstring>

#include "coda/error.hpp"
#include "coda/rng.hpp"

namespace coda {
namespace {

void relu_inplace(Matrix& m) {
  for (double& v : m.data) v = v > 0.0 ? v : 0.0;
}

void require_finite(const Matrix& m, const char* what) {
  for (double v : m.data) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, what);
  }
}

// Runs `layers` on `x`, applying ReLU after every layer but the last.
Matrix run_stack(const std::vector<DenseLayer>& layers, Matrix x, std::vector<Matrix>* inputs,
                 std::vector<Matrix>* pre) {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Matrix z;
    parallel::affine(x, layers[l].weight, layers[l].bias, z);
    if (inputs) inputs->push_back(std::move(x));
    if (pre) pre->push_back(z);
    if (l + 1 < layers.size()) relu_inplace(z);
    x = std::move(z);
  }
  return x;
}

// Backpropagates through a stack; `grad` is dL/d(output of the last layer)
// and on return holds dL/d(stack input).
void backprop_stack(const std::vector<DenseLayer>& layers, const std::vector<Matrix>& inputs,
                    const std::vector<Matrix>& pre, Matrix& grad,
                    std::vector<DenseLayer>& grads) {
  grads.resize(layers.size());
  for (std::size_t l = layers.size(); l-- > 0;) {
    if (l + 1 < layers.size()) {
      for (std::size_t k = 0; k < grad.data.size(); ++k) {
        if (!(pre[l].data[k] > 0.0)) grad.data[k] = 0.0;
      }
    }
    grads[l].bias.assign(layers[l].out(), 0.0);
    parallel::backprop_params(grad, inputs[l], grads[l].weight, grads[l].bias);
    Matrix grad_in;
    parallel::backprop_input(grad, layers[l].weight, grad_in);
    grad = std::move(grad_in);
  }
}

void zero_like(const std::vector<DenseLayer>& layers, std::vector<DenseLayer>& out) {
  out.clear();
  for (const auto& l : layers) {
    out.push_back({Matrix(l.out(), l.in()), std::vector<double>(l.out(), 0.0)});
  }
}

}  // namespace

std::string_view input_transform_name(InputTransform t) noexcept {
  return t == InputTransform::Clr ? "clr" : "raw";
}

DenseLayer init_dense(std::size_t in, std::size_t out, std::uint64_t seed, std::string_view tag,
                      std::size_t index) {
  RandomStream rng(seed, tag, index);
  const double bound = std::sqrt(6.0 / static_cast<double>(in));
  DenseLayer layer{Matrix(out, in), std::vector<double>(out, 0.0)};
  for (double& w : layer.weight.data) w = (2.0 * rng.uniform() - 1.0) * bound;
  return layer;
}

EncoderState init_encoder(const NetworkShape& shape, std::uint64_t seed, InputTransform input) {
  if (shape.input < 2) throw Error(ErrorCode::DimensionTooSmall, "encoder input width");
  EncoderState state;
  state.shape = shape;
  state.input = input;
  std::size_t width = shape.input;
  std::size_t index = 0;
  for (std::size_t h : shape.encoder_hidden) {
    state.encoder.push_back(init_dense(width, h, seed, "init/encoder", index++));
    width = h;
  }
  state.encoder.push_back(init_dense(width, shape.representation, seed, "init/encoder", index++));
  width = shape.representation;
  index = 0;
  for (std::size_t h : shape.head_hidden) {
    state.head.push_back(init_dense(width, h, seed, "init/head", index++));
    width = h;
  }
  state.head.push_back(init_dense(width, shape.projection, seed, "init/head", index++));
  return state;
}

void validate(const EncoderState& state) {
  const auto& s = state.shape;
  auto check_stack = [](const std::vector<DenseLayer>& layers, std::size_t in,
                        const std::vector<std::size_t>& hidden, std::size_t out) {
    if (layers.size() != hidden.size() + 1) return false;
    std::size_t width = in;
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const std::size_t next = l < hidden.size() ? hidden[l] : out;
      if (layers[l].in() != width || layers[l].out() != next || layers[l].bias.size() != next ||
          layers[l].weight.data.size() != next * width) {
        return false;
      }
      width = next;
    }
    return true;
  };
  if (!check_stack(state.encoder, s.input, s.encoder_hidden, s.representation) ||
      !check_stack(state.head, s.representation, s.head_hidden, s.projection)) {
    throw Error(ErrorCode::InvalidArgument, "layer shapes do not match the network shape");
  }
  for (const auto* stack : {&state.encoder, &state.head}) {
    for (const auto& l : *stack) {
      for (double v : l.weight.data)
        if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "weight");
      for (double v : l.bias)
        if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "bias");
    }
  }
}

std::uint64_t parameter_hash(const EncoderState& state) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffu;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto* stack : {&state.encoder, &state.head}) {
    for (const auto& l : *stack) {
      for (double v : l.weight.data) mix(v);
      for (double v : l.bias) mix(v);
    }
  }
  return h;
}

Matrix encode_inputs(const EncoderState& state, std::span<const Composition> batch) {
  Matrix out(batch.size(), state.shape.input);
  const LibrarySize pseudo(state.input_library_size);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (batch[i].size() != state.shape.input) {
      throw Error(ErrorCode::DimensionMismatch, "composition width vs encoder input");
    }
    auto row = out.row(i);
    if (state.input == InputTransform::Clr) {
      const ClrVector z = clr(zero_replace(batch[i], pseudo));
      std::copy(z.values().begin(), z.values().end(), row.begin());
    } else {
      std::copy(batch[i].values().begin(), batch[i].values().end(), row.begin());
    }
  }
  return out;
}

ForwardPass forward(const EncoderState& state, const Matrix& inputs) {
  if (inputs.cols != state.shape.input) {
    throw Error(ErrorCode::DimensionMismatch, "input width vs encoder input");
  }
  require_finite(inputs, "network input");
  ForwardPass pass;
  pass.representation = run_stack(state.encoder, inputs, &pass.encoder_inputs, &pass.encoder_pre);
  pass.raw_projection =
      run_stack(state.head, pass.representation, &pass.head_inputs, &pass.head_pre);
  require_finite(pass.raw_projection, "projection");

  pass.projection = pass.raw_projection;
  pass.projection_norms.assign(inputs.rows, 0.0);
  for (std::size_t i = 0; i < pass.projection.rows; ++i) {
    auto row = pass.projection.row(i);
    double sq = 0.0;
    for (double v : row) sq += v * v;
    const double n = std::sqrt(sq);
    pass.projection_norms[i] = n;
    const double denom = n < kNormGuard ? n + kNormGuard : n;
    for (double& v : row) v /= denom;
  }
  return pass;
}

Matrix represent(const EncoderState& state, const Matrix& inputs) {
  if (inputs.cols != state.shape.input) {
    throw Error(ErrorCode::DimensionMismatch, "input width vs encoder input");
  }
  require_finite(inputs, "network input");
  Matrix rep = run_stack(state.encoder, inputs, nullptr, nullptr);
  require_finite(rep, "representation");
  return rep;
}

NetworkGradient backward(const EncoderState& state, const ForwardPass& pass,
                         const Matrix& grad_projection) {
  const Matrix& u = pass.raw_projection;
  if (grad_projection.rows != u.rows || grad_projection.cols != u.cols) {
    throw Error(ErrorCode::DimensionMismatch, "projection gradient shape");
  }
  // z = u / d with d = |u| (+ guard); dz/du = I/d - u u^T / (d^2 |u|).
  Matrix grad(u.rows, u.cols);
  for (std::size_t i = 0; i < u.rows; ++i) {
    const double n = pass.projection_norms[i];
    const double d = n < kNormGuard ? n + kNormGuard : n;
    const auto g = grad_projection.row(i);
    const auto ui = u.row(i);
    double ug = 0.0;
    for (std::size_t k = 0; k < u.cols; ++k) ug += ui[k] * g[k];
    const double radial = n > 0.0 ? ug / (d * d * n) : 0.0;
    auto out = grad.row(i);
    for (std::size_t k = 0; k < u.cols; ++k) out[k] = g[k] / d - ui[k] * radial;
  }
  NetworkGradient result;
  backprop_stack(state.head, pass.head_inputs, pass.head_pre, grad, result.head);
  backprop_stack(state.encoder, pass.encoder_inputs, pass.encoder_pre, grad, result.encoder);
  return result;
}

NetworkGradient backward_encoder(const EncoderState& state, const ForwardPass& pass,
                                 const Matrix& grad_representation) {
  if (grad_representation.rows != pass.representation.rows ||
      grad_representation.cols != pass.representation.cols) {
    throw Error(ErrorCode::DimensionMismatch, "representation gradient shape");
  }
  NetworkGradient result;
  zero_like(state.head, result.head);
  Matrix grad = grad_representation;
  backprop_stack(state.encoder, pass.encoder_inputs, pass.encoder_pre, grad, result.encoder);
  return result;
}

std::vector<std::span<double>> parameter_blocks(EncoderState& state) {
  std::vector<std::span<double>> blocks;
  for (auto* stack : {&state.encoder, &state.head}) {
    for (auto& l : *stack) {
      blocks.emplace_back(l.weight.data);
      blocks.emplace_back(l.bias);
    }
  }
  return blocks;
}

std::vector<std::span<double>> parameter_blocks(NetworkGradient& grad) {
  std::vector<std::span<double>> blocks;
  for (auto* stack : {&grad.encoder, &grad.head}) {
    for (auto& l : *stack) {
      blocks.emplace_back(l.weight.data);
      blocks.emplace_back(l.bias);
    }
  }
  return blocks;
}

Adam::Adam(AdamConfig cfg, const std::vector<std::span<double>>& params) : cfg_(cfg) {
  for (const auto& p : params) {
    m_.emplace_back(p.size(), 0.0);
    v_.emplace_back(p.size(), 0.0);
  }
}

void Adam::step(const std::vector<std::span<double>>& params,
                const std::vector<std::span<double>>& grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "Adam parameter blocks");
  }
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t b = 0; b < params.size(); ++b) {
    auto p = params[b];
    auto g = grads[b];
    auto& m = m_[b];
    auto& v = v_[b];
    if (p.size() != m.size() || g.size() != m.size()) {
      throw Error(ErrorCode::DimensionMismatch, "Adam block size");
    }
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = cfg_.beta1 * m[k] + (1.0 - cfg_.beta1) * g[k];
      v[k] = cfg_.beta2 * v[k] + (1.0 - cfg_.beta2) * g[k] * g[k];
      const double m_hat = m[k] / c1;
      const double v_hat = v[k] / c2;
      p[k] -= cfg_.learning_rate * m_hat / (std::sqrt(v_hat) + cfg_.epsilon);
    }
  }
}

}  // namespace coda
