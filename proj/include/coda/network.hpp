#pragma once

// MLP encoder + projection head with hand-written backpropagation.
//
// Encoder: input -> 256 -> 128 -> 64 (ReLU after each hidden layer, linear
// representation). Head: 64 -> 32 (ReLU) -> 16, L2-normalized. Widths are
// configurable so that gradient checks can run on shrunken networks.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "coda/composition.hpp"
#include "coda/kernels.hpp"
#include "coda/preprocess.hpp"

namespace coda {

enum class InputTransform { Clr, Raw };
std::string_view input_transform_name(InputTransform t) noexcept;

struct NetworkShape {
  std::size_t input = 0;
  std::vector<std::size_t> encoder_hidden{256, 128};
  std::size_t representation = 64;
  std::vector<std::size_t> head_hidden{32};
  std::size_t projection = 16;

  static NetworkShape standard(std::size_t input) { return NetworkShape{input}; }
  friend bool operator==(const NetworkShape&, const NetworkShape&) = default;
};

struct DenseLayer {
  Matrix weight;  // out x in
  std::vector<double> bias;

  std::size_t in() const noexcept { return weight.cols; }
  std::size_t out() const noexcept { return weight.rows; }
  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

// Uniform(-sqrt(6/fan_in), sqrt(6/fan_in)) weights, zero biases.
DenseLayer init_dense(std::size_t in, std::size_t out, std::uint64_t seed, std::string_view tag,
                      std::size_t index);

struct EncoderState {
  NetworkShape shape;
  std::vector<DenseLayer> encoder;
  std::vector<DenseLayer> head;
  InputTransform input = InputTransform::Clr;
  std::uint64_t input_library_size = kDefaultLibrarySize;

  friend bool operator==(const EncoderState&, const EncoderState&) = default;
};

EncoderState init_encoder(const NetworkShape& shape, std::uint64_t seed,
                          InputTransform input = InputTransform::Clr);

// Throws InvalidArgument if layer shapes disagree with `shape`, NonFinite
// if any parameter is not finite.
void validate(const EncoderState& state);

// FNV-1a over the bit patterns of every parameter, in layer order.
std::uint64_t parameter_hash(const EncoderState& state);

// Network inputs: clr(zero_replace(x, L)) or the raw parts.
Matrix encode_inputs(const EncoderState& state, std::span<const Composition> batch);

// Projections with norm below this get it added before dividing.
inline constexpr double kNormGuard = 1e-12;

struct ForwardPass {
  std::vector<Matrix> encoder_inputs;  // input to each encoder layer
  std::vector<Matrix> encoder_pre;     // pre-activation of each encoder layer
  std::vector<Matrix> head_inputs;
  std::vector<Matrix> head_pre;
  Matrix representation;  // n x 64
  Matrix raw_projection;  // n x 16, before normalization
  Matrix projection;      // unit rows
  std::vector<double> projection_norms;
};

// Errors: NonFinite if inputs or activations overflow.
ForwardPass forward(const EncoderState& state, const Matrix& inputs);
Matrix represent(const EncoderState& state, const Matrix& inputs);

// Gradient storage laid out like the parameters.
struct NetworkGradient {
  std::vector<DenseLayer> encoder;
  std::vector<DenseLayer> head;
};

// Backpropagates dL/d(projection) (the normalized rows) through the
// normalization, the head and the encoder.
NetworkGradient backward(const EncoderState& state, const ForwardPass& pass,
                         const Matrix& grad_projection);

// Backpropagates dL/d(representation) through the encoder only; the head
// gradient entries are zero.
NetworkGradient backward_encoder(const EncoderState& state, const ForwardPass& pass,
                                 const Matrix& grad_representation);

// Parameter visitor in a fixed order (encoder layers then head layers;
// weight then bias within a layer).
std::vector<std::span<double>> parameter_blocks(EncoderState& state);
std::vector<std::span<double>> parameter_blocks(NetworkGradient& grad);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam over a fixed list of parameter blocks.
class Adam {
 public:
  Adam(AdamConfig cfg, const std::vector<std::span<double>>& params);
  void step(const std::vector<std::span<double>>& params,
            const std::vector<std::span<double>>& grads);
  std::uint64_t steps() const noexcept { return t_; }

 private:
  AdamConfig cfg_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::uint64_t t_ = 0;
};

}  // namespace coda
