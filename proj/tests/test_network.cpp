#include <gtest/gtest.h>

#include <cmath>

#include "coda/contrastive.hpp"
#include "coda/network.hpp"
#include "gradient_check.hpp"
#include "test_support.hpp"

using namespace coda;
using namespace coda::testing;

namespace {

NetworkShape small_shape() {
  NetworkShape s;
  s.input = 6;
  s.encoder_hidden = {5, 4};
  s.representation = 4;
  s.head_hidden = {3};
  s.projection = 3;
  return s;
}

// Small network with nonzero biases so every bias gradient is exercised.
EncoderState small_state(std::uint64_t seed) {
  EncoderState st = init_encoder(small_shape(), seed);
  std::mt19937_64 gen(seed + 100);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (auto* stack : {&st.encoder, &st.head})
    for (auto& layer : *stack)
      for (double& b : layer.bias) b = u(gen);
  return st;
}

std::vector<Composition> small_batch(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<Composition> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(random_composition(gen, 6));
  return out;
}

}  // namespace

TEST(Network, InitIsDeterministicWithStandardShape) {
  const auto a = init_encoder(NetworkShape::standard(10), 3);
  const auto b = init_encoder(NetworkShape::standard(10), 3);
  EXPECT_EQ(a, b);
  EXPECT_EQ(parameter_hash(a), parameter_hash(b));
  EXPECT_NE(parameter_hash(a), parameter_hash(init_encoder(NetworkShape::standard(10), 4)));
  ASSERT_EQ(a.encoder.size(), 3u);
  EXPECT_EQ(a.encoder[0].out(), 256u);
  EXPECT_EQ(a.encoder[0].in(), 10u);
  EXPECT_EQ(a.encoder[1].out(), 128u);
  EXPECT_EQ(a.encoder[2].out(), 64u);
  ASSERT_EQ(a.head.size(), 2u);
  EXPECT_EQ(a.head[0].out(), 32u);
  EXPECT_EQ(a.head[1].out(), 16u);
  const double bound = std::sqrt(6.0 / 10.0);
  for (double w : a.encoder[0].weight.data) EXPECT_LE(std::abs(w), bound);
  EXPECT_NO_THROW(validate(a));
  EXPECT_CODA_ERROR(init_encoder(NetworkShape::standard(1), 0), ErrorCode::DimensionTooSmall);
}

TEST(Network, ValidateCatchesBadState) {
  auto st = small_state(1);
  st.encoder[1].bias.push_back(0.0);
  EXPECT_CODA_ERROR(validate(st), ErrorCode::InvalidArgument);
  st = small_state(1);
  st.head[0].weight.data[0] = std::nan("");
  EXPECT_CODA_ERROR(validate(st), ErrorCode::NonFinite);
}

TEST(Network, HashSeesEveryParameter) {
  const auto st = small_state(2);
  const auto base = parameter_hash(st);
  auto copy = st;
  for (auto& block : parameter_blocks(copy)) {
    for (double& v : block) {
      const double saved = v;
      v = std::nextafter(v, 1e9);
      EXPECT_NE(parameter_hash(copy), base);
      v = saved;
    }
  }
  EXPECT_EQ(parameter_hash(copy), base);
}

TEST(Network, ProjectionsHaveUnitNorm) {
  const auto st = init_encoder(NetworkShape::standard(20), 5);
  std::mt19937_64 gen(9);
  std::vector<Composition> batch;
  for (int i = 0; i < 16; ++i) batch.push_back(random_composition(gen, 20));
  const auto pass = forward(st, encode_inputs(st, batch));
  ASSERT_EQ(pass.projection.rows, 16u);
  ASSERT_EQ(pass.projection.cols, 16u);
  ASSERT_EQ(pass.representation.cols, 64u);
  for (std::size_t i = 0; i < 16; ++i) {
    double sq = 0.0;
    for (double v : pass.projection.row(i)) sq += v * v;
    EXPECT_NEAR(std::sqrt(sq), 1.0, 1e-9);
  }
  EXPECT_EQ(represent(st, encode_inputs(st, batch)), pass.representation);
}

TEST(Network, EncodeInputsClrAndRaw) {
  auto st = small_state(3);
  const Composition x({0.5, 0.1, 0.1, 0.1, 0.2, 0.0});
  const auto clr_in = encode_inputs(st, std::vector<Composition>{x});
  const auto want = clr_oracle(zero_replace(x, LibrarySize(st.input_library_size)).values());
  for (std::size_t j = 0; j < 6; ++j) EXPECT_NEAR(clr_in(0, j), want[j], 1e-12);
  st.input = InputTransform::Raw;
  const auto raw = encode_inputs(st, std::vector<Composition>{x});
  for (std::size_t j = 0; j < 6; ++j) EXPECT_EQ(raw(0, j), x[j]);
}

TEST(Network, ContrastiveGradientMatchesFiniteDifferences) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto st = small_state(seed);
    ViewBatch views;
    views.views = small_batch(6, seed + 10);
    views.partner = {1, 0, 3, 2, 5, 4};
    auto step = contrastive_step(st, views, 0.5);
    const auto result = check_gradient(parameter_blocks(st), parameter_blocks(step.gradient),
                                       [&] { return contrastive_step(st, views, 0.5).loss; });
    EXPECT_GT(result.checked, 80u);
    EXPECT_LT(result.worst_relative, 1e-4) << "seed " << seed;
  }
}

TEST(Network, SupervisedGradientMatchesFiniteDifferences) {
  auto st = small_state(4);
  const auto inputs = encode_inputs(st, small_batch(8, 20));
  const std::vector<int> labels{0, 1, 1, 0, 1, 0, 0, 1};
  const std::vector<double> weights{1, 1, 0.5, 1, 0.1, 1, 2, 1};
  LinearHead head = init_head(4, 7);
  head.bias = 0.2;
  auto step = supervised_step(st, head, inputs, labels, weights);
  auto loss = [&] { return supervised_step(st, head, inputs, labels, weights).loss; };

  const auto enc = check_gradient(parameter_blocks(st), parameter_blocks(step.encoder_gradient), loss);
  EXPECT_LT(enc.worst_relative, 1e-4);
  // Head parameters are not part of the encoder blocks.
  for (const auto& layer : step.encoder_gradient.head)
    for (double v : layer.weight.data) EXPECT_EQ(v, 0.0);
  const auto hd = check_gradient(
      {std::span<double>(head.weight), std::span<double>(&head.bias, 1)},
      {std::span<double>(step.head_gradient.weight), std::span<double>(&step.head_gradient.bias, 1)},
      loss);
  EXPECT_EQ(hd.checked, 5u);
  EXPECT_LT(hd.worst_relative, 1e-6);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  std::vector<double> x{1.0, -2.0, 3.0};
  std::vector<double> g{0.5, -4.0, 0.0};
  std::vector<std::span<double>> params{std::span<double>(x)};
  Adam adam({0.1, 0.9, 0.999, 1e-8}, params);
  adam.step(params, {std::span<double>(g)});
  EXPECT_EQ(adam.steps(), 1u);
  // Bias-corrected first step is lr * g / (|g| + eps).
  EXPECT_NEAR(x[0], 0.9, 1e-7);
  EXPECT_NEAR(x[1], -1.9, 1e-7);
  EXPECT_EQ(x[2], 3.0);
}

TEST(Adam, MinimizesQuadratic) {
  std::vector<double> x{5.0, -3.0};
  std::vector<std::span<double>> params{std::span<double>(x)};
  Adam adam({0.05, 0.9, 0.999, 1e-8}, params);
  std::vector<double> g(2);
  for (int t = 0; t < 2000; ++t) {
    g[0] = 2 * (x[0] - 1.0);
    g[1] = 2 * (x[1] + 2.0);
    adam.step(params, {std::span<double>(g)});
  }
  EXPECT_NEAR(x[0], 1.0, 1e-3);
  EXPECT_NEAR(x[1], -2.0, 1e-3);
}
