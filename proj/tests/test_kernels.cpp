#include <gtest/gtest.h>

#include <omp.h>

#include <random>

#include "coda/kernels.hpp"

using namespace coda;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& gen) {
  std::normal_distribution<double> z;
  Matrix m(r, c);
  for (double& v : m.data) v = z(gen);
  return m;
}

class KernelEquality : public ::testing::TestWithParam<int> {
 protected:
  void SetUp() override {
    saved_ = omp_get_max_threads();
    omp_set_num_threads(GetParam());
  }
  void TearDown() override { omp_set_num_threads(saved_); }

 private:
  int saved_ = 1;
};

}  // namespace

TEST(Kernels, AffineMatchesNaiveProduct) {
  std::mt19937_64 gen(1);
  const auto in = random_matrix(3, 4, gen);
  const auto w = random_matrix(2, 4, gen);
  const std::vector<double> b{0.5, -1.0};
  Matrix out;
  serial::affine(in, w, b, out);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t o = 0; o < 2; ++o) {
      double acc = b[o];
      for (std::size_t k = 0; k < 4; ++k) acc += in(i, k) * w(o, k);
      EXPECT_NEAR(out(i, o), acc, 1e-14);
    }
  }
}

TEST_P(KernelEquality, ParallelIsBitIdenticalToSerial) {
  std::mt19937_64 gen(7);
  const auto in = random_matrix(37, 23, gen);
  const auto w = random_matrix(19, 23, gen);
  const auto g = random_matrix(37, 19, gen);
  std::vector<double> b(19);
  for (double& v : b) v = 0.1;

  Matrix s_out, p_out, s_gi, p_gi, s_gw, p_gw, s_gram, p_gram;
  serial::affine(in, w, b, s_out);
  parallel::affine(in, w, b, p_out);
  EXPECT_EQ(s_out, p_out);

  serial::backprop_input(g, w, s_gi);
  parallel::backprop_input(g, w, p_gi);
  EXPECT_EQ(s_gi, p_gi);

  std::vector<double> s_gb(19), p_gb(19);
  serial::backprop_params(g, in, s_gw, s_gb);
  parallel::backprop_params(g, in, p_gw, p_gb);
  EXPECT_EQ(s_gw, p_gw);
  EXPECT_EQ(s_gb, p_gb);

  serial::gram(in, s_gram);
  parallel::gram(in, p_gram);
  EXPECT_EQ(s_gram, p_gram);
  for (std::size_t i = 0; i < in.rows; ++i) {
    for (std::size_t k = 0; k < in.rows; ++k) EXPECT_EQ(s_gram(i, k), s_gram(k, i));
  }
}

INSTANTIATE_TEST_SUITE_P(Threads, KernelEquality, ::testing::Values(1, 2, 3, 8));
