#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "coda/augment.hpp"
#include "coda/numeric.hpp"
#include "test_support.hpp"

using namespace coda;
using namespace coda::testing;

namespace {

std::vector<LabeledSample> toy_train(std::size_t n, std::size_t p, std::size_t classes,
                                     std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<LabeledSample> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({random_composition(gen, p), i % classes, 1.0, {}});
  return out;
}

bool same_parts(const Composition& a, const Composition& b, double tol) {
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (std::abs(a[j] - b[j]) > tol) return false;
  }
  return true;
}

}  // namespace

TEST(Strategy, NamesRoundTrip) {
  for (Strategy s : kAllStrategies) {
    EXPECT_EQ(parse_strategy(strategy_name(s)), s);
    const Provenance p{s};
    EXPECT_EQ(Provenance::parse(p.tag()), p);
  }
  EXPECT_EQ(parse_strategy("cutmix"), Strategy::CompositionalCutMix);
  EXPECT_FALSE(parse_strategy("bogus").has_value());
  EXPECT_EQ(Provenance{}.tag(), "original");
  EXPECT_FALSE(Provenance::parse("synthetic:bogus").has_value());
}

TEST(MixupCore, WorkedExampleAndEndpoints) {
  const Composition x1({0.5, 0.25, 0.25});
  const Composition x2({0.25, 0.25, 0.5});
  expect_parts_near(aitchison_mixup_core(x1, x2, 0.5), {0.3694, 0.2612, 0.3694}, 5e-5);
  // Oracle: normalized elementwise geometric mean.
  const double a = std::sqrt(0.125), b = 0.25;
  expect_parts_near(aitchison_mixup_core(x1, x2, 0.5), {a / (2 * a + b), b / (2 * a + b), a / (2 * a + b)},
                    1e-15);
  expect_parts_near(aitchison_mixup_core(x1, x2, 1.0), x1.values(), 1e-12);
  expect_parts_near(aitchison_mixup_core(x1, x2, 0.0), x2.values(), 1e-12);
  EXPECT_CODA_ERROR(aitchison_mixup_core(x1, x2, 1.5), ErrorCode::LambdaOutOfRange);
  EXPECT_CODA_ERROR(aitchison_mixup_core(Composition({0.5, 0.5, 0.0}), x2, 0.5), ErrorCode::ZeroPart);
}

TEST(MixupCore, LiesOnGeodesic) {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const std::size_t p = random_dim(gen, 2, 40);
    const auto x1 = random_composition(gen, p);
    const auto x2 = random_composition(gen, p);
    const double lambda = unit(gen);
    const auto aug = aitchison_mixup_core(x1, x2, lambda);
    EXPECT_NEAR(distance(x1, aug), (1 - lambda) * distance(x1, x2), 1e-9);
    EXPECT_NEAR(distance(x2, aug), lambda * distance(x1, x2), 1e-9);
  }
}

TEST(SubcompositionCore, WorkedExamples) {
  const Composition x({0.5, 0.3, 0.2});
  expect_parts_near(random_subcomposition_core(x, {true, false, true}), {0.5 / 0.7, 0.0, 0.2 / 0.7},
                    1e-15);
  EXPECT_EQ(random_subcomposition_core(x, {true, true, true}), x);
  EXPECT_CODA_ERROR(random_subcomposition_core(x, {false, false, false}),
                    ErrorCode::EmptySubcomposition);
  EXPECT_CODA_ERROR(random_subcomposition_core(Composition({0.0, 1.0}), {true, false}),
                    ErrorCode::EmptySubcomposition);
  EXPECT_CODA_ERROR(random_subcomposition_core(x, {true}), ErrorCode::DimensionMismatch);
}

TEST(CutMixCore, WorkedExamples) {
  const Composition x1({0.5, 0.25, 0.25});
  const Composition x2({0.1, 0.8, 0.1});
  expect_parts_near(compositional_cutmix_core(x1, x2, {false, true, false}),
                    {0.5 / 1.55, 0.8 / 1.55, 0.25 / 1.55}, 1e-15);
  expect_parts_near(compositional_cutmix_core(x1, x2, {false, true, false}), {0.3226, 0.5161, 0.1613},
                    5e-5);
  expect_parts_near(compositional_cutmix_core(x1, x2, {false, false, false}), x1.values(), 1e-12);
  expect_parts_near(compositional_cutmix_core(x1, x2, {true, true, true}), x2.values(), 1e-12);
}

TEST(CutMixCore, TwoPartMaskEnumeration) {
  const Composition x1({0.6, 0.4});
  const Composition x2({0.3, 0.7});
  expect_parts_near(compositional_cutmix_core(x1, x2, {false, false}), {0.6, 0.4}, 1e-15);
  expect_parts_near(compositional_cutmix_core(x1, x2, {true, true}), {0.3, 0.7}, 1e-15);
  expect_parts_near(compositional_cutmix_core(x1, x2, {true, false}), {0.3 / 0.7, 0.4 / 0.7}, 1e-15);
  expect_parts_near(compositional_cutmix_core(x1, x2, {false, true}), {0.6 / 1.3, 0.7 / 1.3}, 1e-15);
}

TEST(MultinomialCore, DegenerateCases) {
  RandomStream rng(1, "multinomial-test");
  for (int t = 0; t < 50; ++t) {
    const auto one = multinomial_resample_core(Composition({0.2, 0.5, 0.3}), LibrarySize(1), rng);
    EXPECT_EQ(one.support_size(), 1u);
    const auto hot = multinomial_resample_core(Composition({0.0, 1.0, 0.0}), LibrarySize(37), rng);
    EXPECT_EQ(hot.values(), (std::vector<double>{0.0, 1.0, 0.0}));
  }
}

TEST(MultinomialCore, MeanWithinThreeStandardErrors) {
  const Composition x({0.5, 0.3, 0.2});
  const std::uint64_t L = 10000;
  const int draws = 10000;
  RandomStream rng(7, "multinomial-mean");
  std::vector<double> mean(3, 0.0);
  for (int d = 0; d < draws; ++d) {
    const auto y = multinomial_resample_core(x, LibrarySize(L), rng);
    for (std::size_t j = 0; j < 3; ++j) mean[j] += y[j] / draws;
  }
  for (std::size_t j = 0; j < 3; ++j) {
    const double se = std::sqrt(x[j] * (1 - x[j]) / static_cast<double>(L) / draws);
    EXPECT_LE(std::abs(mean[j] - x[j]), 3 * se) << "part " << j;
  }
}

TEST(MultinomialCore, SmallLibraryGivesLatticePoints) {
  RandomStream rng(8, "multinomial-lattice");
  for (int d = 0; d < 1000; ++d) {
    const auto y = multinomial_resample_core(Composition({0.5, 0.3, 0.2}), LibrarySize(10), rng);
    for (double v : y.parts()) {
      EXPECT_NEAR(v * 10, std::round(v * 10), 1e-12);
    }
  }
}

TEST(Sampler, ClosureAndLabels) {
  auto train = toy_train(12, 8, 3, 1);
  // A sparse source exercises the mask resampling loop.
  train[0].x = Composition({0.5, 0.5, 0, 0, 0, 0, 0, 0});
  for (Strategy s : kAllStrategies) {
    if (s == Strategy::AitchisonMixup) continue;
    const auto cfg = AugmentationConfig::with_factor(s, 10, 3);
    const auto out = sample_augmented(train, cfg, 2000);
    ASSERT_EQ(out.size(), 2000u);
    for (const auto& smp : out) {
      double sum = 0.0;
      for (double v : smp.x.parts()) {
        ASSERT_GE(v, 0.0);
        sum += v;
      }
      ASSERT_NEAR(sum, 1.0, 1e-12);
      ASSERT_LT(smp.label, 3u);
      ASSERT_EQ(smp.provenance.synthetic, s);
      ASSERT_DOUBLE_EQ(smp.weight, 0.1);
    }
  }
}

TEST(Sampler, MixupNeedsPositiveParts) {
  auto train = toy_train(4, 3, 1, 2);
  train[1].x = Composition({0.5, 0.5, 0.0});
  const auto cfg = AugmentationConfig::with_factor(Strategy::AitchisonMixup, 10, 0);
  EXPECT_CODA_ERROR(sample_augmented(train, cfg, 200), ErrorCode::ZeroPart);
}

TEST(Sampler, StubLambdaOneCopiesTrainingPoints) {
  const auto train = toy_train(5, 6, 1, 3);
  const auto cfg = AugmentationConfig::with_factor(Strategy::AitchisonMixup, 10, 4);
  const auto out = sample_augmented_with(train, cfg, 100, {}, [](RandomStream&) { return 1.0; });
  for (const auto& smp : out) {
    bool found = false;
    for (const auto& t : train) found = found || same_parts(smp.x, t.x, 1e-12);
    EXPECT_TRUE(found);
  }
}

TEST(Sampler, MixupStaysWithinClass) {
  // Classes live in disjoint regions; any cross-class pair would land between them.
  std::vector<LabeledSample> train;
  for (int i = 0; i < 6; ++i) {
    const double a = 0.05 + 0.01 * i;
    train.push_back({Composition({a, 1 - a}), 0, 1.0, {}});
    train.push_back({Composition({1 - a, a}), 1, 1.0, {}});
  }
  const auto cfg = AugmentationConfig::with_factor(Strategy::AitchisonMixup, 10, 9);
  for (const auto& smp : sample_augmented(train, cfg, 500)) {
    EXPECT_EQ(smp.x[0] < 0.5, smp.label == 0);
  }
}

TEST(Sampler, ClassFrequenciesFollowPrior) {
  std::vector<LabeledSample> train = toy_train(20, 4, 1, 5);
  for (std::size_t i = 15; i < 20; ++i) train[i].label = 1;
  const auto cfg = AugmentationConfig::with_factor(Strategy::CompositionalCutMix, 10, 1);
  const auto out = sample_augmented(train, cfg, 20000);
  double ones = 0;
  for (const auto& s : out) ones += s.label;
  EXPECT_NEAR(ones / 20000, 0.25, 4 * std::sqrt(0.25 * 0.75 / 20000));
}

TEST(Sampler, DeterministicAndThreadIndependent) {
  const auto train = toy_train(30, 10, 2, 6);
  for (Strategy s : kAllStrategies) {
    const auto cfg = AugmentationConfig::with_factor(s, 10, 99);
    const auto a = sample_augmented_with(train, cfg, 300, {}, uniform_lambda, true);
    const auto b = sample_augmented_with(train, cfg, 300, {}, uniform_lambda, false);
    const auto c = sample_augmented(train, cfg, 300);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].x, b[i].x);
      EXPECT_EQ(a[i].x, c[i].x);
      EXPECT_EQ(a[i].label, b[i].label);
    }
    // A prefix of a longer run equals the shorter run.
    const auto longer = sample_augmented(train, cfg, 400);
    for (std::size_t i = 0; i < 300; ++i) EXPECT_EQ(longer[i].x, a[i].x);
  }
}

TEST(Sampler, Errors) {
  const auto cfg = AugmentationConfig::with_factor(Strategy::AitchisonMixup, 10, 0);
  EXPECT_TRUE(sample_augmented({}, cfg, 0).empty());
  EXPECT_CODA_ERROR(sample_augmented({}, cfg, 5), ErrorCode::EmptyTrainingSet);
  auto bad = cfg;
  bad.factor = 0;
  EXPECT_CODA_ERROR(sample_augmented(toy_train(3, 3, 1, 0), bad, 5), ErrorCode::InvalidArgument);
  const auto train = toy_train(3, 3, 1, 0);
  const std::vector<LibrarySize> sizes{LibrarySize(5)};
  EXPECT_CODA_ERROR(sample_augmented(train, cfg, 5, sizes), ErrorCode::DimensionMismatch);
  RandomStream rng(0, "x");
  EXPECT_CODA_ERROR(draw_random_subcomposition(train[0].x, 0.0, rng), ErrorCode::EmptySubcomposition);
}

TEST(Sampler, MultinomialUsesPerSampleLibrarySize) {
  const auto train = toy_train(4, 5, 2, 8);
  const std::vector<LibrarySize> sizes(4, LibrarySize(3));
  const auto cfg = AugmentationConfig::with_factor(Strategy::MultinomialResampling, 10, 2);
  for (const auto& s : sample_augmented(train, cfg, 200, sizes)) {
    for (double v : s.x.parts()) EXPECT_EQ(v * 3, std::round(v * 3));
  }
}

TEST(AugmentDataset, FactorTenWeighting) {
  const auto train = toy_train(7, 4, 2, 10);
  const auto cfg = AugmentationConfig::with_factor(Strategy::AitchisonMixup, 10, 0);
  const auto out = augment_dataset(train, cfg);
  ASSERT_EQ(out.size(), 77u);
  std::vector<double> orig, syn;
  for (std::size_t i = 0; i < out.size(); ++i) {
    EXPECT_EQ(out[i].provenance.is_synthetic(), i >= 7);
    (i < 7 ? orig : syn).push_back(out[i].weight);
  }
  EXPECT_EQ(exact_sum(syn), exact_sum(orig));
  std::vector<double> all;
  for (const auto& s : out) all.push_back(s.weight);
  EXPECT_EQ(exact_sum(all), 14.0);
}

TEST(AugmentDataset, BalancedDoubling) {
  const auto train = toy_train(5, 4, 1, 11);
  auto cfg = AugmentationConfig::with_factor(Strategy::CompositionalCutMix, 1, 0);
  EXPECT_EQ(cfg.synthetic_weight, 1.0);
  const auto out = augment_dataset(train, cfg);
  EXPECT_EQ(out.size(), 10u);
  for (const auto& s : out) EXPECT_EQ(s.weight, 1.0);
}

TEST(Sampler, SupportContainment) {
  // Class 0 lives on parts {0,1,2}, class 1 on parts {3,...,7}.
  std::mt19937_64 gen(12);
  std::vector<LabeledSample> train;
  for (int i = 0; i < 10; ++i) {
    auto v = random_positive(gen, 8);
    const std::size_t label = i % 2;
    for (std::size_t j = 0; j < 8; ++j) {
      if ((j < 3) != (label == 0)) v[j] = 0.0;
    }
    train.push_back({close(v), label, 1.0, {}});
  }
  for (Strategy s : {Strategy::RandomSubcompositions, Strategy::CompositionalCutMix,
                     Strategy::MultinomialResampling}) {
    const auto cfg = AugmentationConfig::with_factor(s, 10, 5);
    for (const auto& smp : sample_augmented(train, cfg, 1000)) {
      for (std::size_t j = 0; j < 8; ++j) {
        if ((j < 3) != (smp.label == 0)) {
          ASSERT_EQ(smp.x[j], 0.0) << strategy_name(s);
        }
      }
    }
  }
}
