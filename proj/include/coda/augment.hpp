#pragma once

// Augmentation strategies for compositional data.
//
// Each strategy has a deterministic core that takes every random quantity as
// an argument, and a sampler that draws those quantities from per-sample
// RandomStreams keyed by (seed, strategy, synthetic index).

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coda/composition.hpp"
#include "coda/preprocess.hpp"
#include "coda/rng.hpp"

namespace coda {

enum class Strategy {
  AitchisonMixup,
  RandomSubcompositions,
  CompositionalCutMix,
  MultinomialResampling,
};

inline constexpr Strategy kAllStrategies[] = {
    Strategy::AitchisonMixup, Strategy::RandomSubcompositions,
    Strategy::CompositionalCutMix, Strategy::MultinomialResampling};

// Stable identifiers used in files and on the command line:
// aitchison_mixup, random_subcompositions, compositional_cutmix,
// multinomial_resampling.
std::string_view strategy_name(Strategy s) noexcept;
std::optional<Strategy> parse_strategy(std::string_view name) noexcept;

// Per-part inclusion indicators.
using MaskVector = std::vector<bool>;

struct Provenance {
  std::optional<Strategy> synthetic;  // empty for original samples

  bool is_synthetic() const noexcept { return synthetic.has_value(); }
  // "original" or "synthetic:<strategy>"
  std::string tag() const;
  static std::optional<Provenance> parse(std::string_view tag);
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct LabeledSample {
  Composition x;
  std::size_t label = 0;  // index into the dataset's class catalogue
  double weight = 1.0;
  Provenance provenance;
};

struct AugmentationConfig {
  Strategy strategy = Strategy::AitchisonMixup;
  std::size_t factor = 10;
  double synthetic_weight = 0.1;
  std::uint64_t seed = 0;
  std::uint64_t default_library_size = kDefaultLibrarySize;

  // Throws InvalidArgument unless factor >= 1 and synthetic_weight > 0.
  void validate() const;
  // Default weighting: each synthetic sample weighs 1/factor.
  static AugmentationConfig with_factor(Strategy strategy, std::size_t factor,
                                        std::uint64_t seed);
};

// --- deterministic cores ---------------------------------------------------

// (lambda (.) x1) (+) ((1 - lambda) (.) x2)
Composition aitchison_mixup_core(const Composition& x1, const Composition& x2, double lambda);

// Zeroes the parts whose flag is false and re-closes the survivors.
Composition random_subcomposition_core(const Composition& x, const MaskVector& mask);

// Takes x2_j where the flag is set, x1_j otherwise, then re-closes.
Composition compositional_cutmix_core(const Composition& x1, const Composition& x2,
                                      const MaskVector& mask);

// k ~ Multinomial(L, x) drawn as sequential conditional binomials; returns k/L.
Composition multinomial_resample_core(const Composition& x, LibrarySize trials,
                                      RandomStream& rng);

MaskVector draw_mask(std::size_t p, double lambda, RandomStream& rng);

// Random subcomposition of x under a given lambda; the mask is redrawn until
// a positive part survives. Errors: EmptySubcomposition if lambda <= 0.
Composition draw_random_subcomposition(const Composition& x, double lambda, RandomStream& rng);

// One Mixup or CutMix combination of (x1, x2) under a given lambda.
Composition draw_pair_combination(Strategy strategy, const Composition& x1,
                                  const Composition& x2, double lambda, RandomStream& rng);

// --- samplers ----------------------------------------------------------------

// Source of the mixing coefficient; the samplers use lambda ~ U(0,1).
// Tests substitute a constant to pin endpoints.
using LambdaSource = std::function<double(RandomStream&)>;
double uniform_lambda(RandomStream& rng);

// Draws `count` synthetic samples. `library_sizes`, when non-empty, is aligned
// with `train` and sets the multinomial trial count per source sample;
// otherwise cfg.default_library_size is used.
// Errors: EmptyTrainingSet, plus the core errors (ZeroPart for Mixup on
// compositions that were not zero-replaced).
std::vector<LabeledSample> sample_augmented(std::span<const LabeledSample> train,
                                            const AugmentationConfig& cfg, std::size_t count,
                                            std::span<const LibrarySize> library_sizes = {});

// Same contract with an explicit lambda source and a choice of loop. The
// serial loop is the reference for the OpenMP one; both produce identical
// output.
std::vector<LabeledSample> sample_augmented_with(std::span<const LabeledSample> train,
                                                 const AugmentationConfig& cfg,
                                                 std::size_t count,
                                                 std::span<const LibrarySize> library_sizes,
                                                 const LambdaSource& lambda_source,
                                                 bool parallel = true);

// Originals (weight 1) followed by factor * n synthetic samples.
std::vector<LabeledSample> augment_dataset(std::span<const LabeledSample> train,
                                           const AugmentationConfig& cfg,
                                           std::span<const LibrarySize> library_sizes = {});

}  // namespace coda
