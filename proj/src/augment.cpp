#include "coda/augment.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <string>

#include "coda/error.hpp"

namespace coda {
namespace {

void require_same_size(const Composition& a, const Composition& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
}

void require_mask_size(const Composition& x, const MaskVector& mask) {
  if (mask.size() != x.size()) {
    throw Error(ErrorCode::DimensionMismatch, "mask length " + std::to_string(mask.size()) +
                                                  " vs " + std::to_string(x.size()) + " parts");
  }
}

Composition close_selected(std::vector<double> picked) {
  double sum = 0.0;
  for (double v : picked) sum += v;
  if (sum == 0.0) throw Error(ErrorCode::EmptySubcomposition, "no surviving positive part");
  return close(picked);
}

// Training examples grouped by label, in label order.
struct ClassIndex {
  std::vector<std::size_t> labels;
  std::vector<double> counts;
  std::vector<std::vector<std::size_t>> members;

  explicit ClassIndex(std::span<const LabeledSample> train) {
    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < train.size(); ++i) groups[train[i].label].push_back(i);
    for (auto& [label, idx] : groups) {
      labels.push_back(label);
      counts.push_back(static_cast<double>(idx.size()));
      members.push_back(std::move(idx));
    }
  }
};

LabeledSample draw_one(std::span<const LabeledSample> train, const ClassIndex& classes,
                       const AugmentationConfig& cfg,
                       std::span<const LibrarySize> library_sizes,
                       const LambdaSource& lambda_source, std::size_t index) {
  RandomStream rng(cfg.seed, strategy_name(cfg.strategy), index);
  const Provenance provenance{cfg.strategy};
  switch (cfg.strategy) {
    case Strategy::AitchisonMixup:
    case Strategy::CompositionalCutMix: {
      const std::size_t c = rng.categorical(classes.counts);
      const double lambda = lambda_source(rng);
      const auto& members = classes.members[c];
      const auto& x1 = train[members[rng.below(members.size())]].x;
      const auto& x2 = train[members[rng.below(members.size())]].x;
      Composition aug = draw_pair_combination(cfg.strategy, x1, x2, lambda, rng);
      return {std::move(aug), classes.labels[c], cfg.synthetic_weight, provenance};
    }
    case Strategy::RandomSubcompositions: {
      const double lambda = lambda_source(rng);
      const auto& src = train[rng.below(train.size())];
      return {draw_random_subcomposition(src.x, lambda, rng), src.label, cfg.synthetic_weight,
              provenance};
    }
    case Strategy::MultinomialResampling: {
      const std::size_t i = rng.below(train.size());
      const LibrarySize trials = library_sizes.empty() ? LibrarySize(cfg.default_library_size)
                                                       : library_sizes[i];
      return {multinomial_resample_core(train[i].x, trials, rng), train[i].label,
              cfg.synthetic_weight, provenance};
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown strategy");
}

}  // namespace

std::string_view strategy_name(Strategy s) noexcept {
  switch (s) {
    case Strategy::AitchisonMixup: return "aitchison_mixup";
    case Strategy::RandomSubcompositions: return "random_subcompositions";
    case Strategy::CompositionalCutMix: return "compositional_cutmix";
    case Strategy::MultinomialResampling: return "multinomial_resampling";
  }
  return "unknown";
}

std::optional<Strategy> parse_strategy(std::string_view name) noexcept {
  for (Strategy s : kAllStrategies) {
    if (strategy_name(s) == name) return s;
  }
  if (name == "mixup") return Strategy::AitchisonMixup;
  if (name == "subcomposition" || name == "subcompositions") return Strategy::RandomSubcompositions;
  if (name == "cutmix") return Strategy::CompositionalCutMix;
  if (name == "multinomial") return Strategy::MultinomialResampling;
  return std::nullopt;
}

std::string Provenance::tag() const {
  if (!synthetic) return "original";
  return "synthetic:" + std::string(strategy_name(*synthetic));
}

std::optional<Provenance> Provenance::parse(std::string_view tag) {
  if (tag == "original") return Provenance{};
  constexpr std::string_view prefix = "synthetic:";
  if (tag.substr(0, prefix.size()) != prefix) return std::nullopt;
  auto s = parse_strategy(tag.substr(prefix.size()));
  if (!s) return std::nullopt;
  return Provenance{*s};
}

void AugmentationConfig::validate() const {
  if (factor < 1) throw Error(ErrorCode::InvalidArgument, "factor must be >= 1");
  if (!(synthetic_weight > 0.0) || !std::isfinite(synthetic_weight)) {
    throw Error(ErrorCode::InvalidArgument, "synthetic weight must be > 0");
  }
  if (default_library_size < 1) {
    throw Error(ErrorCode::InvalidArgument, "library size must be >= 1");
  }
}

AugmentationConfig AugmentationConfig::with_factor(Strategy strategy, std::size_t factor,
                                                   std::uint64_t seed) {
  AugmentationConfig cfg;
  cfg.strategy = strategy;
  cfg.factor = factor;
  cfg.synthetic_weight = factor > 0 ? 1.0 / static_cast<double>(factor) : 0.0;
  cfg.seed = seed;
  return cfg;
}

Composition aitchison_mixup_core(const Composition& x1, const Composition& x2, double lambda) {
  require_same_size(x1, x2);
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw Error(ErrorCode::LambdaOutOfRange, std::to_string(lambda));
  }
  return perturb(power(lambda, x1), power(1.0 - lambda, x2));
}

Composition random_subcomposition_core(const Composition& x, const MaskVector& mask) {
  require_mask_size(x, mask);
  std::vector<double> kept(x.size(), 0.0);
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (mask[j]) kept[j] = x[j];
  }
  return close_selected(std::move(kept));
}

Composition compositional_cutmix_core(const Composition& x1, const Composition& x2,
                                      const MaskVector& mask) {
  require_same_size(x1, x2);
  require_mask_size(x1, mask);
  std::vector<double> picked(x1.size());
  for (std::size_t j = 0; j < x1.size(); ++j) picked[j] = mask[j] ? x2[j] : x1[j];
  return close_selected(std::move(picked));
}

Composition multinomial_resample_core(const Composition& x, LibrarySize trials,
                                      RandomStream& rng) {
  const std::uint64_t total = trials.value();
  std::size_t last = x.size() - 1;
  while (last > 0 && x[last] == 0.0) --last;
  std::uint64_t remaining = total;
  double mass_left = 1.0;
  std::vector<double> counts(x.size(), 0.0);
  for (std::size_t j = 0; j <= last && remaining > 0; ++j) {
    // Rounding in mass_left can push the ratio a hair past 1.
    const double q = mass_left > 0.0 ? std::min(1.0, x[j] / mass_left) : 1.0;
    const std::uint64_t k = j == last ? remaining : rng.binomial(remaining, q);
    counts[j] = static_cast<double>(k);
    remaining -= k;
    mass_left -= x[j];
  }
  const double scale = static_cast<double>(total);
  for (double& c : counts) c /= scale;
  return close(counts);
}

MaskVector draw_mask(std::size_t p, double lambda, RandomStream& rng) {
  MaskVector mask(p);
  for (std::size_t j = 0; j < p; ++j) mask[j] = rng.bernoulli(lambda);
  return mask;
}

double uniform_lambda(RandomStream& rng) { return rng.uniform(); }

Composition draw_random_subcomposition(const Composition& x, double lambda, RandomStream& rng) {
  if (!(lambda > 0.0)) {
    throw Error(ErrorCode::EmptySubcomposition, "lambda = 0 drops every part");
  }
  for (;;) {
    MaskVector mask = draw_mask(x.size(), lambda, rng);
    for (std::size_t j = 0; j < mask.size(); ++j) {
      if (mask[j] && x[j] > 0.0) return random_subcomposition_core(x, mask);
    }
  }
}

Composition draw_pair_combination(Strategy strategy, const Composition& x1,
                                  const Composition& x2, double lambda, RandomStream& rng) {
  switch (strategy) {
    case Strategy::AitchisonMixup:
      return aitchison_mixup_core(x1, x2, lambda);
    case Strategy::CompositionalCutMix:
      return compositional_cutmix_core(x1, x2, draw_mask(x1.size(), lambda, rng));
    default:
      throw Error(ErrorCode::InvalidArgument,
                  std::string(strategy_name(strategy)) + " does not combine pairs");
  }
}

std::vector<LabeledSample> sample_augmented_with(std::span<const LabeledSample> train,
                                                 const AugmentationConfig& cfg,
                                                 std::size_t count,
                                                 std::span<const LibrarySize> library_sizes,
                                                 const LambdaSource& lambda_source,
                                                 bool parallel) {
  cfg.validate();
  if (count == 0) return {};
  if (train.empty()) throw Error(ErrorCode::EmptyTrainingSet, "no training samples");
  if (!library_sizes.empty() && library_sizes.size() != train.size()) {
    throw Error(ErrorCode::DimensionMismatch, "library sizes not aligned with training set");
  }
  const ClassIndex classes(train);

  std::vector<std::optional<LabeledSample>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  const auto n = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(static) if (parallel)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      slots[k].emplace(draw_one(train, classes, cfg, library_sizes, lambda_source, k));
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  // Report the lowest failing index so the error is independent of scheduling.
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<LabeledSample> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

std::vector<LabeledSample> sample_augmented(std::span<const LabeledSample> train,
                                            const AugmentationConfig& cfg, std::size_t count,
                                            std::span<const LibrarySize> library_sizes) {
  return sample_augmented_with(train, cfg, count, library_sizes, uniform_lambda, true);
}

std::vector<LabeledSample> augment_dataset(std::span<const LabeledSample> train,
                                           const AugmentationConfig& cfg,
                                           std::span<const LibrarySize> library_sizes) {
  cfg.validate();
  if (train.empty()) throw Error(ErrorCode::EmptyTrainingSet, "no training samples");
  std::vector<LabeledSample> out(train.begin(), train.end());
  for (auto& s : out) s.provenance = Provenance{};
  auto synthetic = sample_augmented(train, cfg, cfg.factor * train.size(), library_sizes);
  out.insert(out.end(), std::make_move_iterator(synthetic.begin()),
             std::make_move_iterator(synthetic.end()));
  return out;
}

}  // namespace coda
