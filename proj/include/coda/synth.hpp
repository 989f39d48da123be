#pragma once

// Logistic-normal two-class data and the augmentation benchmark built on it.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coda/augment.hpp"
#include "coda/dataset.hpp"
#include "coda/logreg.hpp"

namespace coda {

// Random unit vector in the zero-sum (clr) hyperplane of R^p.
std::vector<double> random_clr_direction(std::size_t p, std::uint64_t seed);

// n samples, labels alternating 0/1 (classes named "0" and "1"). Class c
// has clr mean (c ? +1 : -1) * (delta / 2) * direction plus N(0, I) noise,
// mapped to the simplex with clr_inv. Feature names are f0..f{p-1}.
Dataset logistic_normal_dataset(std::size_t n, std::span<const double> direction, double delta,
                                RandomStream& rng);

struct BenchConfig {
  std::vector<std::size_t> n_train{60};
  std::size_t n_test = 500;
  std::size_t p = 100;
  // Gives a baseline test AUC near 0.75 at n_train 60, p 100 (Monte-Carlo
  // sweep; see configs/bench_default.json).
  double delta = 1.8;
  std::size_t replicates = 20;
  std::uint64_t seed = 0;
  std::vector<Strategy> strategies{std::begin(kAllStrategies), std::end(kAllStrategies)};
  std::size_t factor = 10;
  std::optional<double> synthetic_weight;  // defaults to 1 / factor
  LogRegConfig model;
  std::uint64_t library_size = kDefaultLibrarySize;

  void validate() const;
};

struct ArmSummary {
  double mean_auc = 0.0;
  std::optional<double> auc_std_error;  // empty with a single replicate
  double mean_ece = 0.0;
};

struct BenchRow {
  std::size_t n_train = 0;
  Strategy strategy = Strategy::AitchisonMixup;
  ArmSummary baseline;
  ArmSummary augmented;
  double mean_gain = 0.0;  // paired augmented - baseline AUC
  std::optional<double> gain_std_error;
};

struct BenchReport {
  BenchConfig config;
  std::vector<BenchRow> rows;  // one per (n_train, strategy)
};

// Per replicate r: fresh train (n_train) and test (n_test) draws from the
// same logistic-normal model, a baseline fit on the originals and one fit per
// strategy on originals + factor * n_train synthetic samples. Replicates run
// in parallel with their own streams; the report does not depend on the
// thread count.
BenchReport synth_benchmark(const BenchConfig& cfg);

// Mean, and standard error (sample sd / sqrt(n)) when n > 1.
std::pair<double, std::optional<double>> mean_and_std_error(std::span<const double> values);

// CSV with header
// task,n_train,p,delta,strategy,arm,replicates,mean_auc,std_error,mean_ece,mean_gain,gain_std_error
// and two rows (arm = baseline | augmented) per BenchRow.
std::string format_report(const BenchReport& report);

}  // namespace coda
