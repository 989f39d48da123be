#include "coda/synth.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <sstream>

#include "coda/error.hpp"
#include "coda/metrics.hpp"

namespace coda {
namespace {

struct ArmResult {
  double auc = 0.0;
  double ece = 0.0;
};

ArmResult fit_and_score(const Matrix& x_train, const std::vector<int>& y_train,
                        const std::vector<double>& w_train, const Matrix& x_test,
                        const std::vector<int>& y_test, const LogRegConfig& model_cfg) {
  const LogisticModel model = train_weighted_logreg(x_train, y_train, w_train, model_cfg);
  const auto logits = model.logits(x_test);
  const auto probs = model.probabilities(x_test);
  return {roc_auc(logits, y_test), expected_calibration_error(probs, y_test).ece};
}

Matrix stack_rows(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows + b.rows, a.cols);
  std::copy(a.data.begin(), a.data.end(), out.data.begin());
  std::copy(b.data.begin(), b.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(a.data.size()));
  return out;
}

std::vector<int> labels_of(const Dataset& ds) {
  std::vector<int> y;
  for (const auto& s : ds.samples) y.push_back(static_cast<int>(s.label));
  return y;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

}  // namespace

std::vector<double> random_clr_direction(std::size_t p, std::uint64_t seed) {
  if (p < 2) throw Error(ErrorCode::DimensionTooSmall, "direction needs p >= 2");
  RandomStream rng(seed, "synth/direction");
  for (;;) {
    std::vector<double> u(p);
    double mean = 0.0;
    for (double& v : u) {
      v = rng.normal();
      mean += v;
    }
    mean /= static_cast<double>(p);
    double sq = 0.0;
    for (double& v : u) {
      v -= mean;
      sq += v * v;
    }
    if (sq > 1e-12) {
      const double n = std::sqrt(sq);
      for (double& v : u) v /= n;
      return u;
    }
  }
}

Dataset logistic_normal_dataset(std::size_t n, std::span<const double> direction, double delta,
                                RandomStream& rng) {
  const std::size_t p = direction.size();
  Dataset ds;
  for (std::size_t j = 0; j < p; ++j) ds.feature_names.push_back("f" + std::to_string(j));
  ds.class_names = {"0", "1"};
  ds.samples.reserve(n);
  std::vector<double> z(p);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t label = i % 2;
    const double sign = label == 1 ? 1.0 : -1.0;
    for (std::size_t j = 0; j < p; ++j) z[j] = sign * 0.5 * delta * direction[j] + rng.normal();
    ds.samples.push_back({clr_inv(z), label, 1.0, {}});
  }
  return ds;
}

void BenchConfig::validate() const {
  if (n_train.empty()) throw Error(ErrorCode::InvalidArgument, "n_train must list at least one size");
  for (auto n : n_train) {
    if (n < 4) throw Error(ErrorCode::InvalidArgument, "n_train must be >= 4");
  }
  if (n_test < 2) throw Error(ErrorCode::InvalidArgument, "n_test must be >= 2");
  if (p < 2) throw Error(ErrorCode::InvalidArgument, "p must be >= 2");
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw Error(ErrorCode::InvalidArgument, "delta must be >= 0");
  if (replicates < 1) throw Error(ErrorCode::InvalidArgument, "replicates must be >= 1");
  if (factor < 1) throw Error(ErrorCode::InvalidArgument, "factor must be >= 1");
  if (synthetic_weight && !(*synthetic_weight > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "synthetic weight must be > 0");
  }
  if (library_size < 1) throw Error(ErrorCode::InvalidArgument, "library size must be >= 1");
}

std::pair<double, std::optional<double>> mean_and_std_error(std::span<const double> values) {
  if (values.empty()) return {0.0, std::nullopt};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (values.size() < 2) return {mean, std::nullopt};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return {mean, sd / std::sqrt(static_cast<double>(values.size()))};
}

BenchReport synth_benchmark(const BenchConfig& cfg) {
  cfg.validate();
  const auto direction = random_clr_direction(cfg.p, cfg.seed);
  const LibrarySize pseudo(cfg.library_size);
  const std::size_t n_strat = cfg.strategies.size();

  BenchReport report{cfg, {}};
  for (std::size_t size_index = 0; size_index < cfg.n_train.size(); ++size_index) {
    const std::size_t n_train = cfg.n_train[size_index];
    // results[r][0] is the baseline, results[r][1 + s] strategy s.
    std::vector<std::vector<ArmResult>> results(cfg.replicates, std::vector<ArmResult>(n_strat + 1));
    std::vector<std::exception_ptr> errors(cfg.replicates);
    const auto reps = static_cast<std::int64_t>(cfg.replicates);

#pragma omp parallel for schedule(dynamic)
    for (std::int64_t ri = 0; ri < reps; ++ri) {
      const auto r = static_cast<std::size_t>(ri);
      try {
        RandomStream train_rng(cfg.seed, "bench/train", n_train, r);
        RandomStream test_rng(cfg.seed, "bench/test", n_train, r);
        const Dataset train = logistic_normal_dataset(n_train, direction, cfg.delta, train_rng);
        const Dataset test = logistic_normal_dataset(cfg.n_test, direction, cfg.delta, test_rng);
        const Matrix x_train = clr_features(train.samples, pseudo);
        const Matrix x_test = clr_features(test.samples, pseudo);
        const auto y_train = labels_of(train);
        const auto y_test = labels_of(test);
        const std::vector<double> w_train(train.size(), 1.0);
        results[r][0] = fit_and_score(x_train, y_train, w_train, x_test, y_test, cfg.model);

        // Augmentation draws from zero-replaced originals.
        std::vector<LabeledSample> positive = train.samples;
        for (auto& s : positive) s.x = zero_replace(s.x, pseudo);
        for (std::size_t s = 0; s < n_strat; ++s) {
          AugmentationConfig aug = AugmentationConfig::with_factor(
              cfg.strategies[s], cfg.factor, derive_stream_key(cfg.seed, "bench/augment", n_train, r));
          if (cfg.synthetic_weight) aug.synthetic_weight = *cfg.synthetic_weight;
          aug.default_library_size = cfg.library_size;
          const auto synthetic =
              sample_augmented_with(positive, aug, cfg.factor * n_train, {}, uniform_lambda, false);
          const Matrix x_all = stack_rows(x_train, clr_features(synthetic, pseudo));
          auto y_all = y_train;
          auto w_all = w_train;
          for (const auto& smp : synthetic) {
            y_all.push_back(static_cast<int>(smp.label));
            w_all.push_back(smp.weight);
          }
          results[r][1 + s] = fit_and_score(x_all, y_all, w_all, x_test, y_test, cfg.model);
        }
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }

    auto summarize = [&](std::size_t arm) {
      std::vector<double> auc, ece;
      for (const auto& rr : results) {
        auc.push_back(rr[arm].auc);
        ece.push_back(rr[arm].ece);
      }
      ArmSummary out;
      std::tie(out.mean_auc, out.auc_std_error) = mean_and_std_error(auc);
      out.mean_ece = mean_and_std_error(ece).first;
      return out;
    };
    const ArmSummary baseline = summarize(0);
    for (std::size_t s = 0; s < n_strat; ++s) {
      BenchRow row;
      row.n_train = n_train;
      row.strategy = cfg.strategies[s];
      row.baseline = baseline;
      row.augmented = summarize(1 + s);
      std::vector<double> gains;
      for (const auto& rr : results) gains.push_back(rr[1 + s].auc - rr[0].auc);
      std::tie(row.mean_gain, row.gain_std_error) = mean_and_std_error(gains);
      report.rows.push_back(row);
    }
  }
  return report;
}

std::string format_report(const BenchReport& report) {
  std::ostringstream out;
  out << "task,n_train,p,delta,strategy,arm,replicates,mean_auc,std_error,mean_ece,mean_gain,"
         "gain_std_error\n";
  const auto& cfg = report.config;
  for (const auto& row : report.rows) {
    const std::string prefix = "synthetic," + std::to_string(row.n_train) + "," +
                               std::to_string(cfg.p) + "," + fmt(cfg.delta) + "," +
                               std::string(strategy_name(row.strategy)) + ",";
    out << prefix << "baseline," << cfg.replicates << "," << fmt(row.baseline.mean_auc) << ","
        << fmt(row.baseline.auc_std_error) << "," << fmt(row.baseline.mean_ece) << ",,\n";
    out << prefix << "augmented," << cfg.replicates << "," << fmt(row.augmented.mean_auc) << ","
        << fmt(row.augmented.auc_std_error) << "," << fmt(row.augmented.mean_ece) << ","
        << fmt(row.mean_gain) << "," << fmt(row.gain_std_error) << "\n";
  }
  return out.str();
}

}  // namespace coda
