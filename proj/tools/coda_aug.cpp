// coda-aug: command-line front end for augmentation, contrastive pretraining,
// evaluation and the synthetic benchmark.
//
// Exit codes: 0 ok, 2 usage, 3 data, 4 checkpoint format.

#include <omp.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "coda/augment.hpp"
#include "coda/contrastive.hpp"
#include "coda/dataset.hpp"
#include "coda/error.hpp"
#include "coda/io.hpp"
#include "coda/synth.hpp"

namespace {

using coda::Error;
using coda::ErrorCode;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitFormat = 4;

// Flag problems found after parsing; reported like CLI11 parse errors.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

char parse_delimiter(const std::string& text) {
  if (text == "\\t" || text == "tab") return '\t';
  if (text.size() != 1) throw UsageError("--delimiter must be a single character");
  return text[0];
}

coda::Strategy parse_strategy_flag(const std::string& text) {
  auto s = coda::parse_strategy(text);
  if (!s) throw UsageError("unknown strategy '" + text + "'");
  return *s;
}

coda::InputTransform parse_transform_flag(const std::string& text) {
  if (text == "clr") return coda::InputTransform::Clr;
  if (text == "raw") return coda::InputTransform::Raw;
  throw UsageError("--input-transform must be clr or raw");
}

struct DataFlags {
  std::string label_col = "label";
  std::string id_col;
  std::string delimiter = ",";
  std::uint64_t library_size = coda::kDefaultLibrarySize;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--label-col", label_col, "Name of the label column")->capture_default_str();
    cmd->add_option("--id-col", id_col, "Optional row-identifier column");
    cmd->add_option("--delimiter", delimiter, "Field delimiter (\\t for tab)")->capture_default_str();
    cmd->add_option("--library-size", library_size,
                    "Library size for rows that are not counts")
        ->capture_default_str();
  }

  coda::CsvOptions csv() const {
    coda::CsvOptions o;
    o.label_column = label_col;
    if (!id_col.empty()) o.id_column = id_col;
    o.delimiter = parse_delimiter(delimiter);
    if (library_size < 1) throw UsageError("--library-size must be >= 1");
    o.default_library_size = library_size;
    return o;
  }
};

// Relabels `test` onto the class catalogue of `train`.
void align_classes(const coda::Dataset& train, coda::Dataset& test) {
  std::map<std::string, std::size_t> index;
  for (std::size_t c = 0; c < train.class_names.size(); ++c) index[train.class_names[c]] = c;
  for (auto& s : test.samples) {
    const auto& name = test.class_names[s.label];
    auto it = index.find(name);
    if (it == index.end()) {
      throw Error(ErrorCode::InvalidArgument, "test class '" + name + "' is absent from training data");
    }
    s.label = it->second;
  }
  test.class_names = train.class_names;
  if (test.num_features() != train.num_features()) {
    throw Error(ErrorCode::DimensionMismatch, "train and test have different feature counts");
  }
}

// --- augment -----------------------------------------------------------------

struct AugmentArgs {
  std::string input;
  std::string output;
  std::string strategy = "aitchison_mixup";
  std::size_t factor = 10;
  std::optional<double> weight;
  DataFlags data;
};

int run_augment(const AugmentArgs& a, std::uint64_t seed) {
  const auto strategy = parse_strategy_flag(a.strategy);
  if (a.factor < 1) throw UsageError("--factor must be >= 1");
  if (a.weight && !(*a.weight > 0.0)) throw UsageError("--weight must be > 0");
  const auto csv = a.data.csv();

  coda::Dataset ds = coda::load_csv(a.input, csv);
  const coda::LibrarySize fallback(csv.default_library_size);
  std::vector<coda::LibrarySize> sizes;
  for (std::size_t i = 0; i < ds.size(); ++i) sizes.push_back(ds.library_size(i, fallback));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    ds.samples[i].x = coda::zero_replace(ds.samples[i].x, sizes[i]);
  }

  auto cfg = coda::AugmentationConfig::with_factor(strategy, a.factor, seed);
  if (a.weight) cfg.synthetic_weight = *a.weight;
  cfg.default_library_size = csv.default_library_size;

  coda::Dataset out;
  out.feature_names = ds.feature_names;
  out.class_names = ds.class_names;
  out.samples = coda::augment_dataset(ds.samples, cfg, sizes);
  if (!ds.ids.empty()) {
    out.ids = ds.ids;
    for (std::size_t k = ds.size(); k < out.size(); ++k) {
      out.ids.push_back("synthetic-" + std::to_string(k - ds.size()));
    }
  }
  coda::write_csv(out, a.output, csv.delimiter);

  std::vector<std::size_t> counts(ds.class_names.size(), 0);
  for (const auto& s : ds.samples) ++counts[s.label];
  std::cout << "n=" << ds.size() << " p=" << ds.num_features() << '\n';
  for (std::size_t c = 0; c < counts.size(); ++c) {
    std::cout << "class " << ds.class_names[c] << '=' << counts[c] << '\n';
  }
  std::cout << "synthetic=" << out.size() - ds.size() << " strategy=" << coda::strategy_name(strategy)
            << " weight=" << format_value(cfg.synthetic_weight) << '\n';
  return kExitOk;
}

// --- pretrain ------------------------------------------------------------------

struct PretrainArgs {
  std::string train;
  std::string output;
  std::size_t epochs = 2000;
  double temperature = 0.5;
  double lr = 1e-3;
  std::string strategy = "random_subcompositions";
  std::string transform = "clr";
  DataFlags data;
};

int run_pretrain(const PretrainArgs& a, std::uint64_t seed) {
  coda::ContrastiveConfig cfg;
  cfg.epochs = a.epochs;
  cfg.temperature = a.temperature;
  cfg.adam.learning_rate = a.lr;
  cfg.seed = seed;
  cfg.view_strategy = parse_strategy_flag(a.strategy);
  cfg.input = parse_transform_flag(a.transform);
  cfg.input_library_size = a.data.library_size;
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  const auto train = coda::load_csv(a.train, a.data.csv());
  const auto result = coda::pretrain(train, cfg);
  coda::save_checkpoint({result.state, cfg}, a.output);
  std::cout << "epochs=" << cfg.epochs << '\n';
  if (!result.loss_trace.empty()) {
    std::cout << "final_loss=" << format_value(result.loss_trace.back()) << '\n';
  }
  return kExitOk;
}

// --- linear-eval / finetune ----------------------------------------------------

struct EvalArgs {
  std::string checkpoint;
  bool random_init = false;
  std::string train;
  std::string test;
  std::size_t head_epochs = 2000;
  double head_lr = 1e-3;
  std::string transform = "clr";
  std::string save;  // finetune only
  DataFlags data;
};

int run_eval(const EvalArgs& a, std::uint64_t seed, bool finetune) {
  if (a.checkpoint.empty() == !a.random_init) {
    throw UsageError("give exactly one of --checkpoint or --random-init");
  }
  if (!(a.head_lr > 0.0)) throw UsageError("--head-lr must be > 0");
  const auto transform = parse_transform_flag(a.transform);
  const auto csv = a.data.csv();
  coda::HeadConfig head;
  head.epochs = a.head_epochs;
  head.adam.learning_rate = a.head_lr;
  head.seed = seed;

  std::optional<coda::Checkpoint> ckpt;
  if (!a.checkpoint.empty()) ckpt = coda::load_checkpoint(a.checkpoint);
  const auto train = coda::load_csv(a.train, csv);
  auto test = coda::load_csv(a.test, csv);
  align_classes(train, test);

  coda::EncoderState state;
  if (ckpt) {
    state = ckpt->state;
    if (state.shape.input != train.num_features()) {
      throw Error(ErrorCode::DimensionMismatch,
                  "checkpoint expects " + std::to_string(state.shape.input) + " features, data has " +
                      std::to_string(train.num_features()));
    }
  } else {
    state = coda::init_encoder(coda::NetworkShape::standard(train.num_features()), seed, transform);
    state.input_library_size = csv.default_library_size;
  }

  double auc = 0.0;
  if (finetune) {
    const auto result = coda::finetune(state, train, test, head);
    if (!a.save.empty()) {
      coda::ContrastiveConfig cfg = ckpt ? ckpt->config : coda::ContrastiveConfig{};
      if (!ckpt) {
        cfg.epochs = 0;
        cfg.seed = seed;
        cfg.input = state.input;
        cfg.input_library_size = state.input_library_size;
      }
      coda::save_checkpoint({result.state, cfg}, a.save);
    }
    auc = result.eval.auc;
  } else {
    auc = coda::linear_eval(state, train, test, head).auc;
  }
  std::cout << "auc=" << format_value(auc) << '\n';
  return kExitOk;
}

// --- bench -----------------------------------------------------------------------

template <typename T>
void read_key(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

coda::BenchConfig parse_bench_config(const std::string& path) {
  coda::BenchConfig cfg;
  if (path.empty()) return cfg;
  std::ifstream f(path);
  if (!f) throw UsageError("cannot read config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(f);
    static const std::vector<std::string> known = {
        "n_train", "n_test", "p", "delta", "replicates", "seed", "strategies",
        "factor", "weight", "l2", "epochs", "library_size"};
    if (!j.is_object()) throw UsageError("config must be a JSON object");
    for (const auto& [key, _] : j.items()) {
      if (std::find(known.begin(), known.end(), key) == known.end()) {
        throw UsageError("unknown config key '" + key + "'");
      }
    }
    if (j.contains("n_train")) {
      const auto& n = j.at("n_train");
      cfg.n_train = n.is_array() ? n.get<std::vector<std::size_t>>()
                                 : std::vector<std::size_t>{n.get<std::size_t>()};
    }
    read_key(j, "n_test", cfg.n_test);
    read_key(j, "p", cfg.p);
    read_key(j, "delta", cfg.delta);
    read_key(j, "replicates", cfg.replicates);
    read_key(j, "seed", cfg.seed);
    read_key(j, "factor", cfg.factor);
    read_key(j, "l2", cfg.model.l2);
    read_key(j, "epochs", cfg.model.epochs);
    read_key(j, "library_size", cfg.library_size);
    if (j.contains("weight")) cfg.synthetic_weight = j.at("weight").get<double>();
    if (j.contains("strategies")) {
      cfg.strategies.clear();
      for (const auto& s : j.at("strategies").get<std::vector<std::string>>()) {
        cfg.strategies.push_back(parse_strategy_flag(s));
      }
      if (cfg.strategies.empty()) throw UsageError("strategies must not be empty");
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("bad config " + path + ": " + e.what());
  }
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

int run_bench(const std::string& config, const std::string& output,
              std::optional<std::uint64_t> seed) {
  auto cfg = parse_bench_config(config);
  if (seed) cfg.seed = *seed;
  const std::string report = coda::format_report(coda::synth_benchmark(cfg));
  if (output.empty()) {
    std::cout << report;
  } else {
    coda::write_file_atomic(output, report);
  }
  return kExitOk;
}

// --- synth -------------------------------------------------------------------------

struct SynthArgs {
  std::size_t n = 60;
  std::size_t p = 100;
  double delta = 1.0;
  std::string output;
  std::size_t n_test = 0;
  std::string test_output;
};

int run_synth(const SynthArgs& a, std::uint64_t seed) {
  if (a.n < 2) throw UsageError("--n must be >= 2");
  if (a.p < 2) throw UsageError("--p must be >= 2");
  if (!(a.delta >= 0.0)) throw UsageError("--delta must be >= 0");
  const auto direction = coda::random_clr_direction(a.p, seed);
  if (a.test_output.empty() != (a.n_test == 0)) {
    throw UsageError("--n-test and --test-output go together");
  }
  // Train and test share the class direction; only the noise streams differ.
  coda::RandomStream rng(seed, "synth/cli", 0);
  const auto ds = coda::logistic_normal_dataset(a.n, direction, a.delta, rng);
  coda::write_csv(ds, a.output);
  std::cout << "n=" << ds.size() << " p=" << ds.num_features() << '\n';
  if (!a.test_output.empty()) {
    coda::RandomStream test_rng(seed, "synth/cli", 1);
    const auto test = coda::logistic_normal_dataset(a.n_test, direction, a.delta, test_rng);
    coda::write_csv(test, a.test_output);
    std::cout << "n_test=" << test.size() << '\n';
  }
  return kExitOk;
}

int exit_code_for(const Error& e) {
  return e.code() == ErrorCode::CheckpointFormat ? kExitFormat : kExitData;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compositional data augmentation toolkit", "coda-aug"};
  app.set_version_flag("--version", std::string(CODA_VERSION));
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  std::optional<std::uint64_t> seed;
  int threads = 0;
  app.add_option("--seed", seed, "Random seed (default 0)");
  app.add_option("--threads", threads, "Worker threads (default: OpenMP runtime choice)")
      ->check(CLI::NonNegativeNumber);

  AugmentArgs aug;
  auto* augment = app.add_subcommand("augment", "Append synthetic samples to a labeled CSV");
  augment->add_option("--input", aug.input, "Input CSV")->required();
  augment->add_option("--output", aug.output, "Output CSV")->required();
  augment->add_option("--strategy", aug.strategy, "aitchison_mixup | random_subcompositions | "
                                                 "compositional_cutmix | multinomial_resampling")
      ->capture_default_str();
  augment->add_option("--factor", aug.factor, "Synthetic samples per original")->capture_default_str();
  augment->add_option("--weight", aug.weight, "Synthetic sample weight (default 1/factor)");
  aug.data.add_to(augment);

  PretrainArgs pre;
  auto* pretrain = app.add_subcommand("pretrain", "Contrastive pretraining; writes a checkpoint");
  pretrain->add_option("--train", pre.train, "Training CSV")->required();
  pretrain->add_option("--output", pre.output, "Checkpoint path")->required();
  pretrain->add_option("--epochs", pre.epochs)->capture_default_str();
  pretrain->add_option("--temperature", pre.temperature)->capture_default_str();
  pretrain->add_option("--lr", pre.lr, "Adam learning rate")->capture_default_str();
  pretrain->add_option("--strategy", pre.strategy, "View strategy")->capture_default_str();
  pretrain->add_option("--input-transform", pre.transform, "clr | raw")->capture_default_str();
  pre.data.add_to(pretrain);

  EvalArgs lin, fin;
  auto add_eval = [](CLI::App* cmd, EvalArgs& e) {
    cmd->add_option("--checkpoint", e.checkpoint, "Pretrained checkpoint");
    cmd->add_flag("--random-init", e.random_init, "Start from a randomly initialized encoder");
    cmd->add_option("--train", e.train, "Training CSV")->required();
    cmd->add_option("--test", e.test, "Test CSV")->required();
    cmd->add_option("--head-epochs", e.head_epochs)->capture_default_str();
    cmd->add_option("--head-lr", e.head_lr)->capture_default_str();
    cmd->add_option("--input-transform", e.transform, "Encoder input with --random-init")
        ->capture_default_str();
    e.data.add_to(cmd);
  };
  auto* linear = app.add_subcommand("linear-eval", "Train a linear head on a frozen encoder");
  add_eval(linear, lin);
  auto* tune = app.add_subcommand("finetune", "Train head and encoder on the supervised objective");
  add_eval(tune, fin);
  tune->add_option("--save", fin.save, "Write the finetuned encoder checkpoint");

  std::string bench_config, bench_output;
  auto* bench = app.add_subcommand("bench", "Synthetic augmentation benchmark");
  bench->add_option("--config", bench_config, "JSON config");
  bench->add_option("--output", bench_output, "Report path (default: standard output)");

  SynthArgs syn;
  auto* synth = app.add_subcommand("synth", "Write a two-class logistic-normal dataset");
  synth->add_option("--n", syn.n)->capture_default_str();
  synth->add_option("--p", syn.p)->capture_default_str();
  synth->add_option("--delta", syn.delta)->capture_default_str();
  synth->add_option("--output", syn.output, "Output CSV")->required();
  synth->add_option("--n-test", syn.n_test, "Size of a test set drawn from the same model");
  synth->add_option("--test-output", syn.test_output, "Test CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (threads > 0) omp_set_num_threads(threads);
  const std::uint64_t s = seed.value_or(0);
  CLI::App* cmd = app.get_subcommands().front();
  try {
    if (cmd == augment) return run_augment(aug, s);
    if (cmd == pretrain) return run_pretrain(pre, s);
    if (cmd == linear) return run_eval(lin, s, false);
    if (cmd == tune) return run_eval(fin, s, true);
    if (cmd == bench) return run_bench(bench_config, bench_output, seed);
    if (cmd == synth) return run_synth(syn, s);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << cmd->help();
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
