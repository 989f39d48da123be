#include "coda/contrastive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "coda/error.hpp"
#include "coda/metrics.hpp"

namespace coda {
namespace {

std::vector<Composition> zero_replaced(const Dataset& ds, std::uint64_t fallback) {
  std::vector<Composition> out;
  out.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out.push_back(zero_replace(ds.samples[i].x, ds.library_size(i, LibrarySize(fallback))));
  }
  return out;
}

std::vector<double> sample_weights(const Dataset& ds) {
  std::vector<double> w;
  w.reserve(ds.size());
  for (const auto& s : ds.samples) w.push_back(s.weight);
  return w;
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }
double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::vector<double> head_logits(const LinearHead& head, const Matrix& rep) {
  std::vector<double> logits(rep.rows);
  for (std::size_t i = 0; i < rep.rows; ++i) {
    double acc = head.bias;
    const auto r = rep.row(i);
    for (std::size_t k = 0; k < r.size(); ++k) acc += r[k] * head.weight[k];
    logits[i] = acc;
  }
  return logits;
}

// Weighted mean BCE of the head and dL/d(logit).
double head_loss(const std::vector<double>& logits, std::span<const int> labels,
                 std::span<const double> weights, std::vector<double>& dlogit) {
  double total_w = 0.0;
  for (double w : weights) total_w += w;
  double loss = 0.0;
  dlogit.assign(logits.size(), 0.0);
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double l = logits[i];
    loss += weights[i] * (softplus(l) - labels[i] * l);
    dlogit[i] = weights[i] * (sigmoid(l) - labels[i]) / total_w;
  }
  return loss / total_w;
}

void check_two_classes(std::span<const int> labels, ErrorCode code, const char* what) {
  bool has0 = false, has1 = false;
  for (int y : labels) (y == 1 ? has1 : has0) = true;
  if (!has0 || !has1) throw Error(code, what);
}

std::vector<std::span<double>> head_blocks(LinearHead& head) {
  return {std::span<double>(head.weight), std::span<double>(&head.bias, 1)};
}

}  // namespace

ViewBatch sample_views_subcomposition(std::span<const Composition> train, std::uint64_t seed,
                                      std::size_t epoch, const LambdaSource& lambda_source) {
  if (train.empty()) throw Error(ErrorCode::EmptyTrainingSet, "no training examples");
  ViewBatch batch;
  const std::size_t n = train.size();
  batch.views.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t v = 0; v < 2; ++v) {
      RandomStream rng(seed, "views/subcomposition", epoch, 2 * i + v);
      const double lambda = lambda_source(rng);
      batch.views.push_back(draw_random_subcomposition(train[i], lambda, rng));
      batch.partner.push_back(2 * i + (1 - v));
      batch.origin.push_back(i);
    }
  }
  return batch;
}

ViewBatch sample_views_paired(std::span<const Composition> train, Strategy strategy,
                              std::uint64_t seed, std::size_t epoch,
                              const LambdaSource& lambda_source) {
  if (train.empty()) throw Error(ErrorCode::EmptyTrainingSet, "no training examples");
  if (strategy != Strategy::AitchisonMixup && strategy != Strategy::CompositionalCutMix) {
    throw Error(ErrorCode::InvalidArgument, "paired views need Mixup or CutMix");
  }
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  RandomStream shuffler(seed, "views/partition", epoch);
  shuffler.shuffle(std::span<std::size_t>(order));

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t k = 0; k + 1 < order.size(); k += 2) pairs.emplace_back(order[k], order[k + 1]);
  if (order.size() % 2 == 1) pairs.emplace_back(order.back(), order.back());

  ViewBatch batch;
  for (std::size_t q = 0; q < pairs.size(); ++q) {
    const auto& [a, b] = pairs[q];
    for (std::size_t v = 0; v < 2; ++v) {
      RandomStream rng(seed, "views/paired", epoch, 2 * q + v);
      const double lambda = lambda_source(rng);
      batch.views.push_back(draw_pair_combination(strategy, train[a], train[b], lambda, rng));
      batch.partner.push_back(2 * q + (1 - v));
      batch.origin.push_back(q);
    }
  }
  return batch;
}

void EmbeddingBatch::validate() const {
  const std::size_t m = projections.rows;
  if (m == 0 || m % 2 != 0) {
    throw Error(ErrorCode::DegenerateBatch, "batch must hold 2N >= 2 embeddings");
  }
  if (partner.size() != m) throw Error(ErrorCode::DimensionMismatch, "pairing map length");
  for (std::size_t a = 0; a < m; ++a) {
    if (partner[a] >= m || partner[a] == a || partner[partner[a]] != a) {
      throw Error(ErrorCode::InvalidArgument, "pairing is not a perfect matching");
    }
  }
  for (double v : projections.data) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "embedding");
  }
}

LossAndGradient nt_xent_loss(const EmbeddingBatch& batch, double temperature) {
  if (!(temperature > 0.0)) throw Error(ErrorCode::InvalidArgument, "temperature must be > 0");
  batch.validate();
  const Matrix& z = batch.projections;
  const std::size_t m = z.rows;

  Matrix sim;
  parallel::gram(z, sim);
  for (double& s : sim.data) s /= temperature;

  // coeff(a, k) = dL/d sim(a, k), already divided by the number of anchors.
  Matrix coeff(m, m);
  double loss = 0.0;
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t a = 0; a < m; ++a) {
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < m; ++k)
      if (k != a) top = std::max(top, sim(a, k));
    double denom = 0.0;
    for (std::size_t k = 0; k < m; ++k)
      if (k != a) denom += std::exp(sim(a, k) - top);
    const double lse = top + std::log(denom);
    loss += lse - sim(a, batch.partner[a]);
    for (std::size_t k = 0; k < m; ++k) {
      if (k == a) continue;
      coeff(a, k) = std::exp(sim(a, k) - lse) * inv_m;
    }
    coeff(a, batch.partner[a]) -= inv_m;
  }

  LossAndGradient out;
  out.loss = std::max(loss * inv_m, 0.0);
  out.gradient = Matrix(m, z.cols);
  for (std::size_t a = 0; a < m; ++a) {
    auto g = out.gradient.row(a);
    for (std::size_t k = 0; k < m; ++k) {
      const double c = (coeff(a, k) + coeff(k, a)) / temperature;
      if (c == 0.0) continue;
      const auto zk = z.row(k);
      for (std::size_t d = 0; d < z.cols; ++d) g[d] += c * zk[d];
    }
  }
  return out;
}

void ContrastiveConfig::validate() const {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw Error(ErrorCode::InvalidArgument, "temperature must be > 0");
  }
  if (!(adam.learning_rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "learning rate must be > 0");
  if (input_library_size < 1) throw Error(ErrorCode::InvalidArgument, "library size must be >= 1");
  if (view_strategy == Strategy::MultinomialResampling) {
    throw Error(ErrorCode::InvalidArgument, "views use subcompositions, Mixup or CutMix");
  }
}

ContrastiveStep contrastive_step(const EncoderState& state, const ViewBatch& views,
                                 double temperature) {
  const Matrix inputs = encode_inputs(state, views.views);
  const ForwardPass pass = forward(state, inputs);
  EmbeddingBatch batch{pass.projection, views.partner};
  auto lg = nt_xent_loss(batch, temperature);
  return {lg.loss, backward(state, pass, lg.gradient)};
}

PretrainResult pretrain(const Dataset& train, const ContrastiveConfig& cfg) {
  if (train.samples.empty()) throw Error(ErrorCode::EmptyTrainingSet, "no training examples");
  EncoderState init = init_encoder(NetworkShape::standard(train.num_features()), cfg.seed, cfg.input);
  init.input_library_size = cfg.input_library_size;
  return pretrain_from(std::move(init), train, cfg);
}

PretrainResult pretrain_from(EncoderState init, const Dataset& train, const ContrastiveConfig& cfg) {
  cfg.validate();
  validate(init);
  if (train.samples.empty()) throw Error(ErrorCode::EmptyTrainingSet, "no training examples");
  const auto comps = zero_replaced(train, cfg.input_library_size);

  PretrainResult result{std::move(init), {}};
  auto params = parameter_blocks(result.state);
  Adam adam(cfg.adam, params);
  result.loss_trace.reserve(cfg.epochs);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const ViewBatch views =
        cfg.view_strategy == Strategy::RandomSubcompositions
            ? sample_views_subcomposition(comps, cfg.seed, epoch)
            : sample_views_paired(comps, cfg.view_strategy, cfg.seed, epoch);
    ContrastiveStep step;
    try {
      step = contrastive_step(result.state, views, cfg.temperature);
    } catch (const Error& e) {
      throw Error(e.code(), "epoch " + std::to_string(epoch) + ": " + e.what());
    }
    if (!std::isfinite(step.loss)) {
      throw Error(ErrorCode::NonFinite, "loss at epoch " + std::to_string(epoch));
    }
    result.loss_trace.push_back(step.loss);
    adam.step(params, parameter_blocks(step.gradient));
  }
  return result;
}

LinearHead init_head(std::size_t width, std::uint64_t seed) {
  const DenseLayer layer = init_dense(width, 1, seed, "init/linear-head", 0);
  return {layer.weight.data, 0.0};
}

std::vector<int> binary_labels(const Dataset& ds) {
  if (ds.class_names.size() > 2) {
    throw Error(ErrorCode::InvalidArgument, "expected a binary task, found " +
                                                std::to_string(ds.class_names.size()) + " classes");
  }
  std::vector<int> y;
  y.reserve(ds.size());
  for (const auto& s : ds.samples) y.push_back(static_cast<int>(s.label));
  return y;
}

SupervisedStep supervised_step(const EncoderState& state, const LinearHead& head,
                               const Matrix& inputs, std::span<const int> labels,
                               std::span<const double> weights) {
  const ForwardPass pass = forward(state, inputs);
  const Matrix& rep = pass.representation;
  if (head.weight.size() != rep.cols) throw Error(ErrorCode::DimensionMismatch, "head width");
  std::vector<double> dlogit;
  SupervisedStep out;
  out.loss = head_loss(head_logits(head, rep), labels, weights, dlogit);
  out.head_gradient.weight.assign(rep.cols, 0.0);
  Matrix grad_rep(rep.rows, rep.cols);
  for (std::size_t i = 0; i < rep.rows; ++i) {
    const auto r = rep.row(i);
    auto g = grad_rep.row(i);
    for (std::size_t k = 0; k < rep.cols; ++k) {
      out.head_gradient.weight[k] += dlogit[i] * r[k];
      g[k] = dlogit[i] * head.weight[k];
    }
    out.head_gradient.bias += dlogit[i];
  }
  out.encoder_gradient = backward_encoder(state, pass, grad_rep);
  return out;
}

EvalResult linear_eval(const EncoderState& state, const Dataset& train, const Dataset& test,
                       const HeadConfig& cfg) {
  const auto y_train = binary_labels(train);
  const auto y_test = binary_labels(test);
  check_two_classes(y_train, ErrorCode::SingleClassTrain, "training labels hold a single class");
  const auto weights = sample_weights(train);

  const Matrix rep_train =
      represent(state, encode_inputs(state, zero_replaced(train, state.input_library_size)));
  const Matrix rep_test =
      represent(state, encode_inputs(state, zero_replaced(test, state.input_library_size)));

  EvalResult result;
  result.head = init_head(rep_train.cols, cfg.seed);
  auto params = head_blocks(result.head);
  Adam adam(cfg.adam, params);
  LinearHead grad;
  std::vector<double> dlogit;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    head_loss(head_logits(result.head, rep_train), y_train, weights, dlogit);
    grad.weight.assign(rep_train.cols, 0.0);
    grad.bias = 0.0;
    for (std::size_t i = 0; i < rep_train.rows; ++i) {
      const auto r = rep_train.row(i);
      for (std::size_t k = 0; k < r.size(); ++k) grad.weight[k] += dlogit[i] * r[k];
      grad.bias += dlogit[i];
    }
    adam.step(params, head_blocks(grad));
  }
  result.test_scores = head_logits(result.head, rep_test);
  result.auc = roc_auc(result.test_scores, y_test);
  return result;
}

FinetuneResult finetune(const EncoderState& state, const Dataset& train, const Dataset& test,
                        const HeadConfig& cfg) {
  const auto y_train = binary_labels(train);
  const auto y_test = binary_labels(test);
  check_two_classes(y_train, ErrorCode::SingleClassTrain, "training labels hold a single class");
  const auto weights = sample_weights(train);
  const Matrix x_train = encode_inputs(state, zero_replaced(train, state.input_library_size));
  const Matrix x_test = encode_inputs(state, zero_replaced(test, state.input_library_size));

  FinetuneResult result{{}, state};
  result.eval.head = init_head(state.shape.representation, cfg.seed);
  auto enc_params = parameter_blocks(result.state);
  auto head_params = head_blocks(result.eval.head);
  Adam enc_adam(cfg.adam, enc_params);
  Adam head_adam(cfg.adam, head_params);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    SupervisedStep step = supervised_step(result.state, result.eval.head, x_train, y_train, weights);
    if (!std::isfinite(step.loss)) {
      throw Error(ErrorCode::NonFinite, "finetune loss at epoch " + std::to_string(epoch));
    }
    enc_adam.step(enc_params, parameter_blocks(step.encoder_gradient));
    head_adam.step(head_params, head_blocks(step.head_gradient));
  }
  result.eval.test_scores = head_logits(result.eval.head, represent(result.state, x_test));
  result.eval.auc = roc_auc(result.eval.test_scores, y_test);
  return result;
}

}  // namespace coda
