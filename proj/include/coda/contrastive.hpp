#pragma once

// Contrastive pretraining on augmented views.
//
// Every epoch builds 2N views from the whole training set (full batch),
// embeds them, and takes one Adam step on the temperature-scaled
// cross-entropy over cosine similarities:
//
//   l(a) = -log( exp(s(a, b) / tau) / sum_{k != a} exp(s(a, k) / tau) )
//
// with b the positive partner of a, averaged over all 2N anchors.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "coda/augment.hpp"
#include "coda/dataset.hpp"
#include "coda/network.hpp"

namespace coda {

struct ViewBatch {
  std::vector<Composition> views;
  std::vector<std::size_t> partner;  // positive partner of each view
  // Training-example index (subcomposition views) or partition-pair index
  // (paired views) each view came from.
  std::vector<std::size_t> origin;
};

// Views 2i and 2i+1 are two random subcompositions of example i.
ViewBatch sample_views_subcomposition(std::span<const Composition> train, std::uint64_t seed,
                                      std::size_t epoch,
                                      const LambdaSource& lambda_source = uniform_lambda);

// Examples are shuffled into floor(n/2) disjoint pairs (an odd leftover is
// paired with itself); each pair yields two independent combinations under
// `strategy` (AitchisonMixup or CompositionalCutMix), with a fresh lambda and
// mask per view.
ViewBatch sample_views_paired(std::span<const Composition> train, Strategy strategy,
                              std::uint64_t seed, std::size_t epoch,
                              const LambdaSource& lambda_source = uniform_lambda);

struct EmbeddingBatch {
  Matrix projections;  // 2N x d, unit rows
  std::vector<std::size_t> partner;

  // Errors: DegenerateBatch (empty or odd batch), InvalidArgument when the
  // pairing is not a perfect matching, NonFinite. Rows are normally unit
  // norm but the loss is defined for any rows.
  void validate() const;
};

struct LossAndGradient {
  double loss = 0.0;
  Matrix gradient;  // dL/d(projections)
};

LossAndGradient nt_xent_loss(const EmbeddingBatch& batch, double temperature);

struct ContrastiveConfig {
  double temperature = 0.5;
  std::size_t epochs = 2000;
  AdamConfig adam;
  std::uint64_t seed = 0;
  Strategy view_strategy = Strategy::RandomSubcompositions;
  InputTransform input = InputTransform::Clr;
  std::uint64_t input_library_size = kDefaultLibrarySize;

  void validate() const;
};

// Loss and full parameter gradient for one batch of views.
struct ContrastiveStep {
  double loss = 0.0;
  NetworkGradient gradient;
};
ContrastiveStep contrastive_step(const EncoderState& state, const ViewBatch& views,
                                 double temperature);

struct PretrainResult {
  EncoderState state;
  std::vector<double> loss_trace;  // one entry per epoch
};

// Zero-replaces the training compositions with their library sizes, then
// runs `cfg.epochs` full-batch Adam steps. Errors: EmptyTrainingSet,
// NonFinite (naming the epoch).
PretrainResult pretrain(const Dataset& train, const ContrastiveConfig& cfg);
PretrainResult pretrain_from(EncoderState init, const Dataset& train, const ContrastiveConfig& cfg);

// Linear classification head on top of the 64-d representation.
struct LinearHead {
  std::vector<double> weight;
  double bias = 0.0;
};

struct HeadConfig {
  std::size_t epochs = 2000;
  AdamConfig adam;
  std::uint64_t seed = 0;
};

LinearHead init_head(std::size_t width, std::uint64_t seed);

struct EvalResult {
  double auc = 0.0;
  LinearHead head;
  std::vector<double> test_scores;
};

// Frozen encoder; only the head is trained (weighted cross-entropy).
// Errors: SingleClassTrain, SingleClass (test), InvalidArgument (non-binary).
EvalResult linear_eval(const EncoderState& state, const Dataset& train, const Dataset& test,
                       const HeadConfig& cfg);

struct FinetuneResult {
  EvalResult eval;
  EncoderState state;
};

// Head and encoder trained jointly on the supervised objective.
FinetuneResult finetune(const EncoderState& state, const Dataset& train, const Dataset& test,
                        const HeadConfig& cfg);

// Supervised loss (weighted mean binary cross-entropy of the head on the
// representation) and gradients for finetuning; exposed for gradient checks.
struct SupervisedStep {
  double loss = 0.0;
  NetworkGradient encoder_gradient;
  LinearHead head_gradient;
};
SupervisedStep supervised_step(const EncoderState& state, const LinearHead& head,
                               const Matrix& inputs, std::span<const int> labels,
                               std::span<const double> weights);

// Binary labels (0/1) from a two-class dataset. Errors: InvalidArgument.
std::vector<int> binary_labels(const Dataset& ds);

// --- checkpoints ---------------------------------------------------------------
//
// Text container, one item per line:
//
//   coda-encoder-checkpoint 1
//   input clr <library size>
//   config <temperature> <epochs> <seed> <view strategy>
//   shape <input> <representation> <projection> <#enc hidden> <widths...> <#head hidden> <widths...>
//   layer encoder|head <index> <out> <in>
//   w <out*in values, row-major>
//   b <out values>
//   ... (one layer/w/b triple per layer)
//   checksum <16 hex digits>
//
// Values are written with 17 significant digits (exact round trip); the
// checksum is parameter_hash() of the stored state.
struct Checkpoint {
  EncoderState state;
  ContrastiveConfig config;
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
// Errors: IoError, CheckpointFormat.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace coda
