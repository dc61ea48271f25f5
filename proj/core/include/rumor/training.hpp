#pragma once

// Mini-batch training with per-epoch dev-set model selection.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rumor/model.hpp"
#include "rumor/nn/loss.hpp"
#include "rumor/nn/optimizer.hpp"

namespace rumor {

struct LabeledInputs {
  ThreadInputs inputs;
  Veracity label = Veracity::kUnverified;
};

std::vector<LabeledInputs> featurize_all(const std::vector<Thread>& threads, const EmbeddingSource& embeddings,
                                         const ModelConfig& config);

enum class ClassWeighting { kInverseFrequency, kNone };

struct TrainOptions {
  nn::TrainConfig train;
  nn::LossConfig loss;
  // kInverseFrequency replaces loss.alpha with weights computed from the
  // training split's label counts.
  ClassWeighting weighting = ClassWeighting::kInverseFrequency;
};

struct TrainedModel {
  Model model;
  nn::TrainConfig train;
  nn::LossConfig loss;
  std::uint64_t steps = 0;     // optimizer steps taken when this snapshot was kept
  std::size_t best_epoch = 0;  // 1-based
  double best_dev_macro_f1 = -1.0;
};

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double dev_macro_f1 = 0.0;
  double dev_accuracy = 0.0;
};

struct TrainingRun {
  TrainedModel best;
  std::vector<EpochLog> log;
};

using EpochCallback = std::function<void(const EpochLog&)>;

// Shuffles the training set each epoch with a seeded generator, takes one
// Adam step per batch (the last batch may be short), and after every epoch
// scores the dev set. The returned model is the epoch with the highest dev
// macro-F1 (earliest on ties), with parameters rounded to checkpoint
// precision. Throws DataError on empty splits and NumericError (with epoch,
// batch and norms) on a non-finite loss.
TrainingRun train(std::span<const LabeledInputs> train_set, std::span<const LabeledInputs> dev_set,
                  const ModelConfig& config, const TrainOptions& options, const EpochCallback& on_epoch = {});

// Mean focal loss of one batch in the given mode; accumulates gradients into
// the model when `accumulate` is set.
double batch_loss(Model& model, std::span<const LabeledInputs> batch, const nn::LossConfig& loss,
                  const nn::ForwardMode& mode, bool accumulate);

std::vector<Veracity> predict_all(const Model& model, std::span<const LabeledInputs> data);

// Seed-derivation helper (splitmix64) used for independent RNG streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace rumor
