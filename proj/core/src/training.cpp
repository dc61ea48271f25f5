#include "rumor/training.hpp"

#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>

#include "rumor/error.hpp"
#include "rumor/evaluation.hpp"
#include "rumor/nn/random.hpp"

namespace rumor {
namespace {

// Sum of per-sample losses; gradients are scaled by `grad_scale`.
double accumulate_batch(Model& model, std::span<const LabeledInputs* const> batch, const nn::LossConfig& loss,
                        const nn::ForwardMode& mode, bool accumulate, double grad_scale) {
  double total = 0.0;
  Model::Trace trace;
  for (const LabeledInputs* item : batch) {
    const std::size_t gold = index_of(item->label);
    const Model::Output out = model.forward(item->inputs, mode, accumulate ? &trace : nullptr);
    total += nn::focal_loss(out.probs, gold, loss);
    if (accumulate) {
      Vector d_logits = nn::focal_loss_grad_logits(out.probs, gold, loss);
      for (double& g : d_logits) g *= grad_scale;
      model.backward(trace, d_logits);
    }
  }
  return total;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<LabeledInputs> featurize_all(const std::vector<Thread>& threads, const EmbeddingSource& embeddings,
                                         const ModelConfig& config) {
  std::vector<LabeledInputs> out;
  out.reserve(threads.size());
  for (const Thread& t : threads) out.push_back({featurize(t, embeddings, config), t.veracity});
  return out;
}

double batch_loss(Model& model, std::span<const LabeledInputs> batch, const nn::LossConfig& loss,
                  const nn::ForwardMode& mode, bool accumulate) {
  if (batch.empty()) return 0.0;
  std::vector<const LabeledInputs*> items;
  for (const LabeledInputs& item : batch) items.push_back(&item);
  const double scale = loss.reduction == nn::Reduction::kMean ? 1.0 / static_cast<double>(batch.size()) : 1.0;
  return accumulate_batch(model, items, loss, mode, accumulate, scale) * scale;
}

std::vector<Veracity> predict_all(const Model& model, std::span<const LabeledInputs> data) {
  std::vector<Veracity> out;
  out.reserve(data.size());
  for (const LabeledInputs& item : data) out.push_back(predict(model, item.inputs));
  return out;
}

TrainingRun train(std::span<const LabeledInputs> train_set, std::span<const LabeledInputs> dev_set,
                  const ModelConfig& config, const TrainOptions& options, const EpochCallback& on_epoch) {
  if (train_set.empty()) throw DataError("training split is empty");
  if (dev_set.empty()) throw DataError("dev split is empty");
  const nn::TrainConfig& tc = options.train;
  tc.validate();

  nn::LossConfig loss = options.loss;
  if (options.weighting == ClassWeighting::kInverseFrequency) {
    std::array<std::size_t, kNumClasses> counts{};
    for (const LabeledInputs& item : train_set) ++counts[index_of(item.label)];
    loss.alpha = nn::class_weights(counts);
  }
  loss.validate();

  Model model(config, tc.seed);
  nn::Rng shuffle_rng(derive_seed(tc.seed, 1));
  nn::Rng dropout_rng(derive_seed(tc.seed, 2));
  const nn::ForwardMode train_mode{true, tc.dropout, &dropout_rng};

  std::vector<Veracity> dev_gold;
  for (const LabeledInputs& item : dev_set) dev_gold.push_back(item.label);

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<const LabeledInputs*> batch;

  std::optional<TrainedModel> best;
  TrainingRun run{TrainedModel{model, tc, loss}, {}};
  std::uint64_t step = 0;
  for (std::size_t epoch = 1; epoch <= tc.epochs; ++epoch) {
    shuffle_rng.shuffle(order.begin(), order.end());
    double epoch_loss = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += tc.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), start + tc.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(&train_set[order[i]]);

      model.params().zero_grad();
      const double scale =
          loss.reduction == nn::Reduction::kMean ? 1.0 / static_cast<double>(batch.size()) : 1.0;
      double sum = 0.0;
      try {
        sum = accumulate_batch(model, batch, loss, train_mode, true, scale);
      } catch (const NumericError& e) {
        std::ostringstream msg;
        msg << e.what() << " at epoch " << epoch << ", batch " << batch_index + 1
            << " (parameter norm " << model.params().value_norm() << ")";
        throw NumericError(msg.str());
      }
      if (!std::isfinite(sum)) {
        std::ostringstream msg;
        msg << "non-finite loss at epoch " << epoch << ", batch " << batch_index + 1 << " (parameter norm "
            << model.params().value_norm() << ", gradient norm " << model.params().grad_norm() << ")";
        throw NumericError(msg.str());
      }
      epoch_loss += sum;
      nn::adam_step(model.params(), tc, ++step);
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.train_loss = epoch_loss / static_cast<double>(train_set.size());
    const std::vector<Veracity> dev_pred = predict_all(model, dev_set);
    const Metrics dev = compute_metrics(dev_gold, dev_pred);
    entry.dev_macro_f1 = dev.macro_f1;
    entry.dev_accuracy = dev.accuracy;
    run.log.push_back(entry);
    if (on_epoch) on_epoch(entry);

    if (!best || entry.dev_macro_f1 > best->best_dev_macro_f1) {
      best = TrainedModel{model, tc, loss, step, epoch, entry.dev_macro_f1};
      best->model.params().round_to_float();
    }
  }
  run.best = std::move(*best);
  return run;
}

}  // namespace rumor
