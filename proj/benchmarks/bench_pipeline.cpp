#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "rumor/evaluation.hpp"
#include "rumor/model.hpp"
#include "rumor/nn/loss.hpp"
#include "rumor/text_normalizer.hpp"
#include "rumor/training.hpp"

namespace {

using namespace rumor;

// A thread of `replies` replies with a mix of stances and depths.
Thread make_thread(std::size_t replies) {
  Thread t;
  t.thread_id = "bench";
  t.event = "bench";
  t.source = {"s", std::nullopt, "breaking: officials confirm the bridge closure downtown", 0, Stance::kSupport,
              "twitter"};
  for (std::size_t i = 0; i < replies; ++i) {
    const std::string parent = i < 4 ? "s" : "r" + std::to_string(i / 2);
    t.replies.push_back({"r" + std::to_string(i), parent, "reply number " + std::to_string(i) + " about the bridge",
                         static_cast<std::int64_t>(60 * (i + 1)), stance_from_index(i % kNumStances), "twitter"});
  }
  return t;
}

ModelConfig bench_config(std::size_t dim, AttentionMode mode) {
  ModelConfig c;
  c.embedding_dim = dim;
  c.attention = mode;
  return c;
}

void BM_Featurize(benchmark::State& state) {
  const Thread t = make_thread(static_cast<std::size_t>(state.range(0)));
  const ModelConfig config = bench_config(768, AttentionMode::kTokens);
  const EmbeddingSource emb = EmbeddingSource::hashing(768);
  for (auto _ : state) benchmark::DoNotOptimize(featurize(t, emb, config));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Featurize)->Arg(8)->Arg(64)->Arg(256);

void BM_Forward(benchmark::State& state) {
  const auto mode = state.range(1) == 0 ? AttentionMode::kSingle : AttentionMode::kTokens;
  const ModelConfig config = bench_config(768, mode);
  const Model model(config, 1);
  const ThreadInputs in =
      featurize(make_thread(static_cast<std::size_t>(state.range(0))), EmbeddingSource::hashing(768), config);
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(in, nn::ForwardMode::eval()));
}
BENCHMARK(BM_Forward)->ArgsProduct({{8, 64}, {0, 1}})->ArgNames({"replies", "tokens"});

void BM_ForwardBackward(benchmark::State& state) {
  const auto mode = state.range(1) == 0 ? AttentionMode::kSingle : AttentionMode::kTokens;
  const ModelConfig config = bench_config(768, mode);
  Model model(config, 1);
  const ThreadInputs in =
      featurize(make_thread(static_cast<std::size_t>(state.range(0))), EmbeddingSource::hashing(768), config);
  nn::Rng rng(2);
  const nn::ForwardMode train_mode{true, 0.5, &rng};
  const nn::LossConfig loss;
  Model::Trace trace;
  for (auto _ : state) {
    const Model::Output out = model.forward(in, train_mode, &trace);
    model.backward(trace, nn::focal_loss_grad_logits(out.probs, 1, loss));
  }
}
BENCHMARK(BM_ForwardBackward)->ArgsProduct({{8, 64}, {0, 1}})->ArgNames({"replies", "tokens"});

void BM_TrainEpoch(benchmark::State& state) {
  ModelConfig config = bench_config(64, AttentionMode::kTokens);
  std::vector<LabeledInputs> data;
  for (std::size_t i = 0; i < 64; ++i) {
    Thread t = make_thread(4 + i % 12);
    t.thread_id = "t" + std::to_string(i);
    data.push_back({featurize(t, EmbeddingSource::hashing(64), config), veracity_from_index(i % kNumClasses)});
  }
  TrainOptions options;
  options.train.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(train(data, data, config, options));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(data.size()));
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

void BM_NormalizeText(benchmark::State& state) {
  const std::string tweet =
      "@bbcbreaking Is this real?? http://t.co/AbC123 #CharlieHebdo #JeSuisCharlie \xF0\x9F\x98\xA2 "
      "see www.example.com/news @reuters \xF0\x9F\x91\x8D\xF0\x9F\x8F\xBD";
  const NormalizationConfig config;
  std::size_t bytes = 0;
  for (auto _ : state) {
    const std::string out = normalize_text(tweet, config);
    bytes += tweet.size();
    benchmark::DoNotOptimize(out);
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(bytes));
}
BENCHMARK(BM_NormalizeText);

void BM_MacroF1(benchmark::State& state) {
  std::vector<Veracity> gold;
  std::vector<Veracity> pred;
  for (std::size_t i = 0; i < 1000; ++i) {
    gold.push_back(veracity_from_index(i % 3));
    pred.push_back(veracity_from_index((i * 7) % 3));
  }
  for (auto _ : state) benchmark::DoNotOptimize(macro_f1(gold, pred));
}
BENCHMARK(BM_MacroF1);

}  // namespace

BENCHMARK_MAIN();
