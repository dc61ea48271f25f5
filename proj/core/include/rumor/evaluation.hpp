#pragma once

// Classification metrics and the evaluation protocols: standard split,
// leave-one-event-out, early detection over elapsed-time checkpoints, and
// cross-platform train/test pairs.

#include <array>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rumor/thread.hpp"

namespace rumor {

// confusion[gold][pred].
using ConfusionMatrix = std::array<std::array<std::size_t, kNumClasses>, kNumClasses>;

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

// Any 0/0 in precision, recall or F1 is taken as 0.
struct Metrics {
  ConfusionMatrix confusion{};
  std::array<ClassScores, kNumClasses> per_class{};
  double macro_f1 = 0.0;
  double accuracy = 0.0;
  std::size_t total = 0;
};

// Throws DataError on empty input or length mismatch.
Metrics compute_metrics(std::span<const Veracity> gold, std::span<const Veracity> pred);
double macro_f1(std::span<const Veracity> gold, std::span<const Veracity> pred);
double accuracy(std::span<const Veracity> gold, std::span<const Veracity> pred);

using Predictor = std::function<Veracity(const Thread&)>;
// Trains on `train` and returns a predictor. `fold` numbers the calls within
// one protocol run, for deriving per-fold seeds.
using TrainFn = std::function<Predictor(const std::vector<Thread>& train, std::size_t fold)>;

struct FoldResult {
  std::string name;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  Metrics metrics;
};

struct CurvePoint {
  double hours = 0.0;
  std::size_t threads = 0;
  double mean_replies = 0.0;
  Metrics metrics;
};

struct EvalReport {
  std::string protocol;
  // Headline numbers: equal to `metrics` except for leave-one-event-out,
  // where they are unweighted means over folds.
  double macro_f1 = 0.0;
  double accuracy = 0.0;
  // Pooled over every prediction the protocol made (final checkpoint for
  // early detection).
  Metrics metrics;
  std::vector<FoldResult> folds;
  std::vector<CurvePoint> curve;
  std::vector<std::string> warnings;
};

EvalReport evaluate_standard(const Predictor& predict, const std::vector<Thread>& test);

// One fold per event. If `events` is non-empty it lists the folds to run;
// events with no threads are skipped with a warning. Throws DataError if
// fewer than two distinct events are present.
EvalReport leave_one_event_out(const std::vector<Thread>& threads, const TrainFn& train,
                               const std::vector<std::string>& events = {});

inline const std::vector<double> kDefaultEarlyCheckpoints = {1, 4, 7, 10, 13, 16, 19, 22, 24};

// Evaluates the same predictor on time slices of every thread. Threads that
// cannot be sliced are dropped with a warning. Throws DataError unless the
// checkpoints are ascending within [0, 24].
EvalReport early_detection_eval(const Predictor& predict, const std::vector<Thread>& threads,
                                std::span<const double> checkpoints = kDefaultEarlyCheckpoints);

using PlatformPair = std::pair<std::string, std::string>;  // (train, test)

inline const std::vector<PlatformPair> kDefaultPlatformPairs = {
    {"twitter", "twitter"}, {"twitter", "reddit"}, {"reddit", "reddit"}, {"reddit", "twitter"}};

// For each pair, trains on the train-platform threads of `train_pool` and
// tests on the test-platform threads of `test_pool`. Throws DataError naming
// the platform when a partition is empty.
std::vector<EvalReport> cross_platform_eval(const std::vector<Thread>& train_pool,
                                            const std::vector<Thread>& test_pool, const TrainFn& train,
                                            const std::vector<PlatformPair>& pairs = kDefaultPlatformPairs);

// Full structured report (JSON).
void write_report_json(const std::vector<EvalReport>& reports, const std::filesystem::path& path);
// One row per overall result, fold, checkpoint or pair (tab-separated).
void write_report_table(const std::vector<EvalReport>& reports, const std::filesystem::path& path);

}  // namespace rumor
