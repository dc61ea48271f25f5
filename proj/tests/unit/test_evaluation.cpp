#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"
#include "oracles.hpp"
#include "rumor/error.hpp"
#include "rumor/evaluation.hpp"
#include "rumor/model.hpp"

namespace rumor {
namespace {

constexpr Veracity T = Veracity::kTrue;
constexpr Veracity F = Veracity::kFalse;
constexpr Veracity U = Veracity::kUnverified;

std::vector<Veracity> random_labels(nn::Rng& rng, std::size_t n) {
  std::vector<Veracity> out(n);
  for (Veracity& v : out) v = veracity_from_index(rng.below(kNumClasses));
  return out;
}

TEST(Metrics, HandComputedExample) {
  const std::vector<Veracity> gold = {T, T, F, U};
  const std::vector<Veracity> pred = {T, F, F, U};
  const Metrics m = compute_metrics(gold, pred);
  EXPECT_NEAR(m.per_class[0].f1, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(m.per_class[1].f1, 2.0 / 3.0, 1e-15);
  EXPECT_EQ(m.per_class[2].f1, 1.0);
  EXPECT_NEAR(m.macro_f1, 7.0 / 9.0, 1e-15);
  EXPECT_EQ(m.accuracy, 0.75);
  EXPECT_EQ(m.confusion[0][1], 1u);
  EXPECT_EQ(m.per_class[0].support, 2u);
}

TEST(Metrics, PerfectAndDegenerate) {
  const std::vector<Veracity> all = {T, F, U, U, F};
  EXPECT_EQ(macro_f1(all, all), 1.0);
  EXPECT_EQ(accuracy(all, all), 1.0);

  // Absent classes score 0 rather than NaN.
  const std::vector<Veracity> only_t = {T, T, T};
  const Metrics m = compute_metrics(only_t, only_t);
  EXPECT_EQ(m.per_class[1].f1, 0.0);
  EXPECT_EQ(m.per_class[2].precision, 0.0);
  EXPECT_NEAR(m.macro_f1, 1.0 / 3.0, 1e-15);

  // A constant predictor on balanced gold.
  const std::vector<Veracity> gold = {T, T, F, F, U, U};
  const std::vector<Veracity> pred(6, T);
  const Metrics c = compute_metrics(gold, pred);
  EXPECT_NEAR(c.accuracy, 1.0 / 3.0, 1e-15);
  // T: precision 1/3, recall 1, F1 1/2; F and U score 0.
  EXPECT_NEAR(c.macro_f1, 1.0 / 6.0, 1e-15);
  EXPECT_LT(c.macro_f1, c.accuracy);
}

TEST(Metrics, Errors) {
  EXPECT_THROW(compute_metrics(std::vector<Veracity>{T, F}, std::vector<Veracity>{T}), DataError);
  EXPECT_THROW(compute_metrics({}, {}), DataError);
}

TEST(Metrics, AgreesExactlyWithOracle) {
  nn::Rng rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(60);
    const auto gold = random_labels(rng, n);
    const auto pred = random_labels(rng, n);
    const Metrics m = compute_metrics(gold, pred);
    const testing::OracleScores o = testing::oracle_scores(gold, pred);
    EXPECT_EQ(m.macro_f1, o.macro_f1);
    EXPECT_EQ(m.accuracy, o.accuracy);
    EXPECT_EQ(m.confusion, o.confusion);
  }
}

TEST(Metrics, PropertiesOverRandomVectors) {
  nn::Rng rng(2);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.below(40);
    auto gold = random_labels(rng, n);
    auto pred = random_labels(rng, n);
    const Metrics m = compute_metrics(gold, pred);
    EXPECT_GE(m.macro_f1, 0.0);
    EXPECT_LE(m.macro_f1, 1.0);
    std::size_t trace = 0;
    bool diagonal = true;
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) {
        if (i == j) trace += m.confusion[i][j];
        else if (m.confusion[i][j] != 0) diagonal = false;
      }
    }
    EXPECT_EQ(m.accuracy, static_cast<double>(trace) / static_cast<double>(n));
    // Macro-F1 is 1 exactly when predictions are perfect and all classes occur.
    bool all_present = true;
    for (std::size_t c = 0; c < 3; ++c) all_present = all_present && m.per_class[c].support > 0;
    if (all_present) {
      EXPECT_EQ(m.macro_f1 == 1.0, diagonal);
    }

    // Permuting the pairs changes nothing.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order.begin(), order.end());
    std::vector<Veracity> g2;
    std::vector<Veracity> p2;
    for (std::size_t i : order) {
      g2.push_back(gold[i]);
      p2.push_back(pred[i]);
    }
    const Metrics m2 = compute_metrics(g2, p2);
    EXPECT_EQ(m2.macro_f1, m.macro_f1);
    EXPECT_EQ(m2.accuracy, m.accuracy);
  }
}

Veracity rule(const Thread& t) { return testing::plurality_veracity(t); }

TEST(StandardEval, RulePredictorIsPerfectOnSyntheticCorpus) {
  const auto corpus = testing::synthetic_corpus(30, 3);
  const EvalReport r = evaluate_standard(rule, corpus);
  EXPECT_EQ(r.protocol, "standard");
  EXPECT_EQ(r.macro_f1, 1.0);
  EXPECT_EQ(r.metrics.total, 30u);
}

TEST(LeaveOneEventOut, FoldsPartitionByEvent) {
  const auto corpus = testing::synthetic_corpus(45, 4, "ev", 9);
  std::vector<std::size_t> folds_seen;
  std::size_t calls = 0;
  const EvalReport r = leave_one_event_out(corpus, [&](const std::vector<Thread>& train, std::size_t fold) {
    folds_seen.push_back(fold);
    ++calls;
    std::set<std::string> train_ids;
    std::set<std::string> train_events;
    for (const Thread& t : train) {
      train_ids.insert(t.thread_id);
      train_events.insert(t.event);
    }
    EXPECT_EQ(train_events.size(), 8u);
    return Predictor([train_ids](const Thread& t) {
      EXPECT_FALSE(train_ids.contains(t.thread_id));
      return rule(t);
    });
  });
  EXPECT_EQ(r.protocol, "loeo");
  ASSERT_EQ(r.folds.size(), 9u);
  EXPECT_EQ(calls, 9u);
  EXPECT_EQ(folds_seen, (std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7, 8}));
  std::size_t tested = 0;
  double mean = 0.0;
  for (const FoldResult& f : r.folds) {
    EXPECT_EQ(f.train_size + f.test_size, corpus.size());
    tested += f.test_size;
    mean += f.metrics.macro_f1 / 9.0;
  }
  EXPECT_EQ(tested, corpus.size());
  EXPECT_NEAR(r.macro_f1, mean, 1e-12);
  EXPECT_EQ(r.metrics.total, corpus.size());
}

TEST(LeaveOneEventOut, TwoEventsAndRequestedFolds) {
  const auto corpus = testing::synthetic_corpus(20, 5, "ev", 2);
  auto train_fn = [](const std::vector<Thread>&, std::size_t) { return Predictor(rule); };
  EXPECT_EQ(leave_one_event_out(corpus, train_fn).folds.size(), 2u);

  const EvalReport r = leave_one_event_out(corpus, train_fn, {"ev1", "nonexistent"});
  ASSERT_EQ(r.folds.size(), 1u);
  EXPECT_EQ(r.folds[0].name, "ev1");
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_NE(r.warnings[0].find("nonexistent"), std::string::npos);

  EXPECT_THROW(leave_one_event_out(corpus, train_fn, {"nonexistent"}), DataError);
  EXPECT_THROW(leave_one_event_out(testing::synthetic_corpus(6, 5, "ev", 1), train_fn), DataError);
}

TEST(EarlyDetection, NinePointsAndFullHorizonEqualsStandard) {
  nn::Rng rng(6);
  std::vector<Thread> threads;
  for (int i = 0; i < 60; ++i) {
    threads.push_back(testing::random_thread(rng, "t" + std::to_string(i)));
    threads.back().veracity = veracity_from_index(rng.below(3));
  }
  const EvalReport early = early_detection_eval(rule, threads);
  ASSERT_EQ(early.curve.size(), 9u);
  EXPECT_EQ(early.curve.front().hours, 1.0);
  EXPECT_EQ(early.curve.back().hours, 24.0);
  const EvalReport full = evaluate_standard(rule, threads);
  EXPECT_EQ(early.curve.back().metrics.macro_f1, full.macro_f1);
  EXPECT_EQ(early.curve.back().metrics.confusion, full.metrics.confusion);
  for (std::size_t i = 1; i < early.curve.size(); ++i) {
    EXPECT_GE(early.curve[i].mean_replies, early.curve[i - 1].mean_replies);
  }
}

TEST(EarlyDetection, LateRepliesLeaveTheSourceOnly) {
  ModelConfig config;
  config.embedding_dim = 8;
  config.depth_levels = 4;
  const Model model(config, 3);
  const EmbeddingSource emb = EmbeddingSource::hashing(8);

  Thread t;
  t.thread_id = "late";
  t.source = {"src", std::nullopt, "claim text here", 0, std::nullopt, "twitter"};
  t.replies.push_back({"r1", "src", "no that is fake", 5 * 3600, Stance::kDeny, "twitter"});
  t.replies.push_back({"r2", "r1", "agreed", 6 * 3600, Stance::kSupport, "twitter"});
  Thread emptied = t;
  emptied.replies.clear();

  std::vector<Vector> seen;
  const Predictor predict = [&](const Thread& thread) {
    seen.push_back(forward_thread(thread, emb, model));
    return veracity_from_index(argmax(seen.back()));
  };
  const std::vector<double> checkpoints = {1.0, 24.0};
  const EvalReport r = early_detection_eval(predict, {t}, checkpoints);
  ASSERT_EQ(seen.size(), 2u);
  EXPECT_EQ(r.curve[0].mean_replies, 0.0);
  EXPECT_EQ(seen[0], forward_thread(emptied, emb, model));
  EXPECT_EQ(seen[1], forward_thread(t, emb, model));
}

TEST(EarlyDetection, CheckpointValidationAndExclusions) {
  nn::Rng rng(7);
  std::vector<Thread> threads = {testing::random_thread(rng, "a"), testing::random_thread(rng, "b")};
  EXPECT_THROW(early_detection_eval(rule, threads, std::vector<double>{4, 1}), DataError);
  EXPECT_THROW(early_detection_eval(rule, threads, std::vector<double>{1, 25}), DataError);
  EXPECT_THROW(early_detection_eval(rule, threads, std::vector<double>{}), DataError);

  threads[1].source.timestamp.reset();
  const EvalReport r = early_detection_eval(rule, threads);
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_NE(r.warnings[0].find("'b'"), std::string::npos);
  EXPECT_EQ(r.curve[0].threads, 1u);
  threads.pop_back();
  threads[0].source.timestamp.reset();
  EXPECT_THROW(early_detection_eval(rule, threads), DataError);
}

std::vector<Thread> on_platform(std::vector<Thread> threads, const std::string& platform) {
  for (Thread& t : threads) {
    t.thread_id = platform + "-" + t.thread_id;
    t.source.platform = platform;
  }
  return threads;
}

TEST(CrossPlatform, FourPairsWithDisjointSplits) {
  auto pool = on_platform(testing::synthetic_corpus(12, 8), "twitter");
  auto reddit = on_platform(testing::synthetic_corpus(9, 9), "reddit");
  pool.insert(pool.end(), reddit.begin(), reddit.end());

  std::vector<std::size_t> train_sizes;
  const auto reports = cross_platform_eval(pool, pool, [&](const std::vector<Thread>& train, std::size_t) {
    train_sizes.push_back(train.size());
    const std::string platform = train.front().platform();
    for (const Thread& t : train) EXPECT_EQ(t.platform(), platform);
    return Predictor(rule);
  });
  ASSERT_EQ(reports.size(), 4u);
  EXPECT_EQ(train_sizes, (std::vector<std::size_t>{12, 12, 9, 9}));
  EXPECT_EQ(reports[1].protocol, "crossplat:twitter->reddit");
  EXPECT_EQ(reports[1].metrics.total, 9u);
  EXPECT_EQ(reports[3].metrics.total, 12u);
}

TEST(CrossPlatform, EmptyPartitionNamesPlatform) {
  const auto pool = on_platform(testing::synthetic_corpus(6, 10), "twitter");
  auto train_fn = [](const std::vector<Thread>&, std::size_t) { return Predictor(rule); };
  try {
    cross_platform_eval(pool, pool, train_fn);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("reddit"), std::string::npos);
  }
}

TEST(Reports, JsonAndTableFiles) {
  testing::TempDir dir;
  const auto corpus = testing::synthetic_corpus(15, 11, "ev", 3);
  auto train_fn = [](const std::vector<Thread>&, std::size_t) { return Predictor(rule); };
  std::vector<EvalReport> reports = {leave_one_event_out(corpus, train_fn), early_detection_eval(rule, corpus)};
  write_report_json(reports, dir / "r.json");
  write_report_table(reports, dir / "r.tsv");

  const auto j = nlohmann::json::parse(testing::read_file(dir / "r.json"));
  ASSERT_EQ(j.size(), 2u);
  EXPECT_EQ(j[0]["protocol"], "loeo");
  EXPECT_EQ(j[0]["folds"].size(), 3u);
  EXPECT_EQ(j[1]["curve"].size(), 9u);
  EXPECT_EQ(j[1]["metrics"]["confusion"].size(), 3u);

  std::istringstream table(testing::read_file(dir / "r.tsv"));
  std::string line;
  std::size_t rows = 0;
  std::getline(table, line);
  EXPECT_EQ(line, "protocol\trow\tkey\tn\taccuracy\tmacro_f1\tf1_T\tf1_F\tf1_U");
  while (std::getline(table, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), '\t'), 8);
  }
  EXPECT_EQ(rows, 1u + 3u + 1u + 9u);
  EXPECT_THROW(write_report_json(reports, dir / "missing" / "r.json"), IoError);
}

}  // namespace
}  // namespace rumor
