#include "rumor/evaluation.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "json.hpp"
#include "rumor/error.hpp"

namespace rumor {
namespace {

using nlohmann::json;

double safe_div(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

std::vector<Veracity> predict_all(const Predictor& predict, const std::vector<Thread>& threads,
                                  std::vector<Veracity>* gold) {
  std::vector<Veracity> pred;
  pred.reserve(threads.size());
  for (const Thread& t : threads) {
    pred.push_back(predict(t));
    if (gold) gold->push_back(t.veracity);
  }
  return pred;
}

json metrics_to_json(const Metrics& m) {
  json j;
  j["total"] = m.total;
  j["accuracy"] = m.accuracy;
  j["macro_f1"] = m.macro_f1;
  json per_class = json::object();
  for (Veracity v : kAllVeracities) {
    const ClassScores& s = m.per_class[index_of(v)];
    per_class[std::string(1, veracity_code(v))] = {
        {"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}, {"support", s.support}};
  }
  j["per_class"] = std::move(per_class);
  json confusion = json::array();
  for (const auto& row : m.confusion) confusion.push_back(row);
  j["confusion"] = std::move(confusion);
  return j;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

Metrics compute_metrics(std::span<const Veracity> gold, std::span<const Veracity> pred) {
  if (gold.size() != pred.size()) {
    throw DataError("metric inputs differ in length (" + std::to_string(gold.size()) + " gold vs " +
                    std::to_string(pred.size()) + " predicted)");
  }
  if (gold.empty()) throw DataError("metrics need at least one prediction");

  Metrics m;
  m.total = gold.size();
  for (std::size_t i = 0; i < gold.size(); ++i) ++m.confusion[index_of(gold[i])][index_of(pred[i])];

  std::size_t correct = 0;
  double f1_sum = 0.0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    std::size_t predicted = 0;
    std::size_t actual = 0;
    for (std::size_t k = 0; k < kNumClasses; ++k) {
      predicted += m.confusion[k][c];
      actual += m.confusion[c][k];
    }
    const auto tp = static_cast<double>(m.confusion[c][c]);
    correct += m.confusion[c][c];
    ClassScores& s = m.per_class[c];
    s.support = actual;
    s.precision = safe_div(tp, static_cast<double>(predicted));
    s.recall = safe_div(tp, static_cast<double>(actual));
    s.f1 = safe_div(2.0 * s.precision * s.recall, s.precision + s.recall);
    f1_sum += s.f1;
  }
  m.macro_f1 = f1_sum / static_cast<double>(kNumClasses);
  m.accuracy = static_cast<double>(correct) / static_cast<double>(m.total);
  return m;
}

double macro_f1(std::span<const Veracity> gold, std::span<const Veracity> pred) {
  return compute_metrics(gold, pred).macro_f1;
}

double accuracy(std::span<const Veracity> gold, std::span<const Veracity> pred) {
  return compute_metrics(gold, pred).accuracy;
}

EvalReport evaluate_standard(const Predictor& predict, const std::vector<Thread>& test) {
  std::vector<Veracity> gold;
  const std::vector<Veracity> pred = predict_all(predict, test, &gold);
  EvalReport report;
  report.protocol = "standard";
  report.metrics = compute_metrics(gold, pred);
  report.macro_f1 = report.metrics.macro_f1;
  report.accuracy = report.metrics.accuracy;
  return report;
}

EvalReport leave_one_event_out(const std::vector<Thread>& threads, const TrainFn& train,
                               const std::vector<std::string>& events) {
  std::set<std::string> present;
  for (const Thread& t : threads) present.insert(t.event);
  if (present.size() < 2) {
    throw DataError("leave-one-event-out needs at least 2 distinct events, found " + std::to_string(present.size()));
  }
  std::vector<std::string> folds = events;
  if (folds.empty()) folds.assign(present.begin(), present.end());

  EvalReport report;
  report.protocol = "loeo";
  std::vector<Veracity> all_gold;
  std::vector<Veracity> all_pred;
  std::size_t fold_index = 0;
  for (const std::string& event : folds) {
    std::vector<Thread> train_set;
    std::vector<Thread> test_set;
    for (const Thread& t : threads) (t.event == event ? test_set : train_set).push_back(t);
    if (test_set.empty()) {
      report.warnings.push_back("event '" + event + "' has no threads; fold skipped");
      continue;
    }
    const Predictor predict = train(train_set, fold_index++);
    std::vector<Veracity> gold;
    const std::vector<Veracity> pred = predict_all(predict, test_set, &gold);
    FoldResult fold{event, train_set.size(), test_set.size(), compute_metrics(gold, pred)};
    report.macro_f1 += fold.metrics.macro_f1;
    report.accuracy += fold.metrics.accuracy;
    all_gold.insert(all_gold.end(), gold.begin(), gold.end());
    all_pred.insert(all_pred.end(), pred.begin(), pred.end());
    report.folds.push_back(std::move(fold));
  }
  if (report.folds.empty()) throw DataError("leave-one-event-out: no fold had any threads");
  report.macro_f1 /= static_cast<double>(report.folds.size());
  report.accuracy /= static_cast<double>(report.folds.size());
  report.metrics = compute_metrics(all_gold, all_pred);
  return report;
}

EvalReport early_detection_eval(const Predictor& predict, const std::vector<Thread>& threads,
                                std::span<const double> checkpoints) {
  if (checkpoints.empty()) throw DataError("early detection needs at least one checkpoint");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (!(checkpoints[i] >= 0.0 && checkpoints[i] <= 24.0)) {
      throw DataError("early-detection checkpoints must lie in [0, 24] hours");
    }
    if (i > 0 && checkpoints[i] < checkpoints[i - 1]) {
      throw DataError("early-detection checkpoints must be sorted ascending");
    }
  }

  EvalReport report;
  report.protocol = "early";
  std::vector<const Thread*> usable;
  for (const Thread& t : threads) {
    if (t.source.timestamp) {
      usable.push_back(&t);
    } else {
      report.warnings.push_back("thread '" + t.thread_id + "' excluded: source post has no timestamp");
    }
  }
  if (usable.empty()) throw DataError("early detection: no thread has a timestamped source");

  for (double hours : checkpoints) {
    std::vector<Veracity> gold;
    std::vector<Veracity> pred;
    std::size_t replies = 0;
    for (const Thread* t : usable) {
      const Thread sliced = time_slice(*t, hours);
      replies += sliced.replies.size();
      gold.push_back(t->veracity);
      pred.push_back(predict(sliced));
    }
    CurvePoint point;
    point.hours = hours;
    point.threads = usable.size();
    point.mean_replies = static_cast<double>(replies) / static_cast<double>(usable.size());
    point.metrics = compute_metrics(gold, pred);
    report.curve.push_back(std::move(point));
  }
  report.metrics = report.curve.back().metrics;
  report.macro_f1 = report.metrics.macro_f1;
  report.accuracy = report.metrics.accuracy;
  return report;
}

std::vector<EvalReport> cross_platform_eval(const std::vector<Thread>& train_pool,
                                            const std::vector<Thread>& test_pool, const TrainFn& train,
                                            const std::vector<PlatformPair>& pairs) {
  auto partition = [](const std::vector<Thread>& pool, const std::string& platform, const char* role) {
    std::vector<Thread> out;
    for (const Thread& t : pool) {
      if (t.platform() == platform) out.push_back(t);
    }
    if (out.empty()) {
      throw DataError(std::string("cross-platform: no ") + role + " threads for platform '" + platform + "'");
    }
    return out;
  };

  std::vector<EvalReport> reports;
  std::size_t fold = 0;
  for (const auto& [train_platform, test_platform] : pairs) {
    const std::vector<Thread> train_set = partition(train_pool, train_platform, "training");
    const std::vector<Thread> test_set = partition(test_pool, test_platform, "test");
    const Predictor predict = train(train_set, fold++);
    EvalReport report = evaluate_standard(predict, test_set);
    report.protocol = "crossplat:" + train_platform + "->" + test_platform;
    report.folds.push_back({train_platform + "->" + test_platform, train_set.size(), test_set.size(), report.metrics});
    reports.push_back(std::move(report));
  }
  return reports;
}

void write_report_json(const std::vector<EvalReport>& reports, const std::filesystem::path& path) {
  json out = json::array();
  for (const EvalReport& r : reports) {
    json j;
    j["protocol"] = r.protocol;
    j["macro_f1"] = r.macro_f1;
    j["accuracy"] = r.accuracy;
    j["metrics"] = metrics_to_json(r.metrics);
    json folds = json::array();
    for (const FoldResult& f : r.folds) {
      folds.push_back({{"name", f.name},
                       {"train_size", f.train_size},
                       {"test_size", f.test_size},
                       {"metrics", metrics_to_json(f.metrics)}});
    }
    j["folds"] = std::move(folds);
    json curve = json::array();
    for (const CurvePoint& p : r.curve) {
      curve.push_back({{"hours", p.hours},
                       {"threads", p.threads},
                       {"mean_replies", p.mean_replies},
                       {"metrics", metrics_to_json(p.metrics)}});
    }
    j["curve"] = std::move(curve);
    j["warnings"] = r.warnings;
    out.push_back(std::move(j));
  }
  std::ofstream f(path);
  if (!f) throw IoError("cannot write report '" + path.string() + "'");
  f << out.dump(2) << '\n';
}

void write_report_table(const std::vector<EvalReport>& reports, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write report table '" + path.string() + "'");
  f << "protocol\trow\tkey\tn\taccuracy\tmacro_f1\tf1_T\tf1_F\tf1_U\n";
  auto row = [&](const std::string& protocol, const char* kind, const std::string& key, const Metrics& m,
                 double acc, double mf1) {
    f << protocol << '\t' << kind << '\t' << key << '\t' << m.total << '\t' << fmt(acc) << '\t' << fmt(mf1);
    for (const ClassScores& s : m.per_class) f << '\t' << fmt(s.f1);
    f << '\n';
  };
  for (const EvalReport& r : reports) {
    row(r.protocol, "overall", "-", r.metrics, r.accuracy, r.macro_f1);
    for (const FoldResult& fold : r.folds) {
      row(r.protocol, "fold", fold.name, fold.metrics, fold.metrics.accuracy, fold.metrics.macro_f1);
    }
    for (const CurvePoint& p : r.curve) {
      char key[32];
      std::snprintf(key, sizeof key, "%g", p.hours);
      row(r.protocol, "checkpoint", key, p.metrics, p.metrics.accuracy, p.metrics.macro_f1);
    }
  }
  if (!f) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace rumor
