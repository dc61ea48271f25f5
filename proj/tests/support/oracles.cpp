#include "oracles.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <fstream>
#include <iterator>
#include <map>
#include <unistd.h>

namespace rumor::testing {

std::array<Vector, kNumStances> oracle_stance_means(std::span<const InjectedReply> replies, std::size_t width) {
  std::array<std::vector<const Vector*>, kNumStances> groups;
  for (const InjectedReply& r : replies) groups[static_cast<std::size_t>(r.stance)].push_back(&r.vector);
  std::array<Vector, kNumStances> out;
  for (std::size_t s = 0; s < kNumStances; ++s) {
    out[s].assign(width, 0.0);
    if (groups[s].empty()) continue;
    for (std::size_t k = 0; k < width; ++k) {
      long double sum = 0.0L;
      for (const Vector* v : groups[s]) sum += (*v)[k];
      out[s][k] = static_cast<double>(sum / static_cast<long double>(groups[s].size()));
    }
  }
  return out;
}

DepthMap oracle_depths(const Thread& thread) {
  std::map<std::string, std::vector<std::string>> children;
  for (const Post& r : thread.replies) children[*r.parent_id].push_back(r.post_id);
  DepthMap depth;
  std::deque<std::string> queue = {thread.source.post_id};
  depth[thread.source.post_id] = 0;
  while (!queue.empty()) {
    const std::string id = queue.front();
    queue.pop_front();
    for (const std::string& child : children[id]) {
      depth[child] = depth[id] + 1;
      queue.push_back(child);
    }
  }
  return depth;
}

std::array<double, kNumStances> oracle_stance_distribution(std::span<const Stance> stances) {
  std::array<long double, kNumStances> counts{};
  for (Stance s : stances) counts[static_cast<std::size_t>(s)] += 1.0L;
  std::array<double, kNumStances> out{};
  if (stances.empty()) return out;
  for (std::size_t s = 0; s < kNumStances; ++s) {
    out[s] = static_cast<double>(counts[s] / static_cast<long double>(stances.size()));
  }
  return out;
}

std::array<Vector, kNumStances> oracle_depth_averages(std::span<const std::size_t> depths,
                                                      std::span<const Stance> stances, std::size_t levels) {
  std::array<std::vector<long double>, kNumStances> sums;
  std::array<std::size_t, kNumStances> counts{};
  for (auto& s : sums) s.assign(levels, 0.0L);
  for (std::size_t i = 0; i < depths.size(); ++i) {
    const auto s = static_cast<std::size_t>(stances[i]);
    const std::size_t level = depths[i] >= levels ? levels - 1 : depths[i];
    sums[s][level] += 1.0L;
    ++counts[s];
  }
  std::array<Vector, kNumStances> out;
  for (std::size_t s = 0; s < kNumStances; ++s) {
    out[s].assign(levels, 0.0);
    if (counts[s] == 0) continue;
    for (std::size_t l = 0; l < levels; ++l) out[s][l] = static_cast<double>(sums[s][l] / counts[s]);
  }
  return out;
}

std::vector<long double> oracle_softmax(std::span<const double> logits) {
  std::vector<long double> out;
  long double total = 0.0L;
  for (double x : logits) {
    out.push_back(std::exp(static_cast<long double>(x)));
    total += out.back();
  }
  for (long double& v : out) v /= total;
  return out;
}

OracleScores oracle_scores(std::span<const Veracity> gold, std::span<const Veracity> pred) {
  OracleScores out;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    ++out.confusion[static_cast<std::size_t>(gold[i])][static_cast<std::size_t>(pred[i])];
    if (gold[i] == pred[i]) ++correct;
  }
  double f1_sum = 0.0;
  for (Veracity c : kAllVeracities) {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      if (pred[i] == c && gold[i] == c) ++tp;
      if (pred[i] == c && gold[i] != c) ++fp;
      if (pred[i] != c && gold[i] == c) ++fn;
    }
    const double precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    const double f1 = precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
    f1_sum += f1;
  }
  out.macro_f1 = f1_sum / 3.0;
  out.accuracy = gold.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(gold.size());
  return out;
}

GradCheck check_gradient(const std::function<double()>& loss, std::span<double> values,
                         std::span<const double> analytic, double step, double floor) {
  GradCheck out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double saved = values[i];
    values[i] = saved + step;
    const double plus = loss();
    values[i] = saved - step;
    const double minus = loss();
    values[i] = saved;
    const double numeric = (plus - minus) / (2.0 * step);
    const double abs_err = std::abs(numeric - analytic[i]);
    const double rel = abs_err / std::max({std::abs(numeric), std::abs(analytic[i]), floor});
    if (rel > out.max_rel_error) {
      out.max_rel_error = rel;
      out.worst_index = i;
    }
    out.max_abs_error = std::max(out.max_abs_error, abs_err);
    ++out.checked;
  }
  return out;
}

void merge(GradCheck& into, const GradCheck& other) {
  if (other.max_rel_error > into.max_rel_error) {
    into.max_rel_error = other.max_rel_error;
    into.worst_index = other.worst_index;
  }
  into.max_abs_error = std::max(into.max_abs_error, other.max_abs_error);
  into.checked += other.checked;
}

namespace {

const std::vector<std::string>& vocabulary() {
  static const std::vector<std::string> words = [] {
    std::vector<std::string> w;
    for (const char* stem : {"claim", "report", "police", "video", "fake", "true", "source", "breaking", "confirm",
                             "deny", "why", "photo", "news", "official", "rumor", "hoax", "update", "witness"}) {
      for (int k = 0; k < 12; ++k) w.push_back(std::string(stem) + std::to_string(k));
    }
    return w;
  }();
  return words;
}

std::string random_text(nn::Rng& rng, std::size_t min_words, std::size_t max_words) {
  const auto& words = vocabulary();
  const std::size_t n = min_words + rng.below(max_words - min_words + 1);
  std::string text;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) text += ' ';
    text += words[rng.below(words.size())];
  }
  return text;
}

}  // namespace

Thread random_thread(nn::Rng& rng, const std::string& id, const RandomThreadOptions& options) {
  Thread t;
  t.thread_id = id;
  t.event = "event" + std::to_string(rng.below(4));
  t.veracity = veracity_from_index(rng.below(kNumClasses));
  t.source.post_id = id + "_0";
  t.source.text = random_text(rng, 3, 10);
  t.source.stance = Stance::kSupport;
  const std::int64_t t0 = 1'600'000'000 + static_cast<std::int64_t>(rng.below(1'000'000));
  if (options.timestamps) t.source.timestamp = t0;

  const std::size_t n = rng.below(options.max_replies + 1);
  const auto horizon = static_cast<std::int64_t>(options.horizon_hours * 3600.0);
  std::vector<std::int64_t> times;
  for (std::size_t i = 0; i < n; ++i) times.push_back(static_cast<std::int64_t>(rng.below(horizon + 1)));
  std::sort(times.begin(), times.end());
  for (std::size_t i = 0; i < n; ++i) {
    Post p;
    p.post_id = id + "_" + std::to_string(i + 1);
    const std::size_t parent = rng.below(i + 1);
    p.parent_id = parent == 0 ? t.source.post_id : id + "_" + std::to_string(parent);
    p.text = random_text(rng, 1, 8);
    p.stance = stance_from_index(rng.below(kNumStances));
    if (options.timestamps) p.timestamp = t0 + times[i];
    t.replies.push_back(std::move(p));
  }
  return t;
}

Veracity plurality_veracity(const Thread& thread) {
  std::array<std::size_t, kNumStances> counts{};
  for (const Post& r : thread.replies) ++counts[static_cast<std::size_t>(*r.stance)];
  auto strict_max = [&](Stance s) {
    for (Stance o : kAllStances) {
      if (o != s && counts[static_cast<std::size_t>(o)] >= counts[static_cast<std::size_t>(s)]) return false;
    }
    return true;
  };
  if (strict_max(Stance::kDeny)) return Veracity::kFalse;
  if (strict_max(Stance::kSupport)) return Veracity::kTrue;
  return Veracity::kUnverified;
}

std::vector<Thread> synthetic_corpus(std::size_t n, std::uint64_t seed, const std::string& event_prefix,
                                     std::size_t events) {
  nn::Rng rng(seed);
  std::vector<Thread> out;
  for (std::size_t i = 0; i < n; ++i) {
    const Veracity target = veracity_from_index(i % kNumClasses);
    Thread t;
    do {
      RandomThreadOptions options;
      options.max_replies = 12;
      t = random_thread(rng, event_prefix + "-syn" + std::to_string(i), options);
      // Bias the stances toward the target so every class is reachable.
      for (Post& r : t.replies) {
        const double u = rng.uniform();
        if (target == Veracity::kFalse && u < 0.5) r.stance = Stance::kDeny;
        if (target == Veracity::kTrue && u < 0.5) r.stance = Stance::kSupport;
        if (target == Veracity::kUnverified && u < 0.5) r.stance = u < 0.25 ? Stance::kQuery : Stance::kComment;
      }
    } while (plurality_veracity(t) != target);
    t.veracity = target;
    t.event = event_prefix + std::to_string(i % events);
    out.push_back(std::move(t));
  }
  return out;
}

Vector random_vector(nn::Rng& rng, std::size_t n, double lo, double hi) {
  Vector v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

TempDir::TempDir() {
  static std::atomic<unsigned> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("rumorverify_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  f << content;
}

}  // namespace rumor::testing
