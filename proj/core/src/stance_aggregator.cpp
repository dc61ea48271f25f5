#include "rumor/stance_aggregator.hpp"

#include "rumor/error.hpp"

namespace rumor {

StanceSlots aggregate_by_stance(std::span<const InjectedReply> replies, std::size_t width) {
  StanceSlots slots;
  std::array<std::size_t, kNumStances> counts{};
  for (Vector& s : slots) s.assign(width, 0.0);
  for (const InjectedReply& r : replies) {
    if (r.vector.size() != width) {
      throw ShapeMismatchError("reply vector has length " + std::to_string(r.vector.size()) + ", expected " +
                               std::to_string(width));
    }
    Vector& slot = slots[index_of(r.stance)];
    for (std::size_t i = 0; i < width; ++i) slot[i] += r.vector[i];
    ++counts[index_of(r.stance)];
  }
  for (std::size_t s = 0; s < kNumStances; ++s) {
    if (counts[s] == 0) continue;
    const double n = static_cast<double>(counts[s]);
    for (double& x : slots[s]) x /= n;
  }
  return slots;
}

std::vector<Vector> aggregate_by_stance_backward(std::span<const Stance> stances, const StanceSlots& d_slots) {
  std::array<std::size_t, kNumStances> counts{};
  for (Stance s : stances) ++counts[index_of(s)];
  std::vector<Vector> grads;
  grads.reserve(stances.size());
  for (Stance s : stances) {
    const Vector& d = d_slots[index_of(s)];
    const double n = static_cast<double>(counts[index_of(s)]);
    Vector g(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) g[i] = d[i] / n;
    grads.push_back(std::move(g));
  }
  return grads;
}

Vector assemble_thread_vector(std::span<const double> source, const StanceSlots& slots) {
  const std::size_t width = source.size();
  Vector out;
  out.reserve(width * (kNumStances + 1));
  out.insert(out.end(), source.begin(), source.end());
  for (const Vector& s : slots) {
    if (s.size() != width) {
      throw ShapeMismatchError("stance slot has length " + std::to_string(s.size()) + ", source has " +
                               std::to_string(width));
    }
    out.insert(out.end(), s.begin(), s.end());
  }
  return out;
}

Vector semantic_ffl(std::span<const double> thread_vector, const nn::ParameterSet& params,
                    const nn::FeedForwardParams& ids, const nn::ForwardMode& mode, nn::FeedForwardCache* cache) {
  const std::size_t expected = params[ids.weight].cols;
  if (thread_vector.size() != expected) {
    throw ShapeMismatchError("thread vector has length " + std::to_string(thread_vector.size()) +
                             ", semantic layer expects " + std::to_string(expected));
  }
  return nn::feed_forward(params, ids, thread_vector, mode, cache);
}

}  // namespace rumor
