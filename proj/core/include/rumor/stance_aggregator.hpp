#pragma once

// Stance-wise compression of a reply thread: replies are grouped by stance
// and averaged, then concatenated after the source claim vector in the fixed
// slot order [source, S, D, Q, C].

#include <array>
#include <span>
#include <vector>

#include "rumor/embedding_store.hpp"
#include "rumor/nn/layers.hpp"
#include "rumor/thread.hpp"

namespace rumor {

struct InjectedReply {
  Vector vector;  // stance-injected, length D + 4
  Stance stance;
};

using StanceSlots = std::array<Vector, kNumStances>;

// Per-stance mean of the reply vectors (input order, then divide); a stance
// with no replies yields a zero vector of length `width`. Throws
// ShapeMismatchError when a reply vector is not `width` long.
StanceSlots aggregate_by_stance(std::span<const InjectedReply> replies, std::size_t width);

// Gradient of the aggregation: each reply receives its stance slot's
// gradient divided by that stance's reply count.
std::vector<Vector> aggregate_by_stance_backward(std::span<const Stance> stances, const StanceSlots& d_slots);

// source ++ S ++ D ++ Q ++ C. Throws ShapeMismatchError on unequal lengths.
Vector assemble_thread_vector(std::span<const double> source, const StanceSlots& slots);

// h(t) = Dropout(ReLU(LayerNorm(W1 e'(t) + b1))).
Vector semantic_ffl(std::span<const double> thread_vector, const nn::ParameterSet& params,
                    const nn::FeedForwardParams& ids, const nn::ForwardMode& mode,
                    nn::FeedForwardCache* cache = nullptr);

}  // namespace rumor
