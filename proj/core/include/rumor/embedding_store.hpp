#pragma once

// Pooled post embeddings keyed by post_id, the deterministic hash embedder
// used when no pretrained-model vectors are available, and stance injection.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rumor/thread.hpp"

namespace rumor {

using Vector = std::vector<double>;

struct EmbeddingHeader {
  std::size_t dim = 0;
  std::string pooling = "mean";
  std::size_t max_seq_len = 20;
  std::string source_model;
};

class EmbeddingStore {
 public:
  explicit EmbeddingStore(EmbeddingHeader header);

  // Line 1: header object; every further line {"post_id": str, "vec": [...]}.
  static EmbeddingStore open(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  const EmbeddingHeader& header() const { return header_; }
  std::size_t dim() const { return header_.dim; }
  std::size_t size() const { return vectors_.size(); }
  bool contains(const std::string& post_id) const { return vectors_.contains(post_id); }

  // Throws EmbeddingError naming the post when absent.
  const Vector& get(const std::string& post_id) const;

  // Throws EmbeddingError on a wrong length, non-finite component or
  // duplicate id.
  void add(std::string post_id, Vector vec);

 private:
  EmbeddingHeader header_;
  std::unordered_map<std::string, Vector> vectors_;
  std::vector<std::string> order_;
};

// 64-bit FNV-1a.
std::uint64_t stable_hash64(std::string_view s);

// Signed feature hashing over whitespace tokens, scaled by 1/sqrt(#tokens).
Vector hash_embed(std::string_view text, std::size_t dim);

// e ++ one_hot(s) over [S, D, Q, C].
Vector inject_stance(std::span<const double> embedding, Stance stance);

// Resolves a post to its vector: the store when it has the post, otherwise
// the hash embedder if `fallback` is set, otherwise an EmbeddingError.
class EmbeddingSource {
 public:
  // Store-backed, optionally with hash fallback for uncovered posts.
  explicit EmbeddingSource(const EmbeddingStore& store, bool fallback = false);
  // Hash embedder only.
  static EmbeddingSource hashing(std::size_t dim);

  std::size_t dim() const { return dim_; }
  Vector lookup(const Post& post) const;

 private:
  EmbeddingSource(const EmbeddingStore* store, bool fallback, std::size_t dim)
      : store_(store), fallback_(fallback), dim_(dim) {}

  const EmbeddingStore* store_;
  bool fallback_;
  std::size_t dim_;
};

}  // namespace rumor
