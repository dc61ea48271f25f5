#include "rumor/embedding_store.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"
#include "rumor/error.hpp"

namespace rumor {
namespace {

using nlohmann::json;

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

EmbeddingHeader parse_header(const json& h, const std::string& where) {
  if (!h.is_object()) throw SchemaError(where + ": header must be an object");
  EmbeddingHeader header;
  auto need = [&](const char* key) -> const json& {
    auto it = h.find(key);
    if (it == h.end()) throw SchemaError(where + ": header missing '" + key + "'");
    return *it;
  };
  const json& dim = need("dim");
  if (!dim.is_number_integer() || dim.get<std::int64_t>() < 1) {
    throw SchemaError(where + ": header 'dim' must be a positive integer");
  }
  header.dim = dim.get<std::size_t>();
  const json& pooling = need("pooling");
  if (!pooling.is_string() || pooling.get<std::string>() != "mean") {
    throw SchemaError(where + ": header 'pooling' must be \"mean\"");
  }
  const json& seq = need("max_seq_len");
  if (!seq.is_number_integer() || seq.get<std::int64_t>() < 1) {
    throw SchemaError(where + ": header 'max_seq_len' must be a positive integer");
  }
  header.max_seq_len = seq.get<std::size_t>();
  const json& model = need("source_model");
  if (!model.is_string()) throw SchemaError(where + ": header 'source_model' must be a string");
  header.source_model = model.get<std::string>();
  return header;
}

}  // namespace

EmbeddingStore::EmbeddingStore(EmbeddingHeader header) : header_(std::move(header)) {
  if (header_.dim < 1) throw SchemaError("embedding dim must be >= 1");
}

EmbeddingStore EmbeddingStore::open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embedding file '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw SchemaError(path.string() + ": empty embedding file (no header)");

  json parsed;
  try {
    parsed = json::parse(line);
  } catch (const json::parse_error& e) {
    throw SchemaError(path.string() + ":1: " + e.what());
  }
  EmbeddingStore store(parse_header(parsed, path.string() + ":1"));

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    try {
      parsed = json::parse(line);
    } catch (const json::parse_error& e) {
      throw SchemaError(where + ": " + e.what());
    }
    if (!parsed.is_object() || !parsed.contains("post_id") || !parsed["post_id"].is_string() ||
        !parsed.contains("vec") || !parsed["vec"].is_array()) {
      throw SchemaError(where + ": expected {\"post_id\": str, \"vec\": [float...]}");
    }
    std::string id = parsed["post_id"].get<std::string>();
    const json& arr = parsed["vec"];
    if (arr.size() != store.dim()) {
      throw EmbeddingError(where + ": record '" + id + "' has " + std::to_string(arr.size()) +
                           " components, header dim is " + std::to_string(store.dim()));
    }
    Vector vec;
    vec.reserve(arr.size());
    for (const json& x : arr) {
      if (!x.is_number()) throw SchemaError(where + ": record '" + id + "' has a non-numeric component");
      vec.push_back(x.get<double>());
    }
    try {
      store.add(std::move(id), std::move(vec));
    } catch (const EmbeddingError& e) {
      throw EmbeddingError(where + ": " + e.what());
    }
  }
  return store;
}

void EmbeddingStore::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write embedding file '" + path.string() + "'");
  json h;
  h["dim"] = header_.dim;
  h["pooling"] = header_.pooling;
  h["max_seq_len"] = header_.max_seq_len;
  h["source_model"] = header_.source_model;
  out << h.dump() << '\n';
  char buf[32];
  for (const std::string& id : order_) {
    out << "{\"post_id\":" << json(id).dump() << ",\"vec\":[";
    const Vector& v = vectors_.at(id);
    for (std::size_t i = 0; i < v.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", v[i]);
      if (i) out << ',';
      out << buf;
    }
    out << "]}\n";
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

const Vector& EmbeddingStore::get(const std::string& post_id) const {
  auto it = vectors_.find(post_id);
  if (it == vectors_.end()) throw EmbeddingError("missing embedding for post '" + post_id + "'");
  return it->second;
}

void EmbeddingStore::add(std::string post_id, Vector vec) {
  if (vec.size() != header_.dim) {
    throw EmbeddingError("record '" + post_id + "' has " + std::to_string(vec.size()) +
                         " components, expected " + std::to_string(header_.dim));
  }
  for (double x : vec) {
    if (!std::isfinite(x)) throw EmbeddingError("record '" + post_id + "' has a non-finite component");
  }
  if (vectors_.contains(post_id)) throw EmbeddingError("duplicate post_id '" + post_id + "'");
  order_.push_back(post_id);
  vectors_.emplace(std::move(post_id), std::move(vec));
}

std::uint64_t stable_hash64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

Vector hash_embed(std::string_view text, std::size_t dim) {
  if (dim < 1) throw EmbeddingError("hash_embed: dim must be >= 1");
  Vector v(dim, 0.0);
  std::size_t tokens = 0;
  for (std::size_t i = 0; i < text.size();) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) {
      const std::uint64_t h = stable_hash64(text.substr(i, j - i));
      v[h % dim] += (h >> 63) ? -1.0 : 1.0;
      ++tokens;
    }
    i = j;
  }
  if (tokens > 0) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(tokens));
    for (double& x : v) x *= scale;
  }
  return v;
}

Vector inject_stance(std::span<const double> embedding, Stance stance) {
  Vector out(embedding.begin(), embedding.end());
  out.resize(embedding.size() + kNumStances, 0.0);
  out[embedding.size() + index_of(stance)] = 1.0;
  return out;
}

EmbeddingSource::EmbeddingSource(const EmbeddingStore& store, bool fallback)
    : store_(&store), fallback_(fallback), dim_(store.dim()) {}

EmbeddingSource EmbeddingSource::hashing(std::size_t dim) {
  if (dim < 1) throw ConfigError("hash embedding dim must be >= 1");
  return EmbeddingSource(nullptr, true, dim);
}

Vector EmbeddingSource::lookup(const Post& post) const {
  if (store_ && store_->contains(post.post_id)) return store_->get(post.post_id);
  if (fallback_) return hash_embed(post.text, dim_);
  throw EmbeddingError("missing embedding for post '" + post.post_id + "'");
}

}  // namespace rumor
