#include "rumor/thread.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "rumor/error.hpp"

namespace rumor {
namespace {

using nlohmann::json;

constexpr std::array<char, kNumStances> kStanceCodes = {'S', 'D', 'Q', 'C'};
constexpr std::array<char, kNumClasses> kVeracityCodes = {'T', 'F', 'U'};

[[noreturn]] void schema_fail(const std::string& thread_id, const std::string& what) {
  throw SchemaError("thread '" + thread_id + "': " + what);
}

const json& require(const json& obj, const char* key, const std::string& thread_id) {
  auto it = obj.find(key);
  if (it == obj.end()) schema_fail(thread_id, std::string("missing field '") + key + "'");
  return *it;
}

std::string require_string(const json& obj, const char* key, const std::string& thread_id) {
  const json& v = require(obj, key, thread_id);
  if (!v.is_string()) schema_fail(thread_id, std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

Post parse_post(const json& p, const std::string& thread_id, const std::string& platform) {
  if (!p.is_object()) schema_fail(thread_id, "post entries must be objects");
  Post post;
  post.post_id = require_string(p, "post_id", thread_id);
  if (post.post_id.empty()) schema_fail(thread_id, "empty post_id");
  const std::string where = "post '" + post.post_id + "' ";

  const json& parent = require(p, "parent_id", thread_id);
  if (parent.is_string()) {
    post.parent_id = parent.get<std::string>();
  } else if (!parent.is_null()) {
    schema_fail(thread_id, where + "field 'parent_id' must be a string or null");
  }

  const json& text = require(p, "text", thread_id);
  if (!text.is_string()) schema_fail(thread_id, where + "field 'text' must be a string");
  post.text = text.get<std::string>();

  if (auto it = p.find("timestamp"); it != p.end() && !it->is_null()) {
    if (!it->is_number_integer()) schema_fail(thread_id, where + "field 'timestamp' must be an integer or null");
    post.timestamp = it->get<std::int64_t>();
  }
  if (auto it = p.find("stance"); it != p.end() && !it->is_null()) {
    if (!it->is_string()) schema_fail(thread_id, where + "field 'stance' must be a string or null");
    post.stance = parse_stance(it->get<std::string>());
    if (!post.stance) schema_fail(thread_id, where + "field 'stance' must be one of S, D, Q, C");
  }
  post.platform = platform;
  return post;
}

json post_to_json(const Post& post) {
  json p;
  p["post_id"] = post.post_id;
  p["parent_id"] = post.parent_id ? json(*post.parent_id) : json(nullptr);
  p["text"] = post.text;
  p["timestamp"] = post.timestamp ? json(*post.timestamp) : json(nullptr);
  p["stance"] = post.stance ? json(std::string(1, stance_code(*post.stance))) : json(nullptr);
  return p;
}

void sort_chronologically(std::vector<Post>& replies) {
  std::stable_sort(replies.begin(), replies.end(), [](const Post& a, const Post& b) {
    if (!a.timestamp) return false;
    if (!b.timestamp) return true;
    return *a.timestamp < *b.timestamp;
  });
}

}  // namespace

char stance_code(Stance s) { return kStanceCodes.at(index_of(s)); }
char veracity_code(Veracity v) { return kVeracityCodes.at(index_of(v)); }

std::optional<Stance> parse_stance(std::string_view code) {
  if (code.size() != 1) return std::nullopt;
  for (std::size_t i = 0; i < kNumStances; ++i) {
    if (kStanceCodes[i] == code[0]) return stance_from_index(i);
  }
  return std::nullopt;
}

std::optional<Veracity> parse_veracity(std::string_view code) {
  if (code.size() != 1) return std::nullopt;
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    if (kVeracityCodes[i] == code[0]) return veracity_from_index(i);
  }
  return std::nullopt;
}

Stance stance_from_index(std::size_t i) {
  if (i >= kNumStances) throw std::out_of_range("stance index out of range");
  return static_cast<Stance>(i);
}

Veracity veracity_from_index(std::size_t i) {
  if (i >= kNumClasses) throw std::out_of_range("veracity index out of range");
  return static_cast<Veracity>(i);
}

void validate_thread(const Thread& thread) {
  const std::string& tid = thread.thread_id;
  if (tid.empty()) throw SchemaError("thread with empty thread_id");
  if (thread.source.parent_id) schema_fail(tid, "source post must not have a parent_id");
  if (thread.source.post_id.empty()) schema_fail(tid, "empty post_id");

  std::unordered_map<std::string, const Post*> by_id;
  by_id.emplace(thread.source.post_id, &thread.source);
  for (const Post& r : thread.replies) {
    if (r.post_id.empty()) schema_fail(tid, "empty post_id");
    if (!by_id.emplace(r.post_id, &r).second) {
      schema_fail(tid, "duplicate post_id '" + r.post_id + "'");
    }
  }
  for (const Post& r : thread.replies) {
    if (!r.parent_id) schema_fail(tid, "more than one post without parent_id ('" + r.post_id + "')");
    if (!by_id.contains(*r.parent_id)) {
      schema_fail(tid, "dangling parent '" + *r.parent_id + "' of post '" + r.post_id + "'");
    }
  }
  // Every reply must reach the source by following parents.
  std::unordered_set<std::string> rooted{thread.source.post_id};
  for (const Post& r : thread.replies) {
    std::vector<const Post*> chain;
    std::unordered_set<std::string> seen;
    const Post* cur = &r;
    while (!rooted.contains(cur->post_id)) {
      if (!seen.insert(cur->post_id).second) {
        schema_fail(tid, "reply cycle through post '" + cur->post_id + "'");
      }
      chain.push_back(cur);
      cur = by_id.at(*cur->parent_id);
    }
    for (const Post* p : chain) rooted.insert(p->post_id);
  }
  std::optional<std::int64_t> last;
  for (const Post& r : thread.replies) {
    if (!r.timestamp) continue;
    if (last && *r.timestamp < *last) schema_fail(tid, "replies are not in chronological order");
    last = r.timestamp;
  }
}

Thread parse_thread_record(std::string_view line, const LoadOptions& options) {
  json rec;
  try {
    rec = json::parse(line);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("malformed thread record: ") + e.what());
  }
  if (!rec.is_object()) throw SchemaError("thread record must be an object");

  Thread t;
  {
    auto it = rec.find("thread_id");
    if (it == rec.end() || !it->is_string()) throw SchemaError("thread record without string 'thread_id'");
    t.thread_id = it->get<std::string>();
  }
  const std::string& tid = t.thread_id;
  t.event = require_string(rec, "event", tid);

  std::string platform = "twitter";
  if (auto it = rec.find("platform"); it != rec.end() && !it->is_null()) {
    if (!it->is_string()) schema_fail(tid, "field 'platform' must be a string");
    platform = it->get<std::string>();
  }

  const json& ver = require(rec, "veracity", tid);
  if (ver.is_null()) schema_fail(tid, "missing veracity label");
  if (!ver.is_string()) schema_fail(tid, "field 'veracity' must be a string");
  auto v = parse_veracity(ver.get<std::string>());
  if (!v) schema_fail(tid, "field 'veracity' must be one of T, F, U");
  t.veracity = *v;

  const json& posts = require(rec, "posts", tid);
  if (!posts.is_array()) schema_fail(tid, "field 'posts' must be an array");
  bool have_source = false;
  for (const json& p : posts) {
    Post post = parse_post(p, tid, platform);
    if (!post.parent_id) {
      if (have_source) schema_fail(tid, "more than one post without parent_id");
      have_source = true;
      t.source = std::move(post);
      continue;
    }
    if (!post.stance) {
      if (options.missing_stance == MissingStancePolicy::kComment) {
        post.stance = Stance::kComment;
      } else if (options.missing_stance == MissingStancePolicy::kReject) {
        schema_fail(tid, "post '" + post.post_id + "' has no stance label");
      }
    }
    t.replies.push_back(std::move(post));
  }
  if (!have_source) schema_fail(tid, "no source post (parent_id null)");
  sort_chronologically(t.replies);
  validate_thread(t);
  return t;
}

std::string format_thread_record(const Thread& thread) {
  json rec;
  rec["thread_id"] = thread.thread_id;
  rec["event"] = thread.event;
  rec["platform"] = thread.platform();
  rec["veracity"] = std::string(1, veracity_code(thread.veracity));
  json posts = json::array();
  posts.push_back(post_to_json(thread.source));
  for (const Post& r : thread.replies) posts.push_back(post_to_json(r));
  rec["posts"] = std::move(posts);
  return rec.dump();
}

std::vector<Thread> load_dataset(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open thread file '" + path.string() + "'");
  std::vector<Thread> threads;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      threads.push_back(parse_thread_record(line, options));
    } catch (const SchemaError& e) {
      throw SchemaError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!ids.insert(threads.back().thread_id).second) {
      throw SchemaError(path.string() + ":" + std::to_string(line_no) + ": duplicate thread_id '" +
                        threads.back().thread_id + "'");
    }
  }
  return threads;
}

void save_dataset(const std::filesystem::path& path, const std::vector<Thread>& threads) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write thread file '" + path.string() + "'");
  for (const Thread& t : threads) out << format_thread_record(t) << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

DepthMap compute_depths(const Thread& thread) {
  std::unordered_map<std::string, const std::string*> parent_of;
  for (const Post& r : thread.replies) parent_of.emplace(r.post_id, &*r.parent_id);

  DepthMap depths;
  depths.emplace(thread.source.post_id, 0);
  std::vector<const std::string*> pending;
  for (const Post& r : thread.replies) {
    const std::string* cur = &r.post_id;
    while (!depths.contains(*cur)) {
      pending.push_back(cur);
      cur = parent_of.at(*cur);
    }
    std::size_t d = depths.at(*cur);
    while (!pending.empty()) {
      depths.emplace(*pending.back(), ++d);
      pending.pop_back();
    }
  }
  return depths;
}

std::vector<std::size_t> reply_depths(const Thread& thread) {
  const DepthMap depths = compute_depths(thread);
  std::vector<std::size_t> out;
  out.reserve(thread.replies.size());
  for (const Post& r : thread.replies) out.push_back(depths.at(r.post_id));
  return out;
}

Thread time_slice(const Thread& thread, double hours) {
  if (!thread.source.timestamp) {
    throw DataError("thread '" + thread.thread_id + "': source post has no timestamp");
  }
  const double window = hours * 3600.0;
  const std::int64_t t0 = *thread.source.timestamp;

  std::unordered_map<std::string, const Post*> by_id;
  by_id.emplace(thread.source.post_id, &thread.source);
  for (const Post& r : thread.replies) by_id.emplace(r.post_id, &r);

  // kept[id]: in window and every ancestor kept.
  std::unordered_map<std::string, bool> kept;
  kept.emplace(thread.source.post_id, true);
  auto in_window = [&](const Post& p) {
    return p.timestamp && static_cast<double>(*p.timestamp - t0) <= window;
  };
  auto resolve = [&](const Post& start) {
    std::vector<const Post*> chain;
    const Post* cur = &start;
    while (!kept.contains(cur->post_id)) {
      chain.push_back(cur);
      cur = by_id.at(*cur->parent_id);
    }
    bool ok = kept.at(cur->post_id);
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      ok = ok && in_window(**it);
      kept.emplace((*it)->post_id, ok);
    }
  };

  Thread out;
  out.thread_id = thread.thread_id;
  out.source = thread.source;
  out.veracity = thread.veracity;
  out.event = thread.event;
  for (const Post& r : thread.replies) {
    resolve(r);
    if (kept.at(r.post_id)) out.replies.push_back(r);
  }
  return out;
}

}  // namespace rumor
