#pragma once

// Conversation-thread data model: a source claim, its reply tree, per-post
// stance labels and the thread-level veracity label.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace rumor {

// Index order is part of every on-disk and in-memory encoding: S=0 D=1 Q=2 C=3.
enum class Stance : std::uint8_t { kSupport = 0, kDeny = 1, kQuery = 2, kComment = 3 };
inline constexpr std::size_t kNumStances = 4;
inline constexpr std::array<Stance, kNumStances> kAllStances = {
    Stance::kSupport, Stance::kDeny, Stance::kQuery, Stance::kComment};

// Index order T=0 F=1 U=2.
enum class Veracity : std::uint8_t { kTrue = 0, kFalse = 1, kUnverified = 2 };
inline constexpr std::size_t kNumClasses = 3;
inline constexpr std::array<Veracity, kNumClasses> kAllVeracities = {
    Veracity::kTrue, Veracity::kFalse, Veracity::kUnverified};

inline constexpr std::size_t index_of(Stance s) { return static_cast<std::size_t>(s); }
inline constexpr std::size_t index_of(Veracity v) { return static_cast<std::size_t>(v); }

char stance_code(Stance s);
char veracity_code(Veracity v);
std::optional<Stance> parse_stance(std::string_view code);
std::optional<Veracity> parse_veracity(std::string_view code);
Stance stance_from_index(std::size_t i);
Veracity veracity_from_index(std::size_t i);

struct Post {
  std::string post_id;
  std::optional<std::string> parent_id;  // absent for the source claim
  std::string text;
  std::optional<std::int64_t> timestamp;  // seconds since epoch
  std::optional<Stance> stance;
  std::string platform = "twitter";

  bool operator==(const Post&) const = default;
};

struct Thread {
  std::string thread_id;
  Post source;
  std::vector<Post> replies;
  Veracity veracity = Veracity::kUnverified;
  std::string event;

  const std::string& platform() const { return source.platform; }

  bool operator==(const Thread&) const = default;
};

// post_id -> reply hops from the source (source = 0).
using DepthMap = std::unordered_map<std::string, std::size_t>;

// What to do with a reply that has no stance label: fail, label it C, or
// keep it unlabeled (for tools that only rewrite text).
enum class MissingStancePolicy { kReject, kComment, kKeep };

struct LoadOptions {
  MissingStancePolicy missing_stance = MissingStancePolicy::kReject;
};

// Throws SchemaError naming the thread and offending field if the thread is
// not a well-formed reply tree.
void validate_thread(const Thread& thread);

// One record of the normalized thread file. Replies are ordered
// chronologically (stable; replies without a timestamp go last).
Thread parse_thread_record(std::string_view line, const LoadOptions& options = {});
std::string format_thread_record(const Thread& thread);

std::vector<Thread> load_dataset(const std::filesystem::path& path,
                                 const LoadOptions& options = {});
void save_dataset(const std::filesystem::path& path, const std::vector<Thread>& threads);

DepthMap compute_depths(const Thread& thread);

// Depth of every reply, aligned with thread.replies.
std::vector<std::size_t> reply_depths(const Thread& thread);

// Keeps the replies that arrived within `hours` of the source and whose
// ancestors are all kept. Replies without a timestamp are never kept.
Thread time_slice(const Thread& thread, double hours);

}  // namespace rumor
