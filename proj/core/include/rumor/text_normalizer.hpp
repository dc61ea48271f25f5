#pragma once

// Post-text normalization applied before embedding extraction: URLs and
// @-mentions become placeholder tokens, hashtags are split into words, and
// emoji are replaced by textual descriptions.

#include <array>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>

namespace rumor {

// Emoji sequence -> description (":grinning face:" style).
class EmojiTable {
 public:
  // Table generated from the `emoji` package and compiled into the library.
  static const EmojiTable& builtin();
  // Record-per-line file of {"emoji": str, "text": str}.
  static EmojiTable load(const std::filesystem::path& path);

  void add(std::string emoji, std::string text);

  // Length in bytes of the longest entry that prefixes `s`, or 0. On a match
  // `*text` points at the description.
  std::size_t match(std::string_view s, const std::string** text) const;

  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<std::string, std::string> entries_;
  std::array<std::size_t, 256> max_len_by_first_byte_{};
};

struct NormalizationConfig {
  std::string url_token = "$url$";
  std::string mention_token = "$mention$";
  std::shared_ptr<const EmojiTable> emoji;  // null -> EmojiTable::builtin()
  bool segment_hashtags = true;

  // Placeholder tokens must be non-empty, whitespace-free, and must not
  // themselves look like a URL, mention or hashtag.
  void validate() const;
  const EmojiTable& emoji_table() const { return emoji ? *emoji : EmojiTable::builtin(); }
};

// Inserts single spaces at lower->upper and letter<->digit transitions, and
// before the last capital of an uppercase run that is followed by lowercase:
// "ABCDef2go" -> "ABC Def 2 go".
std::string segment_hashtag(std::string_view tag);

// URLs -> url_token, mentions -> mention_token, #tags -> segmented words,
// emoji -> " description "; unknown emoji are dropped; whitespace collapsed
// and trimmed. Idempotent.
std::string normalize_text(std::string_view text, const NormalizationConfig& config = {});

}  // namespace rumor
