#include "rumor/text_normalizer.hpp"

#include <fstream>

#include "json.hpp"
#include "rumor/error.hpp"

namespace rumor {
namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}
bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
bool is_alpha(char c) { return is_upper(c) || is_lower(c); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alnum(char c) { return is_alpha(c) || is_digit(c); }
bool is_word(char c) { return is_alnum(c) || c == '_'; }
bool is_scheme_char(char c) { return is_alnum(c) || c == '+' || c == '.' || c == '-'; }

std::size_t skip_non_space(std::string_view s, std::size_t i) {
  while (i < s.size() && !is_space(s[i])) ++i;
  return i;
}

bool starts_with_www(std::string_view s, std::size_t i) {
  if (s.size() - i < 4) return false;
  for (std::size_t k = 0; k < 3; ++k) {
    if (s[i + k] != 'w' && s[i + k] != 'W') return false;
  }
  return s[i + 3] == '.';
}

// Length of the URL starting at i (to the next whitespace), or 0. A URL
// starts at a letter not preceded by a letter or digit, with either a
// www. prefix or a scheme run followed by "://".
std::size_t url_at(std::string_view s, std::size_t i) {
  const bool boundary = i == 0 || !is_alnum(s[i - 1]);
  if (!boundary || !is_alpha(s[i])) return 0;
  if (starts_with_www(s, i)) return skip_non_space(s, i) - i;
  std::size_t j = i;
  while (j < s.size() && is_scheme_char(s[j])) ++j;
  if (s.substr(j, 3) != "://") return 0;
  return skip_non_space(s, i) - i;
}

std::string replace_urls(std::string_view s, const std::string& token) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    if (std::size_t n = url_at(s, i); n > 0) {
      out += token;
      i += n;
    } else {
      out += s[i++];
    }
  }
  return out;
}

std::string replace_mentions(std::string_view s, const std::string& token) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    if (s[i] == '@' && i + 1 < s.size() && is_word(s[i + 1])) {
      std::size_t j = i + 1;
      while (j < s.size() && is_word(s[j])) ++j;
      out += token;
      i = j;
    } else {
      out += s[i++];
    }
  }
  return out;
}

std::string replace_hashtags(std::string_view s, bool segment) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    if (s[i] == '#') {
      std::size_t j = i;
      while (j < s.size() && s[j] == '#') ++j;
      std::size_t k = j;
      while (k < s.size() && is_word(s[k])) ++k;
      if (k > j) {
        const std::string_view tag = s.substr(j, k - j);
        out += segment ? segment_hashtag(tag) : std::string(tag);
        i = k;
        continue;
      }
    }
    out += s[i++];
  }
  return out;
}

// Decodes one UTF-8 code point; returns its byte length (1 for invalid bytes).
std::size_t decode_utf8(std::string_view s, std::size_t i, char32_t* cp) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  std::size_t len = 1;
  char32_t c = b0;
  if (b0 >= 0xF0 && b0 < 0xF8) {
    len = 4;
    c = b0 & 0x07;
  } else if (b0 >= 0xE0) {
    len = 3;
    c = b0 & 0x0F;
  } else if (b0 >= 0xC0) {
    len = 2;
    c = b0 & 0x1F;
  }
  if (len == 1 || i + len > s.size()) {
    *cp = b0;
    return 1;
  }
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) {
      *cp = b0;
      return 1;
    }
    c = (c << 6) | (b & 0x3F);
  }
  *cp = c;
  return len;
}

// Code points that only occur as (parts of) emoji.
bool is_emoji_code_point(char32_t c) {
  return (c >= 0x1F000 && c <= 0x1FAFF) ||  // pictographs, flags, symbols
         (c >= 0x2600 && c <= 0x27BF) ||    // misc symbols, dingbats
         (c >= 0x2300 && c <= 0x23FF) ||    // misc technical
         (c >= 0x2B00 && c <= 0x2BFF) ||    // arrows, stars
         (c >= 0xE0020 && c <= 0xE007F) ||  // tag sequences
         c == 0xFE0F || c == 0xFE0E ||      // variation selectors
         c == 0x200D || c == 0x20E3;        // ZWJ, combining keycap
}

std::string replace_emoji(std::string_view s, const EmojiTable& table) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    const std::string* text = nullptr;
    if (std::size_t n = table.match(s.substr(i), &text); n > 0) {
      out += ' ';
      out += *text;
      out += ' ';
      i += n;
      continue;
    }
    char32_t cp = 0;
    const std::size_t len = decode_utf8(s, i, &cp);
    if (!is_emoji_code_point(cp)) out.append(s.substr(i, len));
    i += len;
  }
  return out;
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += c;
  }
  return out;
}

std::string normalize_once(std::string_view text, const NormalizationConfig& config) {
  std::string s = replace_urls(text, config.url_token);
  s = replace_mentions(s, config.mention_token);
  s = replace_hashtags(s, config.segment_hashtags);
  s = replace_emoji(s, config.emoji_table());
  return collapse_whitespace(s);
}

}  // namespace

void EmojiTable::add(std::string emoji, std::string text) {
  if (emoji.empty()) throw SchemaError("emoji table: empty emoji sequence");
  auto& slot = max_len_by_first_byte_[static_cast<unsigned char>(emoji[0])];
  slot = std::max(slot, emoji.size());
  entries_.insert_or_assign(std::move(emoji), std::move(text));
}

std::size_t EmojiTable::match(std::string_view s, const std::string** text) const {
  if (s.empty()) return 0;
  const std::size_t max_len = std::min(s.size(), max_len_by_first_byte_[static_cast<unsigned char>(s[0])]);
  for (std::size_t len = max_len; len > 0; --len) {
    if (auto it = entries_.find(std::string(s.substr(0, len))); it != entries_.end()) {
      *text = &it->second;
      return len;
    }
  }
  return 0;
}

EmojiTable EmojiTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open emoji table '" + path.string() + "'");
  EmojiTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError(where + ": " + e.what());
    }
    if (!rec.is_object() || !rec.contains("emoji") || !rec.contains("text") ||
        !rec["emoji"].is_string() || !rec["text"].is_string()) {
      throw SchemaError(where + ": expected {\"emoji\": str, \"text\": str}");
    }
    table.add(rec["emoji"].get<std::string>(), rec["text"].get<std::string>());
  }
  return table;
}

void NormalizationConfig::validate() const {
  for (const auto& [name, token] : {std::pair{"url_token", &url_token}, std::pair{"mention_token", &mention_token}}) {
    if (token->empty()) throw ConfigError(std::string(name) + " must not be empty");
    for (char c : *token) {
      if (is_space(c)) throw ConfigError(std::string(name) + " must not contain whitespace");
    }
    if (replace_urls(*token, "") != *token || replace_mentions(*token, "") != *token ||
        replace_hashtags(*token, false) != *token) {
      throw ConfigError(std::string(name) + " must not contain a URL, mention or hashtag");
    }
  }
}

std::string segment_hashtag(std::string_view tag) {
  std::string out;
  out.reserve(tag.size() * 2);
  for (std::size_t i = 0; i < tag.size(); ++i) {
    if (i > 0) {
      const char prev = tag[i - 1];
      const char cur = tag[i];
      const bool next_lower = i + 1 < tag.size() && is_lower(tag[i + 1]);
      if ((is_lower(prev) && is_upper(cur)) || (is_alpha(prev) && is_digit(cur)) ||
          (is_digit(prev) && is_alpha(cur)) || (is_upper(prev) && is_upper(cur) && next_lower)) {
        out += ' ';
      }
    }
    out += tag[i];
  }
  return out;
}

std::string normalize_text(std::string_view text, const NormalizationConfig& config) {
  // A single pass can expose a new match (e.g. "#www.x.org" leaves a bare
  // URL behind), so iterate to the fixpoint. Every pass that changes the
  // text removes at least one '#', '@', URL or emoji, so this terminates.
  std::string cur = normalize_once(text, config);
  for (;;) {
    std::string next = normalize_once(cur, config);
    if (next == cur) return cur;
    cur = std::move(next);
  }
}

}  // namespace rumor
