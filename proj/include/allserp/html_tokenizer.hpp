#pragma once

// Forgiving HTML tokenizer. Never throws on malformed markup: unterminated
// tags or comments simply end the stream.

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace allserp::html {

struct Token {
  enum class Kind { start_tag, end_tag, text };
  Kind kind = Kind::text;
  std::string name;  // lowercased tag name
  std::vector<std::pair<std::string, std::string>> attrs;  // names lowercased
  bool self_closing = false;
  std::string text;  // entity-decoded, for text tokens

  const std::string* attr(std::string_view key) const {
    for (const auto& [k, v] : attrs) {
      if (k == key) return &v;
    }
    return nullptr;
  }
};

std::vector<Token> tokenize(std::string_view html);

std::string decode_entities(std::string_view s);

bool is_void_element(std::string_view name);

/// Replaces invalid UTF-8 sequences with U+FFFD.
std::string sanitize_utf8(std::string_view s);

/// Collapses whitespace runs to one space and trims both ends.
std::string normalize_space(std::string_view s);

std::string ascii_lower(std::string_view s);

}  // namespace allserp::html
