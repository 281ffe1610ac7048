#include "allserp/html_tokenizer.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <cstdlib>

namespace allserp::html {
namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f';
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

// Elements whose content is raw text up to the matching close tag.
bool is_raw_text(std::string_view name) {
  return name == "script" || name == "style" || name == "noscript" || name == "template" ||
         name == "textarea" || name == "title";
}

std::size_t find_ci(std::string_view hay, std::string_view needle, std::size_t from) {
  if (needle.empty()) return from;
  for (std::size_t i = from; i + needle.size() <= hay.size(); ++i) {
    bool ok = true;
    for (std::size_t j = 0; j < needle.size(); ++j) {
      if (std::tolower(static_cast<unsigned char>(hay[i + j])) !=
          std::tolower(static_cast<unsigned char>(needle[j]))) {
        ok = false;
        break;
      }
    }
    if (ok) return i;
  }
  return std::string_view::npos;
}

}  // namespace

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_void_element(std::string_view name) {
  static constexpr std::array<std::string_view, 14> kVoid = {
      "area", "base", "br",   "col",   "embed", "hr",    "img",
      "input", "link", "meta", "param", "source", "track", "wbr"};
  return std::find(kVoid.begin(), kVoid.end(), name) != kVoid.end();
}

std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out += s[i];
      continue;
    }
    const std::size_t semi = s.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 10) {
      out += '&';
      continue;
    }
    const std::string_view ent = s.substr(i + 1, semi - i - 1);
    bool handled = true;
    if (ent == "amp") out += '&';
    else if (ent == "lt") out += '<';
    else if (ent == "gt") out += '>';
    else if (ent == "quot") out += '"';
    else if (ent == "apos") out += '\'';
    else if (ent == "nbsp") out += ' ';
    else if (ent.size() > 1 && ent[0] == '#') {
      const bool hex = ent[1] == 'x' || ent[1] == 'X';
      const std::string digits(ent.substr(hex ? 2 : 1));
      char* end = nullptr;
      const unsigned long cp = std::strtoul(digits.c_str(), &end, hex ? 16 : 10);
      if (digits.empty() || *end != '\0') handled = false;
      else append_utf8(out, static_cast<std::uint32_t>(std::min(cp, 0x110000ul)));
    } else {
      handled = false;
    }
    if (handled) {
      i = semi;
    } else {
      out += '&';
    }
  }
  return out;
}

std::string sanitize_utf8(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    int len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) { out += static_cast<char>(c); ++i; continue; }
    if ((c & 0xE0) == 0xC0) { len = 2; cp = c & 0x1F; }
    else if ((c & 0xF0) == 0xE0) { len = 3; cp = c & 0x0F; }
    else if ((c & 0xF8) == 0xF0) { len = 4; cp = c & 0x07; }
    bool ok = len > 0 && i + len <= s.size();
    for (int k = 1; ok && k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) ok = false;
      else cp = (cp << 6) | (cc & 0x3F);
    }
    if (ok) {
      const std::uint32_t min_cp = len == 2 ? 0x80 : len == 3 ? 0x800 : 0x10000;
      ok = cp >= min_cp && cp <= 0x10FFFF && !(cp >= 0xD800 && cp <= 0xDFFF);
    }
    if (ok) {
      out.append(s.substr(i, len));
      i += len;
    } else {
      out += "\xEF\xBF\xBD";
      ++i;
    }
  }
  return out;
}

std::string normalize_space(std::string_view s) {
  std::string out;
  bool pending = false;
  for (char c : s) {
    if (is_space(c)) {
      pending = !out.empty();
      continue;
    }
    if (pending) out += ' ';
    pending = false;
    out += c;
  }
  return out;
}

std::vector<Token> tokenize(std::string_view html) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  const std::size_t n = html.size();

  auto emit_text = [&](std::string_view raw) {
    if (raw.empty()) return;
    Token t;
    t.kind = Token::Kind::text;
    t.text = decode_entities(raw);
    tokens.push_back(std::move(t));
  };

  while (i < n) {
    const std::size_t lt = html.find('<', i);
    if (lt == std::string_view::npos) {
      emit_text(html.substr(i));
      break;
    }
    emit_text(html.substr(i, lt - i));
    i = lt;

    if (html.compare(i, 4, "<!--") == 0) {
      const std::size_t end = html.find("-->", i + 4);
      i = end == std::string_view::npos ? n : end + 3;
      continue;
    }
    if (i + 1 < n && (html[i + 1] == '!' || html[i + 1] == '?')) {
      const std::size_t end = html.find('>', i);
      i = end == std::string_view::npos ? n : end + 1;
      continue;
    }

    const bool closing = i + 1 < n && html[i + 1] == '/';
    std::size_t p = i + (closing ? 2 : 1);
    if (p >= n || !std::isalpha(static_cast<unsigned char>(html[p]))) {
      // Stray '<' is text.
      emit_text(html.substr(i, 1));
      ++i;
      continue;
    }
    std::size_t name_end = p;
    while (name_end < n && !is_space(html[name_end]) && html[name_end] != '>' &&
           html[name_end] != '/') {
      ++name_end;
    }
    Token tok;
    tok.kind = closing ? Token::Kind::end_tag : Token::Kind::start_tag;
    tok.name = ascii_lower(html.substr(p, name_end - p));
    p = name_end;

    // Attributes.
    while (p < n && html[p] != '>') {
      while (p < n && (is_space(html[p]) || html[p] == '/')) {
        if (html[p] == '/' && p + 1 < n && html[p + 1] == '>') tok.self_closing = true;
        ++p;
      }
      if (p >= n || html[p] == '>') break;
      std::size_t k = p;
      while (k < n && !is_space(html[k]) && html[k] != '=' && html[k] != '>' && html[k] != '/') ++k;
      std::string key = ascii_lower(html.substr(p, k - p));
      p = k;
      while (p < n && is_space(html[p])) ++p;
      std::string value;
      if (p < n && html[p] == '=') {
        ++p;
        while (p < n && is_space(html[p])) ++p;
        if (p < n && (html[p] == '"' || html[p] == '\'')) {
          const char q = html[p];
          const std::size_t close = html.find(q, p + 1);
          const std::size_t stop = close == std::string_view::npos ? n : close;
          value = decode_entities(html.substr(p + 1, stop - p - 1));
          p = close == std::string_view::npos ? n : close + 1;
        } else {
          std::size_t v = p;
          while (v < n && !is_space(html[v]) && html[v] != '>') ++v;
          value = decode_entities(html.substr(p, v - p));
          p = v;
        }
      }
      if (key.empty()) {
        ++p;
        continue;
      }
      tok.attrs.emplace_back(std::move(key), std::move(value));
    }
    i = p < n ? p + 1 : n;

    const bool raw = !closing && !tok.self_closing && is_raw_text(tok.name);
    const std::string raw_name = tok.name;
    tokens.push_back(std::move(tok));
    if (raw) {
      const std::string close = "</" + raw_name;
      const std::size_t end = find_ci(html, close, i);
      if (end == std::string_view::npos) {
        i = n;
      } else {
        const std::size_t gt = html.find('>', end);
        i = gt == std::string_view::npos ? n : gt + 1;
      }
      Token end_tok;
      end_tok.kind = Token::Kind::end_tag;
      end_tok.name = raw_name;
      tokens.push_back(std::move(end_tok));
    }
  }
  return tokens;
}

}  // namespace allserp::html
