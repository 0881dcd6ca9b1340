#include "disco/common/text.hpp"

#include <algorithm>

namespace disco::text {
namespace {

struct CodePoint {
  char32_t value;
  std::size_t begin;
  std::size_t length;
};

std::vector<CodePoint> decode(std::string_view s) {
  std::vector<CodePoint> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto lead = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    char32_t cp = lead;
    if (lead >= 0xF0 && lead < 0xF8) {
      len = 4;
      cp = lead & 0x07;
    } else if (lead >= 0xE0) {
      len = 3;
      cp = lead & 0x0F;
    } else if (lead >= 0xC0) {
      len = 2;
      cp = lead & 0x1F;
    }
    if (len > 1) {
      if (i + len > s.size()) {
        len = 1;
        cp = lead;
      } else {
        for (std::size_t k = 1; k < len; ++k) {
          cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
        }
      }
    }
    out.push_back({cp, i, len});
    i += len;
  }
  return out;
}

bool is_space(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' || c == U'\v' ||
         c == 0x00A0;
}

bool is_unicode_punct(char32_t c) {
  switch (c) {
    case 0x2014:  // em dash
    case 0x2013:  // en dash
    case 0x2026:  // horizontal ellipsis
    case 0x201C:
    case 0x201D:
    case 0x2018:
    case 0x2019:
    case 0x00AB:
    case 0x00BB:
    case 0x00BF:
    case 0x00A1:
      return true;
    default:
      return false;
  }
}

bool is_alnum(char32_t c) {
  if (c < 0x80) {
    return (c >= U'0' && c <= U'9') || (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z') ||
           c == U'_';
  }
  return !is_space(c) && !is_unicode_punct(c);
}

bool is_connector(char32_t c) {
  return c == U'\'' || c == 0x2019 || c == U'-' || c == U'.' || c == U':' || c == U'/' ||
         c == U',';
}

TokenClass classify_punct(const std::vector<CodePoint>& cps, std::size_t from, std::size_t to) {
  const char32_t c = cps[from].value;
  if (c == 0x2026 || (c == U'.' && to - from >= 2)) return TokenClass::ellipsis;
  if (c == 0x2014 || c == 0x2013 || c == U'-') return TokenClass::dash;
  return TokenClass::punct;
}

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  const auto cps = decode(text);
  std::vector<Token> tokens;
  std::size_t i = 0;
  auto emit = [&](std::size_t from, std::size_t to, TokenClass cls) {
    const std::size_t b = cps[from].begin;
    const std::size_t e = cps[to - 1].begin + cps[to - 1].length;
    tokens.push_back({std::string(text.substr(b, e - b)), b, e, cls});
  };
  while (i < cps.size()) {
    const char32_t c = cps[i].value;
    if (is_space(c)) {
      ++i;
      continue;
    }
    if (is_alnum(c)) {
      std::size_t j = i + 1;
      while (j < cps.size()) {
        if (is_alnum(cps[j].value)) {
          ++j;
        } else if (is_connector(cps[j].value) && j + 1 < cps.size() &&
                   is_alnum(cps[j + 1].value)) {
          // "." and "," only join digits ("2.5", "1,000"); the others join any word chars.
          const bool numeric_only = cps[j].value == U'.' || cps[j].value == U',';
          const auto digit = [](char32_t d) { return d >= U'0' && d <= U'9'; };
          if (numeric_only && !(digit(cps[j - 1].value) && digit(cps[j + 1].value))) break;
          j += 2;
        } else {
          break;
        }
      }
      emit(i, j, TokenClass::word);
      i = j;
      continue;
    }
    // Punctuation: runs of '.' or '-' collapse into one token.
    std::size_t j = i + 1;
    if (c == U'.' || c == U'-') {
      while (j < cps.size() && cps[j].value == c) ++j;
      if (c == U'.' && j - i == 1) {
        emit(i, j, TokenClass::punct);
        i = j;
        continue;
      }
    }
    emit(i, j, classify_punct(cps, i, j));
    i = j;
  }
  return tokens;
}

std::string normalize(std::string_view word) {
  std::string out;
  out.reserve(word.size());
  for (std::size_t i = 0; i < word.size(); ++i) {
    // U+2019 is E2 80 99.
    if (i + 2 < word.size() && static_cast<unsigned char>(word[i]) == 0xE2 &&
        static_cast<unsigned char>(word[i + 1]) == 0x80 &&
        static_cast<unsigned char>(word[i + 2]) == 0x99) {
      out.push_back('\'');
      i += 2;
      continue;
    }
    const char ch = word[i];
    out.push_back(ch >= 'A' && ch <= 'Z' ? static_cast<char>(ch - 'A' + 'a') : ch);
  }
  return out;
}

std::vector<std::string> words(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& tok : tokenize(text)) {
    if (tok.is_word()) out.push_back(normalize(tok.text));
  }
  return out;
}

std::vector<std::string> metric_tokens(std::string_view text, bool lowercase) {
  std::vector<std::string> out;
  for (const auto& tok : tokenize(text)) {
    out.push_back(lowercase ? normalize(tok.text) : tok.text);
  }
  return out;
}

std::string_view trim(std::string_view s) {
  const auto ws = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
  };
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && ws(s[b])) ++b;
  while (e > b && ws(s[e - 1])) --e;
  return s.substr(b, e - b);
}

bool is_blank(std::string_view s) { return trim(s).empty(); }

std::size_t codepoint_offset(std::string_view s, std::size_t byte_off) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < byte_off && i < s.size(); ++i) {
    if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) ++n;
  }
  return n;
}

std::size_t byte_offset(std::string_view s, std::size_t cp_off) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) {
      if (n == cp_off) return i;
      ++n;
    }
  }
  return s.size();
}

std::size_t codepoint_length(std::string_view s) { return codepoint_offset(s, s.size()); }

std::string join(const std::vector<std::string>& parts, std::string_view separator) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += separator;
    out += parts[i];
  }
  return out;
}

Pieces split_pieces(std::string_view text) {
  Pieces p;
  std::size_t prev_end = 0;
  for (const auto& tok : tokenize(text)) {
    p.pieces.emplace_back(text.substr(prev_end, tok.end - prev_end));
    p.classes.push_back(tok.cls);
    p.offsets.push_back(prev_end);
    prev_end = tok.end;
  }
  if (prev_end < text.size()) {
    p.trailing_index = p.pieces.size();
    p.pieces.emplace_back(text.substr(prev_end));
    p.classes.push_back(TokenClass::punct);
    p.offsets.push_back(prev_end);
  }
  return p;
}

std::string_view piece_token(std::string_view piece) {
  std::size_t i = 0;
  while (i < piece.size() && (piece[i] == ' ' || piece[i] == '\t' || piece[i] == '\n' ||
                              piece[i] == '\r' || piece[i] == '\f' || piece[i] == '\v')) {
    ++i;
  }
  return piece.substr(i);
}

}  // namespace disco::text
