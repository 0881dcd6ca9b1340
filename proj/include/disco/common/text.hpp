#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace disco::text {

enum class TokenClass {
  word,
  punct,     // any detached punctuation that is not one of the below
  ellipsis,  // "...", "…"
  dash,      // "—", "–", "--", stand-alone "-"
};

/// A token with its UTF-8 byte range in the source text.
struct Token {
  std::string text;
  std::size_t begin = 0;
  std::size_t end = 0;
  TokenClass cls = TokenClass::word;

  bool is_word() const noexcept { return cls == TokenClass::word; }
};

/// Whitespace split with punctuation detached as separate tokens.
///
/// Apostrophes inside words ("we'll", "we’ll") stay attached, as do
/// hyphens, periods and colons between alphanumerics ("5-mile", "2.5",
/// "6:30"). Runs of two or more periods become a single ellipsis token.
std::vector<Token> tokenize(std::string_view text);

/// Lowercase ASCII letters and fold the typographic apostrophe to "'".
std::string normalize(std::string_view word);

/// Words of `text` (punctuation dropped), normalized.
std::vector<std::string> words(std::string_view text);

/// Metric tokenization: every token (punctuation kept as its own token), normalized
/// when `lowercase` is set.
std::vector<std::string> metric_tokens(std::string_view text, bool lowercase = true);

std::string_view trim(std::string_view s);
bool is_blank(std::string_view s);

/// Number of Unicode scalar values in s[0, byte_offset).
std::size_t codepoint_offset(std::string_view s, std::size_t byte_offset);
/// Inverse of codepoint_offset; returns s.size() past the end.
std::size_t byte_offset(std::string_view s, std::size_t codepoint_offset);
std::size_t codepoint_length(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view separator);

/// Text split into pieces that concatenate back to the input exactly.
///
/// Each piece is one token together with the whitespace that precedes it;
/// whitespace after the last token forms a final piece of its own.
struct Pieces {
  std::vector<std::string> pieces;
  std::vector<TokenClass> classes;  // class of each piece's token; trailing whitespace is punct
  std::vector<std::size_t> offsets;  // byte offset of each piece

  std::size_t size() const noexcept { return pieces.size(); }
  bool is_word(std::size_t i) const noexcept { return classes[i] == TokenClass::word && !is_trailing(i); }
  bool is_trailing(std::size_t i) const noexcept { return i == trailing_index; }

  std::size_t trailing_index = static_cast<std::size_t>(-1);
};

Pieces split_pieces(std::string_view text);

/// Token text of a piece (its leading whitespace removed).
std::string_view piece_token(std::string_view piece);

}  // namespace disco::text
