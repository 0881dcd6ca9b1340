// Porter suffix-stripping stemmer (the original five-step rule set).

#include <array>
#include <utility>

#include "disco/metrics/metrics.hpp"

namespace disco::metrics {
namespace {

using Rule = std::pair<std::string_view, std::string_view>;

bool is_consonant(std::string_view s, std::size_t i) {
  switch (s[i]) {
    case 'a':
    case 'e':
    case 'i':
    case 'o':
    case 'u':
      return false;
    case 'y':
      return i == 0 || !is_consonant(s, i - 1);
    default:
      return true;
  }
}

/// m in the [C](VC)^m[V] decomposition.
int measure(std::string_view s) {
  int m = 0;
  bool prev_vowel = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const bool c = is_consonant(s, i);
    if (c && prev_vowel) ++m;
    prev_vowel = !c;
  }
  return m;
}

bool has_vowel(std::string_view s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!is_consonant(s, i)) return true;
  }
  return false;
}

bool ends_double_consonant(std::string_view s) {
  const std::size_t n = s.size();
  return n >= 2 && s[n - 1] == s[n - 2] && is_consonant(s, n - 1);
}

/// consonant-vowel-consonant ending, the last consonant not w, x or y.
bool ends_cvc(std::string_view s) {
  const std::size_t n = s.size();
  if (n < 3) return false;
  if (!is_consonant(s, n - 1) || is_consonant(s, n - 2) || !is_consonant(s, n - 3)) return false;
  const char c = s[n - 1];
  return c != 'w' && c != 'x' && c != 'y';
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::string_view stem_of(std::string_view s, std::string_view suffix) {
  return s.substr(0, s.size() - suffix.size());
}

void step1a(std::string& w) {
  if (ends_with(w, "sses") || ends_with(w, "ies")) {
    w.resize(w.size() - 2);
  } else if (ends_with(w, "ss")) {
    // unchanged
  } else if (ends_with(w, "s")) {
    w.pop_back();
  }
}

void step1b(std::string& w) {
  if (ends_with(w, "eed")) {
    if (measure(stem_of(w, "eed")) > 0) w.pop_back();
    return;
  }
  std::string_view suffix;
  if (ends_with(w, "ed")) {
    suffix = "ed";
  } else if (ends_with(w, "ing")) {
    suffix = "ing";
  } else {
    return;
  }
  if (!has_vowel(stem_of(w, suffix))) return;
  w.resize(w.size() - suffix.size());
  if (ends_with(w, "at") || ends_with(w, "bl") || ends_with(w, "iz")) {
    w += 'e';
  } else if (ends_double_consonant(w) && w.back() != 'l' && w.back() != 's' && w.back() != 'z') {
    w.pop_back();
  } else if (measure(w) == 1 && ends_cvc(w)) {
    w += 'e';
  }
}

void step1c(std::string& w) {
  if (ends_with(w, "y") && has_vowel(stem_of(w, "y"))) w.back() = 'i';
}

/// First rule whose suffix matches decides; it fires only if the stem's measure exceeds min_m.
template <std::size_t N>
void apply_rules(std::string& w, const std::array<Rule, N>& rules, int min_m) {
  for (const auto& [suffix, replacement] : rules) {
    if (!ends_with(w, suffix)) continue;
    const std::string_view stem = stem_of(w, suffix);
    if (measure(stem) > min_m) w = std::string(stem) + std::string(replacement);
    return;
  }
}

void step2(std::string& w) {
  static constexpr std::array<Rule, 20> rules = {{
      {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"},   {"anci", "ance"},
      {"izer", "ize"},    {"abli", "able"},   {"alli", "al"},     {"entli", "ent"},
      {"eli", "e"},       {"ousli", "ous"},   {"ization", "ize"}, {"ation", "ate"},
      {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"}, {"fulness", "ful"},
      {"ousness", "ous"}, {"aliti", "al"},    {"iviti", "ive"},   {"biliti", "ble"},
  }};
  apply_rules(w, rules, 0);
}

void step3(std::string& w) {
  static constexpr std::array<Rule, 7> rules = {{
      {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"},
      {"ical", "ic"},  {"ful", ""},   {"ness", ""},
  }};
  apply_rules(w, rules, 0);
}

void step4(std::string& w) {
  static constexpr std::array<std::string_view, 19> suffixes = {
      "al",    "ance", "ence", "er",  "ic", "able", "ible", "ant", "ement", "ment",
      "ent",   "ion",  "ou",   "ism", "ate", "iti", "ous",  "ive", "ize",
  };
  // Longest matching suffix decides.
  std::string_view best;
  for (const auto suffix : suffixes) {
    if (ends_with(w, suffix) && suffix.size() > best.size()) best = suffix;
  }
  if (best.empty()) return;
  const std::string_view stem = stem_of(w, best);
  if (best == "ion" && (stem.empty() || (stem.back() != 's' && stem.back() != 't'))) return;
  if (measure(stem) > 1) w.resize(stem.size());
}

void step5(std::string& w) {
  if (ends_with(w, "e")) {
    const std::string_view stem = stem_of(w, "e");
    const int m = measure(stem);
    if (m > 1 || (m == 1 && !ends_cvc(stem))) w.pop_back();
  }
  if (measure(w) > 1 && ends_double_consonant(w) && w.back() == 'l') w.pop_back();
}

}  // namespace

std::string porter_stem(std::string_view word) {
  for (const char c : word) {
    if (c < 'a' || c > 'z') return std::string(word);
  }
  std::string w(word);
  if (w.size() <= 2) return w;
  step1a(w);
  step1b(w);
  step1c(w);
  step2(w);
  step3(w);
  step4(w);
  step5(w);
  return w;
}

}  // namespace disco::metrics
