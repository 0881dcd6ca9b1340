#include <algorithm>

#include "disco/common/text.hpp"
#include "disco/disfluency/disfluency.hpp"

namespace disco::disfluency {
namespace {

using text::Token;
using text::TokenClass;

constexpr std::size_t kMaxRepetitionOrder = 4;
constexpr std::size_t kRestartWindow = 3;
constexpr std::array<std::string_view, 3> kRestartMarkers = {"actually", "wait", "let's"};

struct ByteSpan {
  std::size_t begin;
  std::size_t end;
  DisfluencyType kind;
};

class SpanSet {
 public:
  bool add(ByteSpan s) {
    for (const auto& a : accepted_) {
      if (s.begin < a.end && a.begin < s.end) return false;
    }
    accepted_.push_back(s);
    return true;
  }
  const std::vector<ByteSpan>& spans() const { return accepted_; }

 private:
  std::vector<ByteSpan> accepted_;
};

struct Analysis {
  std::vector<Token> tokens;
  std::vector<std::size_t> word_tokens;  // token index of each word
  std::vector<std::string> words;        // normalized

  explicit Analysis(std::string_view text) : tokens(text::tokenize(text)) {
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (tokens[i].is_word()) {
        word_tokens.push_back(i);
        words.push_back(text::normalize(tokens[i].text));
      }
    }
  }

  bool is_comma(std::size_t token) const {
    return token < tokens.size() && tokens[token].cls == TokenClass::punct &&
           tokens[token].text == ",";
  }

  /// Matches `phrase` at word position k; returns the number of words matched or 0.
  std::size_t match(std::size_t k, const std::vector<std::string>& phrase) const {
    if (phrase.empty() || k + phrase.size() > words.size()) return 0;
    for (std::size_t m = 0; m < phrase.size(); ++m) {
      if (words[k + m] != phrase[m]) return 0;
    }
    return phrase.size();
  }

  ByteSpan word_span(std::size_t first_word, std::size_t last_word, DisfluencyType kind) const {
    return {tokens[word_tokens[first_word]].begin, tokens[word_tokens[last_word]].end, kind};
  }
};

std::vector<std::vector<std::string>> phrases_longest_first(const std::vector<std::string>& list) {
  std::vector<std::vector<std::string>> out;
  for (const auto& p : list) {
    auto w = text::words(p);
    if (!w.empty()) out.push_back(std::move(w));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });
  return out;
}

void filler_rule(const Analysis& a, const LexiconSet& lex, SpanSet& out) {
  const auto free = phrases_longest_first(lex.fillers);
  const auto delimited = phrases_longest_first(lex.delimited_fillers);
  for (std::size_t k = 0; k < a.words.size(); ++k) {
    std::size_t len = 0;
    for (const auto& p : free) {
      len = a.match(k, p);
      // Multi-word fillers must not be interrupted by punctuation.
      if (len > 1 && a.word_tokens[k + len - 1] - a.word_tokens[k] != len - 1) len = 0;
      if (len) break;
    }
    if (!len) {
      for (const auto& p : delimited) {
        len = a.match(k, p);
        if (!len) continue;
        const std::size_t first = a.word_tokens[k];
        const std::size_t last = a.word_tokens[k + len - 1];
        const bool before = first == 0 || a.is_comma(first - 1);
        const bool after = a.is_comma(last + 1);
        if (last - first != len - 1 || !before || !after) len = 0;
        if (len) break;
      }
    }
    if (len) {
      out.add(a.word_span(k, k + len - 1, DisfluencyType::filler));
      k += len - 1;
    }
  }
}

void pause_rule(const Analysis& a, SpanSet& out) {
  for (const auto& t : a.tokens) {
    if (t.cls == TokenClass::ellipsis) out.add({t.begin, t.end, DisfluencyType::pause});
  }
}

void repetition_rule(const Analysis& a, SpanSet& out) {
  const std::size_t w = a.words.size();
  std::size_t k = 0;
  while (k < w) {
    std::size_t order = 0;
    for (std::size_t n = std::min(kMaxRepetitionOrder, (w - k) / 2); n >= 1; --n) {
      if (std::equal(a.words.begin() + k, a.words.begin() + k + n, a.words.begin() + k + n)) {
        order = n;
        break;
      }
    }
    if (!order) {
      ++k;
      continue;
    }
    // The span covers the first copy plus trailing commas, stopping short of
    // pauses and dashes that belong to other rules.
    std::size_t last = a.word_tokens[k + order] - 1;
    while (a.tokens[last].cls == TokenClass::ellipsis || a.tokens[last].cls == TokenClass::dash) {
      --last;
    }
    out.add({a.tokens[a.word_tokens[k]].begin, a.tokens[last].end, DisfluencyType::repetition});
    k += order;
  }
}

void correction_rule(const Analysis& a, const std::vector<std::vector<std::string>>& cues,
                     SpanSet& out) {
  for (std::size_t k = 0; k < a.words.size(); ++k) {
    for (const auto& cue : cues) {
      if (const std::size_t len = a.match(k, cue)) {
        out.add(a.word_span(k, k + len - 1, DisfluencyType::correction));
        k += len - 1;
        break;
      }
    }
  }
}

void false_start_rule(const Analysis& a, const std::vector<std::vector<std::string>>& cues,
                      SpanSet& out) {
  for (std::size_t t = 0; t < a.tokens.size(); ++t) {
    if (a.tokens[t].cls != TokenClass::dash) continue;
    const auto first_after =
        std::upper_bound(a.word_tokens.begin(), a.word_tokens.end(), t) - a.word_tokens.begin();
    bool restarted = false;
    for (std::size_t m = 0; m < kRestartWindow && !restarted; ++m) {
      const std::size_t k = static_cast<std::size_t>(first_after) + m;
      if (k >= a.words.size()) break;
      restarted = std::find(kRestartMarkers.begin(), kRestartMarkers.end(), a.words[k]) !=
                  kRestartMarkers.end();
      for (const auto& cue : cues) {
        if (restarted) break;
        restarted = a.match(k, cue) > 0;
      }
    }
    if (!restarted) continue;
    // The abandoned fragment runs from the start of the clause up to the dash.
    std::size_t start = t;
    while (start > 0) {
      const Token& prev = a.tokens[start - 1];
      if (prev.cls != TokenClass::word && (prev.cls != TokenClass::punct ||
                                           prev.text.find_first_of(".?!,;:") != std::string::npos)) {
        break;
      }
      --start;
    }
    out.add({a.tokens[start].begin, a.tokens[t].end, DisfluencyType::false_start});
  }
}

}  // namespace

std::vector<DisfluencySpan> tag_disfluencies(std::string_view text, const LexiconSet& lexicons) {
  const Analysis a(text);
  const auto cues = phrases_longest_first(lexicons.repair_cues);
  SpanSet spans;
  filler_rule(a, lexicons, spans);
  pause_rule(a, spans);
  repetition_rule(a, spans);
  correction_rule(a, cues, spans);
  false_start_rule(a, cues, spans);

  std::vector<DisfluencySpan> out;
  for (const auto& s : spans.spans()) {
    out.push_back({s.kind, text::codepoint_offset(text, s.begin), text::codepoint_offset(text, s.end),
                   SpanSource::tagged});
  }
  std::sort(out.begin(), out.end(),
            [](const DisfluencySpan& x, const DisfluencySpan& y) { return x.start < y.start; });
  return out;
}

void tag_corpus(Corpus& corpus, const LexiconSet& lexicons) {
  for (auto& dialog : corpus.dialogs) {
    for (auto& turn : dialog.turns) {
      if (turn.speaker != Speaker::driver) continue;
      std::vector<DisfluencySpan> spans;
      for (const auto& s : turn.disfluency_spans) {
        if (s.source == SpanSource::injected) spans.push_back(s);
      }
      const std::size_t injected = spans.size();
      for (const auto& s : tag_disfluencies(turn.text, lexicons)) {
        const bool clash = std::any_of(spans.begin(), spans.begin() + injected, [&](const auto& o) {
          return s.start < o.end && o.start < s.end;
        });
        if (!clash) spans.push_back(s);
      }
      std::sort(spans.begin(), spans.end(),
                [](const DisfluencySpan& x, const DisfluencySpan& y) { return x.start < y.start; });
      turn.disfluency_spans = std::move(spans);
    }
  }
}

}  // namespace disco::disfluency
