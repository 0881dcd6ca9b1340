#include <algorithm>

#include "disco/common/text.hpp"
#include "disco/disfluency/disfluency.hpp"
#include "disco/errors.hpp"

namespace disco::disfluency {
namespace {

std::size_t byte_length(const std::vector<std::string>& pieces) {
  std::size_t n = 0;
  for (const auto& p : pieces) n += p.size();
  return n;
}

std::string concat(const std::vector<std::string>& pieces) { return text::join(pieces, ""); }

/// Leading whitespace of a piece replaced by a single space.
std::string spaced(std::string_view piece) { return " " + std::string(text::piece_token(piece)); }

/// Pieces of a free-standing phrase, the first one preceded by a space.
std::vector<std::string> spaced_phrase(std::string_view phrase) {
  auto p = text::split_pieces(text::trim(phrase));
  if (!p.pieces.empty()) p.pieces.front() = spaced(p.pieces.front());
  return p.pieces;
}

/// Applies one edit to `text` and returns the result.
std::string splice(std::string_view text, const Edit& e) {
  const std::string removed = concat(e.removed_tokens);
  if (e.offset + removed.size() > text.size() ||
      text.substr(e.offset, removed.size()) != removed) {
    throw ValidationError("edit does not match text at offset " + std::to_string(e.offset));
  }
  std::string out(text.substr(0, e.offset));
  out += concat(e.inserted_tokens);
  out += text.substr(e.offset + removed.size());
  return out;
}

DisfluencySpan span_of(std::string_view text, std::size_t byte_begin, std::size_t byte_end,
                       DisfluencyType kind) {
  return {kind, text::codepoint_offset(text, byte_begin), text::codepoint_offset(text, byte_end),
          SpanSource::injected};
}

/// Byte range of pieces [first, last) within `inserted` once placed at `offset`,
/// skipping the leading whitespace of the first piece.
std::pair<std::size_t, std::size_t> inserted_range(const std::vector<std::string>& inserted,
                                                   std::size_t offset, std::size_t first,
                                                   std::size_t last) {
  std::size_t b = offset;
  for (std::size_t i = 0; i < first; ++i) b += inserted[i].size();
  std::size_t e = b;
  for (std::size_t i = first; i < last; ++i) e += inserted[i].size();
  b += inserted[first].size() - text::piece_token(inserted[first]).size();
  return {b, e};
}

std::vector<std::size_t> word_pieces(const text::Pieces& p) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p.is_word(i)) out.push_back(i);
  }
  return out;
}

}  // namespace

Json to_json(const EditTrace& trace) {
  Json edits = Json::array();
  for (const auto& e : trace.edits) {
    edits.push_back(Json{{"kind", to_string(e.kind)},
                         {"position", e.position},
                         {"offset", e.offset},
                         {"inserted_tokens", e.inserted_tokens},
                         {"removed_tokens", e.removed_tokens}});
  }
  return Json{{"original_text", trace.original_text}, {"edits", std::move(edits)}};
}

EditTrace trace_from_json(const Json& j) {
  EditTrace t;
  try {
    t.original_text = j.at("original_text").get<std::string>();
    for (const auto& e : j.at("edits")) {
      t.edits.push_back({parse_disfluency_type(e.at("kind").get<std::string>()),
                         e.at("position").get<std::size_t>(), e.at("offset").get<std::size_t>(),
                         e.at("inserted_tokens").get<std::vector<std::string>>(),
                         e.at("removed_tokens").get<std::vector<std::string>>()});
    }
  } catch (const Json::exception& e) {
    throw ParseError(std::string("malformed edit trace: ") + e.what());
  }
  return t;
}

std::string apply_trace(const EditTrace& trace) {
  std::string text = trace.original_text;
  for (const auto& e : trace.edits) text = splice(text, e);
  return text;
}

std::string invert_trace(const EditTrace& trace, std::string_view disfluent) {
  std::string text(disfluent);
  for (auto it = trace.edits.rbegin(); it != trace.edits.rend(); ++it) {
    Edit undo = *it;
    std::swap(undo.inserted_tokens, undo.removed_tokens);
    text = splice(text, undo);
  }
  return text;
}

Injection apply_repetition(std::string_view text, const RepetitionChoice& choice) {
  const auto p = text::split_pieces(text);
  if (choice.length == 0 || choice.start_piece + choice.length > p.size()) {
    throw ArgumentError("repetition span out of range");
  }
  for (std::size_t i = choice.start_piece; i < choice.start_piece + choice.length; ++i) {
    if (!p.is_word(i)) throw ArgumentError("repetition span must cover words only");
  }
  Edit e;
  e.kind = DisfluencyType::repetition;
  e.position = choice.start_piece + choice.length;
  e.offset = p.offsets[choice.start_piece] + byte_length({p.pieces.begin() + choice.start_piece,
                                                          p.pieces.begin() + e.position});
  e.inserted_tokens.push_back(spaced(p.pieces[choice.start_piece]));
  for (std::size_t i = choice.start_piece + 1; i < e.position; ++i) {
    e.inserted_tokens.push_back(p.pieces[i]);
  }

  Injection out;
  out.trace = {std::string(text), {e}};
  out.text = apply_trace(out.trace);
  const auto [b, end] = inserted_range(e.inserted_tokens, e.offset, 0, e.inserted_tokens.size());
  out.spans.push_back(span_of(out.text, b, end, DisfluencyType::repetition));
  return out;
}

Injection inject_repetition(std::string_view text, Rng& rng) {
  const auto p = text::split_pieces(text);
  const auto words = word_pieces(p);
  if (words.empty()) throw ArgumentError("repetition needs at least one word");
  std::size_t length = 1 + rng.uniform_index(2);
  std::vector<std::size_t> starts;
  for (const std::size_t w : words) {
    if (length == 1 || (w + 1 < p.size() && p.is_word(w + 1))) starts.push_back(w);
  }
  if (starts.empty()) {
    length = 1;
    starts = words;
  }
  return apply_repetition(text, {starts[rng.uniform_index(starts.size())], length});
}

Injection apply_replacement(std::string_view text, const ReplacementChoice& choice,
                            CueOrder order) {
  const auto p = text::split_pieces(text);
  if (choice.piece >= p.size() || !p.is_word(choice.piece)) {
    throw ArgumentError("replacement target must be a word");
  }
  if (choice.retrace > choice.piece) throw ArgumentError("retrace reaches before the text");
  const auto substitute = spaced_phrase(choice.substitute);
  if (substitute.empty()) throw ArgumentError("replacement substitute is empty");
  const auto cue = choice.cue ? spaced_phrase(*choice.cue) : std::vector<std::string>{};

  // The candidate piece is removed and re-inserted so the new first piece can
  // take over its leading whitespace (which is empty at the start of the text).
  Edit e;
  e.kind = DisfluencyType::replacement;
  e.position = choice.piece;
  e.offset = p.offsets[choice.piece];
  e.removed_tokens.push_back(p.pieces[choice.piece]);

  const auto& first = order == CueOrder::substitute_then_cue || cue.empty() ? substitute : cue;
  const auto& second = &first == &substitute ? cue : substitute;
  for (const auto& piece : first) e.inserted_tokens.push_back(piece);
  for (const auto& piece : second) e.inserted_tokens.push_back(piece);
  for (std::size_t i = choice.piece - choice.retrace; i < choice.piece; ++i) {
    e.inserted_tokens.push_back(spaced(p.pieces[i]));
  }
  e.inserted_tokens.push_back(spaced(p.pieces[choice.piece]));
  const std::string_view lead(p.pieces[choice.piece].data(),
                              p.pieces[choice.piece].size() -
                                  text::piece_token(p.pieces[choice.piece]).size());
  e.inserted_tokens.front() = std::string(lead) + std::string(text::piece_token(e.inserted_tokens.front()));

  Injection out;
  out.trace = {std::string(text), {e}};
  out.text = apply_trace(out.trace);

  const std::size_t sub_first = &first == &substitute ? 0 : cue.size();
  const auto [sb, se] =
      inserted_range(e.inserted_tokens, e.offset, sub_first, sub_first + substitute.size());
  out.spans.push_back(span_of(out.text, sb, se, DisfluencyType::replacement));
  if (!cue.empty()) {
    const std::size_t cue_first = &first == &substitute ? substitute.size() : 0;
    const auto [cb, ce] = inserted_range(e.inserted_tokens, e.offset, cue_first, cue_first + cue.size());
    out.spans.push_back(span_of(out.text, cb, ce, DisfluencyType::correction));
  }
  std::sort(out.spans.begin(), out.spans.end(),
            [](const auto& a, const auto& b) { return a.start < b.start; });
  return out;
}

Injection inject_replacement(std::string_view text, const LexiconSet& lexicons, Rng& rng,
                             const ReplacementOptions& options) {
  const auto p = text::split_pieces(text);
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p.is_word(i) && lexicons.covers(text::piece_token(p.pieces[i]))) candidates.push_back(i);
  }
  if (candidates.empty()) {
    throw NotApplicableError("no token of the text has a synonym or antonym entry");
  }
  ReplacementChoice choice;
  choice.piece = candidates[rng.uniform_index(candidates.size())];
  const std::string word = text::normalize(text::piece_token(p.pieces[choice.piece]));

  const auto lookup = [&](const auto& rel) -> const std::vector<std::string>* {
    auto it = rel.find(word);
    return it == rel.end() || it->second.empty() ? nullptr : &it->second;
  };
  const auto* syn = lookup(lexicons.synonyms);
  const auto* ant = lookup(lexicons.antonyms);
  const auto* pool = syn && ant ? (rng.bernoulli(0.5) ? syn : ant) : (syn ? syn : ant);
  choice.substitute = (*pool)[rng.uniform_index(pool->size())];

  if (!lexicons.repair_cues.empty() && rng.bernoulli(options.cue_probability)) {
    choice.cue = lexicons.repair_cues[rng.uniform_index(lexicons.repair_cues.size())];
  }
  // Optionally re-say the preceding word after the cue.
  if (choice.piece > 0 && p.is_word(choice.piece - 1) && rng.bernoulli(0.5)) choice.retrace = 1;
  return apply_replacement(text, choice, options.order);
}

Injection apply_restart(std::string_view seq1, std::string_view seq2, const RestartChoice& choice) {
  const auto p1 = text::split_pieces(seq1);
  const auto p2 = text::split_pieces(seq2);
  const std::size_t tokens1 = p1.size() - (p1.trailing_index < p1.size() ? 1 : 0);
  const std::size_t tokens2 = p2.size() - (p2.trailing_index < p2.size() ? 1 : 0);
  if (tokens1 == 0 || tokens2 == 0) throw ArgumentError("restart needs two non-empty sequences");
  if (choice.split_piece == 0 || choice.split_piece >= tokens1) {
    throw ArgumentError("restart split must fall strictly inside the first sequence");
  }
  Edit e;
  e.kind = DisfluencyType::restart;
  e.position = choice.split_piece;
  e.offset = p1.offsets[choice.split_piece];
  e.removed_tokens.assign(p1.pieces.begin() + choice.split_piece, p1.pieces.end());
  e.inserted_tokens = p2.pieces;
  e.inserted_tokens.front() = spaced(p2.pieces.front());

  Injection out;
  out.trace = {std::string(seq1), {e}};
  out.text = apply_trace(out.trace);
  // The abandoned fragment is the surviving prefix of the first sequence.
  const std::size_t prefix_begin = p1.offsets[0] + (p1.pieces[0].size() - text::piece_token(p1.pieces[0]).size());
  out.spans.push_back(span_of(out.text, prefix_begin, e.offset, DisfluencyType::restart));
  return out;
}

Injection inject_restart(std::string_view seq1, std::string_view seq2, Rng& rng) {
  const auto p1 = text::split_pieces(seq1);
  const std::size_t tokens1 = p1.size() - (p1.trailing_index < p1.size() ? 1 : 0);
  if (tokens1 < 2 || text::is_blank(seq2)) {
    throw ArgumentError("restart needs a first sequence of at least two tokens and a second sequence");
  }
  return apply_restart(seq1, seq2, {1 + rng.uniform_index(tokens1 - 1)});
}

}  // namespace disco::disfluency
