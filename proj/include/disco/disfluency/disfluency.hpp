#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "disco/common/random.hpp"
#include "disco/corpus/corpus.hpp"

namespace disco::disfluency {

/// Word lists driving both the tagger and the injectors. All entries are lowercase.
struct LexiconSet {
  std::vector<std::string> fillers;
  /// Fillers that are also ordinary words ("like", "so"); they only count when
  /// set off by commas or at the start of the text.
  std::vector<std::string> delimited_fillers;
  std::vector<std::string> repair_cues;
  std::map<std::string, std::vector<std::string>> synonyms;
  std::map<std::string, std::vector<std::string>> antonyms;

  /// Throws ValidationError on non-lowercase or empty entries.
  void validate() const;
  /// True when `word` (normalized) has a synonym or antonym entry.
  bool covers(std::string_view word) const;
};

/// Reads fillers.json, cues.json, synonyms.json and antonyms.json from `dir`.
LexiconSet load_lexicons(const std::filesystem::path& dir);

/// Adds the reverse of every a -> b entry.
void symmetrize(std::map<std::string, std::vector<std::string>>& relation);

// -- tagging ----------------------------------------------------------------

/// Rule-based disfluency tagger. Rules run in priority order (filler, pause,
/// repetition, correction, false start); a span overlapping an already
/// accepted span is dropped. Offsets are code points, sorted by start.
std::vector<DisfluencySpan> tag_disfluencies(std::string_view text, const LexiconSet& lexicons);

/// Re-tags every driver turn of the corpus in place, replacing tagged spans
/// and keeping injected ones that do not collide.
void tag_corpus(Corpus& corpus, const LexiconSet& lexicons);

// -- injection ---------------------------------------------------------------

/// One splice in a text. `inserted_tokens` / `removed_tokens` are pieces
/// (token plus leading whitespace), so joining them reproduces the bytes exactly.
struct Edit {
  DisfluencyType kind = DisfluencyType::repetition;
  std::size_t position = 0;  // piece index in the text before this edit
  std::size_t offset = 0;    // byte offset of that piece
  std::vector<std::string> inserted_tokens;
  std::vector<std::string> removed_tokens;

  friend bool operator==(const Edit&, const Edit&) = default;
};

struct EditTrace {
  std::string original_text;
  std::vector<Edit> edits;

  friend bool operator==(const EditTrace&, const EditTrace&) = default;
};

Json to_json(const EditTrace& trace);
EditTrace trace_from_json(const Json& j);

/// Replays the edits over original_text.
std::string apply_trace(const EditTrace& trace);
/// Undoes the edits on `disfluent`; throws ValidationError if the text does not
/// contain the recorded insertions.
std::string invert_trace(const EditTrace& trace, std::string_view disfluent);

struct Injection {
  std::string text;
  EditTrace trace;
  std::vector<DisfluencySpan> spans;  // injected spans in `text`
};

struct RepetitionChoice {
  std::size_t start_piece = 0;
  std::size_t length = 1;  // 1 or 2 word pieces
};

/// Duplicates pieces [start_piece, start_piece + length) right after themselves.
Injection apply_repetition(std::string_view text, const RepetitionChoice& choice);
/// Random index, span length in {1, 2}. Throws ArgumentError on text without words.
Injection inject_repetition(std::string_view text, Rng& rng);

enum class CueOrder { substitute_then_cue, cue_then_substitute };

struct ReplacementChoice {
  std::size_t piece = 0;   // candidate token being replaced
  std::string substitute;  // may span several words
  std::optional<std::string> cue;
  /// Number of word pieces before the candidate that the speaker re-says
  /// after the cue ("... where the nearest restaurant no sorry where i ...").
  std::size_t retrace = 0;
};

struct ReplacementOptions {
  double cue_probability = 0.8;
  CueOrder order = CueOrder::substitute_then_cue;
};

/// Renders "... [substitute] [cue] [retraced words] [candidate] ...".
Injection apply_replacement(std::string_view text, const ReplacementChoice& choice,
                            CueOrder order = CueOrder::substitute_then_cue);
/// Picks a lexicon-covered token and a synonym or antonym for it. Throws
/// NotApplicableError when no token is covered.
Injection inject_replacement(std::string_view text, const LexiconSet& lexicons, Rng& rng,
                             const ReplacementOptions& options = {});

struct RestartChoice {
  std::size_t split_piece = 1;  // pieces [0, split_piece) of the first sequence survive
};

/// Truncates seq1 before split_piece and appends the whole of seq2.
Injection apply_restart(std::string_view seq1, std::string_view seq2, const RestartChoice& choice);
Injection inject_restart(std::string_view seq1, std::string_view seq2, Rng& rng);

// -- corpus injection ----------------------------------------------------------

enum class InjectionOp { repetition, replacement, restart };
std::string_view to_string(InjectionOp op) noexcept;
InjectionOp parse_injection_op(std::string_view s);

struct InjectionPlan {
  /// Relative weights for repetition, replacement, restart.
  std::array<double, 3> weights = {1.0, 1.0, 1.0};
  /// Probability that a driver turn is modified.
  double rate = 0.5;
  ReplacementOptions replacement;
};

struct InjectionResult {
  Corpus corpus;
  std::size_t modified = 0;
  std::size_t skipped = 0;  // turns whose drawn operation was not applicable
};

/// Post-hoc injection into driver turns only. Each modified turn's trace and
/// its previous spans go to provenance["edit_traces"]; run parameters go to
/// provenance["injection"]. Throws ArgumentError if the corpus already carries
/// edit traces.
InjectionResult inject_corpus(const Corpus& corpus, const InjectionPlan& plan,
                              const LexiconSet& lexicons, std::uint64_t seed);

/// Undoes inject_corpus.
Corpus invert_corpus(const Corpus& corpus);

}  // namespace disco::disfluency
