#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace disco::metrics {

using Json = nlohmann::json;
using Tokens = std::vector<std::string>;

enum class BleuSmoothing { none, add_k };
/// corpus: pooled n-gram statistics; sentence: mean of per-sentence BLEU.
enum class BleuMode { corpus, sentence };

struct MetricParams {
  int max_n = 4;
  BleuSmoothing bleu_smoothing = BleuSmoothing::add_k;
  double smoothing_k = 1.0;
  BleuMode bleu_mode = BleuMode::corpus;
  double rouge_beta = 1.0;
  double meteor_alpha = 0.9;
  double meteor_beta = 3.0;
  double meteor_gamma = 0.5;
  bool lowercase = true;

  /// Throws ArgumentError when max_n < 1 or a real parameter is negative.
  void validate() const;
};

/// Porter (1980) suffix-stripping stemmer for lowercase English words. Words
/// containing anything other than a-z are returned unchanged.
std::string porter_stem(std::string_view word);

/// |unique n-grams| / |n-gram occurrences| pooled over all utterances.
/// Throws InsufficientDataError when no utterance has n tokens.
double distinct_n(std::span<const Tokens> utterances, int n);

/// Clipped n-gram statistics for orders 1..max_n.
struct BleuStats {
  std::vector<std::size_t> matches;  // clipped
  std::vector<std::size_t> totals;   // hypothesis n-grams
  std::size_t hyp_length = 0;
  std::size_t ref_length = 0;

  BleuStats& operator+=(const BleuStats& other);
};

BleuStats bleu_stats(const Tokens& hypothesis, const Tokens& reference, int max_n);

/// BLEU-1..BLEU-max_n in [0, 1] from accumulated statistics.
std::vector<double> bleu_from_stats(const BleuStats& stats, const MetricParams& params);

/// BLEU-1..max_n in [0, 1]. Throws ArgumentError on empty or unequal lists.
std::vector<double> bleu(std::span<const Tokens> hypotheses, std::span<const Tokens> references,
                         const MetricParams& params = {});

std::size_t lcs_length(const Tokens& a, const Tokens& b);

/// ROUGE-L F-score in [0, 1]; 0 when either side is empty.
double rouge_l(const Tokens& hypothesis, const Tokens& reference, const MetricParams& params = {});
/// Arithmetic mean of sentence ROUGE-L.
double rouge_l(std::span<const Tokens> hypotheses, std::span<const Tokens> references,
               const MetricParams& params = {});

/// Unigram alignment used by METEOR: exact matches first, then Porter-stem
/// matches, and among those the alignment with the fewest chunks.
struct MeteorAlignment {
  std::size_t exact = 0;
  std::size_t stem = 0;
  std::size_t chunks = 0;

  std::size_t matches() const noexcept { return exact + stem; }
};

MeteorAlignment meteor_align(const Tokens& hypothesis, const Tokens& reference);
/// Score from an alignment and the two lengths.
double meteor_score(const MeteorAlignment& alignment, std::size_t hyp_length,
                    std::size_t ref_length, const MetricParams& params = {});
/// METEOR in [0, 1] (exact and stem stages, no synonym stage).
double meteor(const Tokens& hypothesis, const Tokens& reference, const MetricParams& params = {});
double meteor(std::span<const Tokens> hypotheses, std::span<const Tokens> references,
              const MetricParams& params = {});

// -- reports --------------------------------------------------------------

/// One line of a generation-scoring file.
struct GenerationRecord {
  std::string context;
  std::string reference;
  std::string hypothesis;
};

/// Throws ParseError carrying the 1-based record index on a missing field.
std::vector<GenerationRecord> read_generations(std::istream& in);
std::vector<GenerationRecord> read_generations(const std::filesystem::path& path);

/// Scores on the percent scale used in result tables.
struct MetricReport {
  std::vector<double> bleu;  // BLEU-1..max_n
  double rouge_l = 0.0;
  double meteor = 0.0;
  std::size_t sentences = 0;
  std::size_t hypothesis_tokens = 0;
  std::size_t reference_tokens = 0;
};

/// Throws ArgumentError on an empty record list.
MetricReport corpus_report(std::span<const GenerationRecord> records, const MetricParams& params = {});
MetricReport corpus_report(const std::filesystem::path& path, const MetricParams& params = {});

Json to_json(const MetricReport& report);
/// Columns BLEU-1..n, ROUGE-L, METEOR, optionally a placeholder BERTScore column.
std::string render_table(const MetricReport& report, bool bertscore_column = false);

/// One corpus column of a distinct-n table.
struct DistinctColumn {
  std::string name;
  std::vector<Tokens> utterances;
};

/// Rows "1-gram".."max_n-gram", one column per corpus, four decimals.
std::string render_distinct_table(std::span<const DistinctColumn> columns, int max_n);

}  // namespace disco::metrics
