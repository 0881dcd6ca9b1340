#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "disco/corpus/corpus.hpp"
#include "disco/errors.hpp"

namespace disco::eval {

// -- metric registry --------------------------------------------------------

enum class EvalMode { intrinsic, pairwise, disfluency_integration };
std::string_view to_string(EvalMode m) noexcept;
EvalMode parse_eval_mode(std::string_view s);

/// Registered metric names for a mode, in form order.
const std::vector<std::string>& metric_names(EvalMode mode);
bool is_registered_metric(EvalMode mode, std::string_view metric);
/// Metrics a complete judgment of one item must cover (all but optional ones).
std::vector<std::string> required_metrics(EvalMode mode);

/// Form specs with anchor labels, keyed by mode name. Throws ValidationError
/// when the file disagrees with the registry.
Json load_metric_sets(const std::filesystem::path& path);

// -- rating records ----------------------------------------------------------

enum class Choice { A, B };
std::string_view to_string(Choice c) noexcept;
Choice parse_choice(std::string_view s);

struct RatingRecord {
  std::string session_id;
  std::string evaluator_id;
  std::string item_id;  // dialog id or pair id
  std::string metric_name;
  std::optional<int> likert;
  std::optional<Choice> choice;
  std::string timestamp;

  friend bool operator==(const RatingRecord&, const RatingRecord&) = default;
};

Json to_json(const RatingRecord& r);
RatingRecord rating_from_json(const Json& j);

/// JSONL rating log. With `tolerate_partial_tail`, a malformed final line
/// (an interrupted append) is ignored instead of raising ParseError.
std::vector<RatingRecord> read_ratings(std::istream& in, bool tolerate_partial_tail = false);
std::vector<RatingRecord> read_ratings(const std::filesystem::path& path, bool tolerate_partial_tail = false);
void write_ratings(std::span<const RatingRecord> records, const std::filesystem::path& path);

/// Throws ValidationError on an unregistered metric, a Likert value outside
/// [1, 5], or a value of the wrong kind for the mode.
void validate_rating(const RatingRecord& r, EvalMode mode);

// -- aggregation ---------------------------------------------------------------

struct AggregationParams {
  double ci_z = 1.96;

  void validate() const;
};

struct LikertSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation
  double half_width = 0.0;

  /// "m (±h)": one decimal on the mean, two on the half-width.
  std::string render() const;
};

std::string render_likert(double mean, double half_width);

/// Summary of one metric's values; throws InsufficientDataError below 2 values.
LikertSummary summarize_likert(std::span<const double> values, const AggregationParams& params = {},
                               std::string_view metric = "metric");

/// Per-metric summaries over all Likert records. Throws InsufficientDataError
/// naming the first metric with fewer than 2 values.
std::map<std::string, LikertSummary> aggregate_likert(std::span<const RatingRecord> records,
                                                      const AggregationParams& params = {});

/// Like aggregate_likert, but metrics with too few values are listed in
/// `insufficient` instead of failing the whole call.
struct PartialLikert {
  std::map<std::string, LikertSummary> metrics;
  std::vector<std::string> insufficient;
};
PartialLikert aggregate_likert_partial(std::span<const RatingRecord> records, const AggregationParams& params = {});

struct PairwiseCounts {
  std::size_t a = 0;
  std::size_t b = 0;

  std::size_t total() const noexcept { return a + b; }
  friend bool operator==(const PairwiseCounts&, const PairwiseCounts&) = default;
};

/// Raw per-evaluator choice counts per metric.
std::map<std::string, PairwiseCounts> aggregate_pairwise(std::span<const RatingRecord> records);

struct MajorityCounts {
  std::size_t a = 0;
  std::size_t b = 0;
  std::size_t ties = 0;

  friend bool operator==(const MajorityCounts&, const MajorityCounts&) = default;
};

/// One vote per (item, metric): the side most evaluators chose, ties kept apart.
std::map<std::string, MajorityCounts> pairwise_majority(std::span<const RatingRecord> records);

// -- sampling ------------------------------------------------------------------

/// 4 dialogs per (domain, length) over 7 domains x 5 lengths = 140.
std::vector<Dialog> sample_discodrive(std::span<const Dialog> corpus, std::uint64_t seed,
                                      std::size_t per_stratum = 4);

class UnderstockedError : public Error {
 public:
  UnderstockedError(std::string stratum, std::size_t available, std::size_t required)
      : Error(ErrorCategory::data, "understocked_stratum",
              "stratum (" + stratum + ") has " + std::to_string(available) + " dialogs, " +
                  std::to_string(required) + " required"),
        stratum_(std::move(stratum)),
        available_(available) {}

  const std::string& stratum() const noexcept { return stratum_; }
  std::size_t available() const noexcept { return available_; }

 private:
  std::string stratum_;
  std::size_t available_;
};

struct ExternalSplits {
  std::vector<Dialog> train;
  std::vector<Dialog> valid;
  std::vector<Dialog> test;
};

struct SplitCounts {
  std::size_t train = 100;
  std::size_t valid = 20;
  std::size_t test = 20;
};

/// Seeded draws without replacement, concatenated train, valid, test.
std::vector<Dialog> sample_external(const ExternalSplits& splits, const SplitCounts& counts, std::uint64_t seed);

/// A reference to a dialog in a named source corpus.
struct ItemRef {
  std::string source;
  std::string dialog_id;

  friend bool operator==(const ItemRef&, const ItemRef&) = default;
};

/// Sides as presented to annotators; `a` and `b` hold the unblinding map.
struct BlindPair {
  std::string pair_id;
  ItemRef a;
  ItemRef b;

  friend bool operator==(const BlindPair&, const BlindPair&) = default;
};

Json to_json(const BlindPair& p);
BlindPair pair_from_json(const Json& j);

/// Index-aligned pairs with the presentation side drawn per pair.
std::vector<BlindPair> pair_for_comparison(std::span<const Dialog> set_a, std::span<const Dialog> set_b,
                                           std::uint64_t seed, std::string_view source_a = "a",
                                           std::string_view source_b = "b");

/// Per-metric choice counts attributed to source corpora.
std::map<std::string, std::map<std::string, std::size_t>> unblind_pairwise(
    std::span<const RatingRecord> records, std::span<const BlindPair> pairs);

// -- subsets -------------------------------------------------------------------

/// Default in-car whitelist.
std::set<std::string> default_service_whitelist();

/// Service labels carried in the dialog's "services" field; empty when unlabeled.
std::vector<std::string> service_labels(const Dialog& d);

struct FilterResult {
  std::vector<Dialog> dialogs;
  std::size_t qualifying = 0;
  std::size_t excluded = 0;
  std::size_t unlabeled = 0;
};

/// Keeps dialogs whose services are all whitelisted (any one, when
/// require_all is false), then downsamples to `cap` by seed.
FilterResult filter_incar_subset(std::span<const Dialog> dialogs, const std::set<std::string>& whitelist,
                                 std::size_t cap, std::uint64_t seed, bool require_all = true);

/// round(fraction * N) dialogs drawn without replacement, in input order.
std::vector<Dialog> split_fraction(std::span<const Dialog> dialogs, double fraction, std::uint64_t seed);

// -- external dataset adapters ----------------------------------------------------

/// Lowercase service name without version suffix: "Hotels_1" -> "hotel".
std::string normalize_service(std::string_view raw);
/// Domain used for an external dialog with these (normalized) services.
DomainTag domain_for_services(const std::vector<std::string>& services);

/// KVRET JSON file (array of dialogues). Intents become service labels.
Corpus read_kvret(const std::filesystem::path& file, std::string_view split = "train");
/// MultiWOZ 2.2 or SGD dialogue files: a JSON file or a directory of them.
Corpus read_multiwoz(const std::filesystem::path& path, std::string_view split = "test");
Corpus read_sgd(const std::filesystem::path& path, std::string_view split = "test");

}  // namespace disco::eval
