#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace disco {

using Json = nlohmann::json;

enum class DomainTag {
  navigation,
  maintenance_diagnostics,
  safety_emergency,
  entertainment,
  local_attractions,
  car_functions,
  weather,
};

inline constexpr std::array<DomainTag, 7> kAllDomains = {
    DomainTag::navigation,        DomainTag::maintenance_diagnostics, DomainTag::safety_emergency,
    DomainTag::entertainment,     DomainTag::local_attractions,       DomainTag::car_functions,
    DomainTag::weather,
};

/// Dialog lengths used for generated corpora.
inline constexpr std::array<int, 5> kTurnLengths = {6, 8, 10, 12, 14};

std::string_view to_string(DomainTag d) noexcept;
/// Throws ParseError for anything outside the seven domains.
DomainTag parse_domain(std::string_view s);
/// Human-readable name, e.g. "Car Maintenance and Diagnostics".
std::string_view display_name(DomainTag d) noexcept;

enum class Speaker { driver, car_ai };
std::string_view to_string(Speaker s) noexcept;
Speaker parse_speaker(std::string_view s);

enum class DisfluencyType {
  repetition,
  false_start,
  filler,
  pause,
  correction,
  replacement,
  restart,
};
std::string_view to_string(DisfluencyType t) noexcept;
DisfluencyType parse_disfluency_type(std::string_view s);

enum class SpanSource { tagged, injected };
std::string_view to_string(SpanSource s) noexcept;
SpanSource parse_span_source(std::string_view s);

/// Half-open range of Unicode code points in the owning turn's text.
struct DisfluencySpan {
  DisfluencyType kind = DisfluencyType::filler;
  std::size_t start = 0;
  std::size_t end = 0;
  SpanSource source = SpanSource::tagged;

  friend bool operator==(const DisfluencySpan&, const DisfluencySpan&) = default;
};

struct Turn {
  Speaker speaker = Speaker::driver;
  std::string text;
  std::vector<DisfluencySpan> disfluency_spans;
  std::size_t turn_index = 0;
  Json extra = Json::object();  // unrecognized fields, kept for round-trip

  friend bool operator==(const Turn&, const Turn&) = default;
};

struct Scenario {
  std::string id;
  DomainTag domain = DomainTag::navigation;
  std::string text;
  Json extra = Json::object();

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct Dialog {
  std::string id;
  DomainTag domain = DomainTag::navigation;
  Scenario scenario;
  std::vector<Turn> turns;
  std::size_t num_turns = 0;
  Json extra = Json::object();

  friend bool operator==(const Dialog&, const Dialog&) = default;
};

struct Corpus {
  std::vector<Dialog> dialogs;
  Json provenance = Json::object();

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

Json to_json(const DisfluencySpan& s);
Json to_json(const Turn& t);
Json to_json(const Scenario& s);
Json to_json(const Dialog& d);
DisfluencySpan span_from_json(const Json& j);
Turn turn_from_json(const Json& j);
Scenario scenario_from_json(const Json& j);
Dialog dialog_from_json(const Json& j);

/// JSONL corpus file: an optional `{"corpus": {...}}` header line holding the
/// provenance, then one dialog object per line.
Corpus read_corpus(std::istream& in);
Corpus read_corpus(const std::filesystem::path& path);
void write_corpus(const Corpus& corpus, std::ostream& out);
void write_corpus(const Corpus& corpus, const std::filesystem::path& path);

std::vector<Scenario> read_scenarios(const std::filesystem::path& path);
void write_scenarios(const std::vector<Scenario>& scenarios, const std::filesystem::path& path);

/// Throws IntegrityError naming the first duplicated id.
void check_unique_ids(const Corpus& corpus);

// -- validation -------------------------------------------------------------

struct ValidationPolicy {
  bool strict_lengths = true;
};

struct Violation {
  std::string code;  // ALTERNATION, TURN_LENGTH, ...
  std::optional<std::size_t> turn;
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
  std::vector<Violation> violations;
  /// Rules downgraded by the policy (TURN_LENGTH in lenient mode).
  std::vector<Violation> warnings;

  bool ok() const noexcept { return violations.empty(); }
  friend bool operator==(const ValidationReport&, const ValidationReport&) = default;
};

ValidationReport validate_dialog(const Dialog& dialog, ValidationPolicy policy = {});

Json to_json(const Violation& v);

}  // namespace disco
