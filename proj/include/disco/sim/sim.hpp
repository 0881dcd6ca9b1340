#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "disco/backend/backend.hpp"
#include "disco/corpus/corpus.hpp"
#include "disco/disfluency/disfluency.hpp"
#include "disco/errors.hpp"

namespace disco::sim {

enum class PromptStage { opening, regular, concluding };
std::string_view to_string(PromptStage s) noexcept;

struct SimulationConfig {
  int num_turns = 6;
  int history_window = 6;  // turns, not driver/AI pairs
  double driver_temperature = 0.9;
  double ai_temperature = 0.7;
  int driver_max_tokens = 96;
  int ai_max_tokens = 128;
  std::uint64_t seed = 0;

  /// Throws ConfigError on an odd or unsupported length or a window below 1.
  void validate() const;
};

/// The four role templates plus their version string.
struct PromptTemplates {
  std::string driver_regular;
  std::string driver_concluding;
  std::string ai_regular;
  std::string ai_concluding;
  std::string version;
};

/// Reads {driver,ai}_{regular,concluding}.txt and VERSION from `dir`.
PromptTemplates load_templates(const std::filesystem::path& dir);
const PromptTemplates& default_templates();

/// Last min(k, size) turns. Throws ArgumentError when k < 1.
std::vector<Turn> window_history(std::span<const Turn> history, int k);

/// One "Driver: ..." / "Car AI: ..." line per turn, newlines inside a turn flattened.
std::string render_history(std::span<const Turn> history);

/// Stage of the prompt that produces turn `turn_index`.
PromptStage stage_for_turn(std::size_t turn_index, std::size_t num_turns);

backend::ChatRequest assemble_driver_prompt(const PromptTemplates& templates, const Scenario& scenario,
                                            std::span<const Turn> history, PromptStage stage,
                                            int history_window = 6);
backend::ChatRequest assemble_ai_prompt(const PromptTemplates& templates, std::span<const Turn> history,
                                        PromptStage stage, int history_window = 6);

/// Simulation stopped at `turn`; the turns produced so far are kept.
class SimulationAborted : public Error {
 public:
  SimulationAborted(const std::string& message, ErrorCategory cause, Dialog partial, std::size_t turn)
      : Error(cause, "simulation_aborted", message), partial_(std::move(partial)), turn_(turn) {}

  const Dialog& partial() const noexcept { return partial_; }
  std::size_t turn() const noexcept { return turn_; }

 private:
  Dialog partial_;
  std::size_t turn_;
};

/// Completion text cleaned of a leading speaker label and wrapping quotes.
std::string clean_utterance(std::string_view text);

/// Runs the alternating driver/car-AI loop. Driver turns are post-tagged
/// with the rule-based tagger. Dialog id defaults to the scenario id.
Dialog simulate_dialog(const SimulationConfig& config, backend::Backend& backend, const Scenario& scenario,
                       const disfluency::LexiconSet& lexicons, const PromptTemplates& templates,
                       std::string dialog_id = {});

enum class LengthSchedule { stratified, uniform };
std::string_view to_string(LengthSchedule s) noexcept;
LengthSchedule parse_length_schedule(std::string_view s);

/// Per-scenario turn counts. Stratified: within each domain, every length
/// appears floor(n/5) or ceil(n/5) times, order shuffled by seed.
std::vector<int> assign_lengths(std::span<const Scenario> scenarios, LengthSchedule schedule,
                                std::uint64_t seed);

struct GenerationPlan {
  std::vector<Scenario> scenarios;
  SimulationConfig simulation;  // num_turns ignored unless fixed_length is set
  LengthSchedule schedule = LengthSchedule::stratified;
  std::optional<int> fixed_length;
  std::uint64_t seed = 0;
  int jobs = 1;
};

struct GenerationFailure {
  std::size_t index = 0;
  std::string scenario_id;
  std::string message;
  Dialog partial;
};

struct GenerationResult {
  Corpus corpus;
  std::vector<GenerationFailure> failures;
};

/// One dialog per scenario, in scenario order regardless of `jobs`.
GenerationResult generate_corpus(const GenerationPlan& plan, backend::Backend& backend,
                                 const disfluency::LexiconSet& lexicons, const PromptTemplates& templates);

Json to_json(const GenerationFailure& f);

}  // namespace disco::sim
