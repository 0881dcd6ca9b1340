#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "disco/backend/backend.hpp"
#include "disco/corpus/corpus.hpp"

namespace disco::scenario {

/// 10 to 20 distinct, human-written example scenarios for one domain.
class FewShotBank {
 public:
  /// Throws ValidationError when the invariants do not hold.
  FewShotBank(DomainTag domain, std::vector<std::string> examples);

  DomainTag domain() const noexcept { return domain_; }
  const std::vector<std::string>& examples() const noexcept { return examples_; }

 private:
  DomainTag domain_;
  std::vector<std::string> examples_;
};

/// {"domain": "...", "examples": [...]}
FewShotBank load_fewshot_bank(const std::filesystem::path& file);
/// <dir>/<domain>.json
FewShotBank load_fewshot_bank(const std::filesystem::path& dir, DomainTag domain);

/// System template with {domain}, {count} and {examples} placeholders.
std::string load_scenario_template(const std::filesystem::path& prompts_dir);

inline constexpr int kMaxBatchSize = 25;

/// Throws ArgumentError unless 1 <= batch_size <= 25.
backend::ChatRequest build_scenario_prompt(const FewShotBank& bank, int batch_size,
                                           std::string_view system_template);
backend::ChatRequest build_scenario_prompt(const FewShotBank& bank, int batch_size);

/// "<domain>-0001" style id.
std::string scenario_id(DomainTag domain, std::size_t index);

/// Numbered list items ("1." / "2)"), falling back to "-", "*" or "•" bullets.
/// Ids count up from first_index. Throws ParseError carrying the raw text
/// when nothing parses.
std::vector<Scenario> parse_scenarios(std::string_view completion, DomainTag domain,
                                      std::size_t first_index = 0);

/// Lowercased, punctuation stripped, whitespace collapsed.
std::string dedup_key(std::string_view text);
/// Same key, or token-set Jaccard similarity above 0.8.
bool is_duplicate(std::string_view a, std::string_view b);
double jaccard(std::string_view a, std::string_view b);

struct ScenarioGenOptions {
  int batch_size = 10;
  double temperature = 0.9;
  int max_tokens = 1024;
};

/// Requests batches until target_count unique scenarios exist. Throws
/// InsufficientDiversityError once 10 * target_count candidates were seen
/// without reaching the target.
std::vector<Scenario> generate_scenarios(backend::Backend& backend, const FewShotBank& bank,
                                         std::size_t target_count, std::uint64_t seed,
                                         const ScenarioGenOptions& options = {});
std::vector<Scenario> generate_scenarios(const backend::BackendConfig& config, const FewShotBank& bank,
                                         std::size_t target_count, std::uint64_t seed,
                                         const ScenarioGenOptions& options = {});

}  // namespace disco::scenario
