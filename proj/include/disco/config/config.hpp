#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include "disco/backend/backend.hpp"
#include "disco/corpus/corpus.hpp"
#include "disco/sim/sim.hpp"

namespace disco::config {

struct Paths {
  std::filesystem::path data_dir;
  std::filesystem::path fewshot_dir;   // <data>/fewshot
  std::filesystem::path lexicon_dir;   // <data>/lexicons
  std::filesystem::path prompts_dir;   // <data>/prompts
  std::filesystem::path metric_sets;   // <data>/metric_sets.json
  std::filesystem::path output_dir = ".";
};

/// Per-stage seeds; a stage without one falls back to `seed`.
struct Seeds {
  std::optional<std::uint64_t> seed;
  std::map<std::string, std::uint64_t> stages;

  std::optional<std::uint64_t> for_stage(const std::string& stage) const;
};

struct PipelineConfig {
  backend::BackendConfig backend;
  std::map<DomainTag, int> scenario_counts;  // scenarios to generate per domain
  sim::SimulationConfig simulation;
  sim::LengthSchedule schedule = sim::LengthSchedule::stratified;
  int jobs = 1;
  Seeds seeds;
  Paths paths;

  /// Throws ConfigError on bad values or a referenced path that does not exist.
  void validate() const;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
std::optional<std::string> process_env(const std::string& name);

/// Defaults rooted at `data_dir`.
PipelineConfig default_config(const std::filesystem::path& data_dir);

/// Reads a JSON config over the defaults. Relative paths resolve against the
/// config file's directory. "${NAME}" is accepted only in backend.auth_token,
/// where it names the variable holding the token; the token itself is never read here.
PipelineConfig load_config(const std::filesystem::path& file, const std::filesystem::path& data_dir);
PipelineConfig config_from_json(const Json& j, const std::filesystem::path& base_dir,
                                const std::filesystem::path& data_dir);

Json to_json(const PipelineConfig& c);

}  // namespace disco::config
